#pragma once

// Truncated multivariate polynomials with vector coefficients.
//
// A MonomialBasis enumerates every monomial x^e in `nvars` variables with
// total degree <= max_degree, graded by degree.  A Polynomial stores one
// coefficient row per output and one column per monomial.  Symmetric
// multilinear tensors are carried in this compressed form: the coefficient of
// x^e equals the sum of the tensor entries over all index tuples with that
// multiset of indices.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

namespace blockspin {

using Exponent = std::vector<std::uint8_t>;

class MonomialBasis {
 public:
  MonomialBasis(int nvars, int max_degree);

  static std::shared_ptr<const MonomialBasis> make(int nvars, int max_degree) {
    return std::make_shared<const MonomialBasis>(nvars, max_degree);
  }

  int nvars() const noexcept { return nvars_; }
  int max_degree() const noexcept { return max_degree_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(exponents_.size()); }

  const Exponent& exponent(Eigen::Index i) const { return exponents_[i]; }
  int degree(Eigen::Index i) const noexcept { return degrees_[i]; }
  /// [begin, end) of monomials with total degree d.
  Eigen::Index degree_begin(int d) const { return offsets_[d]; }
  Eigen::Index degree_end(int d) const { return offsets_[d + 1]; }

  /// Index of x^e, or -1 when absent (degree too high).
  Eigen::Index find(const Exponent& e) const;
  /// Index of x_v * m_i, or -1 when it exceeds max_degree.
  Eigen::Index times_var(Eigen::Index i, int v) const { return times_var_[i * nvars_ + v]; }
  /// Index of m_i / x_v, or -1 when x_v does not divide m_i.
  Eigen::Index over_var(Eigen::Index i, int v) const { return over_var_[i * nvars_ + v]; }
  /// Index of m_a * m_b, or -1 when the degree exceeds max_degree.
  Eigen::Index product(Eigen::Index a, Eigen::Index b) const;
  /// For i > 0: a variable dividing m_i, and m_i / x_v.
  int parent_var(Eigen::Index i) const { return parent_var_[i]; }
  Eigen::Index parent(Eigen::Index i) const { return over_var(i, parent_var_[i]); }

  /// Number of ordered index tuples whose multiset is e (multinomial).
  double multiplicity(Eigen::Index i) const { return multiplicity_[i]; }
  /// Product of the multinomials of the two variable groups [0, split) and
  /// [split, nvars): ordered index tuples per slot group.
  double split_multiplicity(Eigen::Index i, int split) const;
  /// Degree split (first `split` variables, remaining variables).
  std::pair<int, int> bidegree(Eigen::Index i, int split) const;

  template <typename Derived>
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> monomial_values(
      const Eigen::MatrixBase<Derived>& x) const {
    using Scalar = typename Derived::Scalar;
    if (x.size() != nvars_) throw std::invalid_argument("monomial_values: wrong number of variables");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(size());
    v(0) = Scalar(1);
    for (Eigen::Index i = 1; i < size(); ++i) v(i) = v(parent(i)) * x(parent_var_[i]);
    return v;
  }

 private:
  int nvars_;
  int max_degree_;
  std::vector<Exponent> exponents_;
  std::vector<int> degrees_;
  std::vector<Eigen::Index> offsets_;
  std::vector<Eigen::Index> times_var_;
  std::vector<Eigen::Index> over_var_;
  std::vector<int> parent_var_;
  std::vector<double> multiplicity_;
  std::map<Exponent, Eigen::Index> lookup_;
};

using BasisPtr = std::shared_ptr<const MonomialBasis>;

template <typename Scalar>
class Polynomial {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  Polynomial() = default;
  Polynomial(BasisPtr basis, Eigen::Index outputs)
      : basis_(std::move(basis)), coeffs_(Matrix::Zero(outputs, basis_->size())) {}
  Polynomial(BasisPtr basis, Matrix coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (coeffs_.cols() != basis_->size()) throw std::invalid_argument("Polynomial: coefficient width mismatch");
  }

  /// The identity map: output v is the variable x_v.
  static Polynomial variables(BasisPtr basis) {
    Polynomial p(basis, basis->nvars());
    for (int v = 0; v < basis->nvars(); ++v) {
      Exponent e(basis->nvars(), 0);
      e[v] = 1;
      const Eigen::Index i = basis->find(e);
      if (i >= 0) p.coeffs_(v, i) = Scalar(1);
    }
    return p;
  }

  const BasisPtr& basis() const noexcept { return basis_; }
  Eigen::Index outputs() const noexcept { return coeffs_.rows(); }
  const Matrix& coeffs() const noexcept { return coeffs_; }
  Matrix& coeffs() noexcept { return coeffs_; }

  Vector evaluate(const Vector& x) const { return coeffs_ * basis_->monomial_values(x); }

  /// Keep only monomials whose degree lies in [lo, hi].
  Polynomial degree_range(int lo, int hi) const {
    Polynomial out(basis_, outputs());
    for (int d = std::max(lo, 0); d <= std::min(hi, basis_->max_degree()); ++d) {
      const Eigen::Index b = basis_->degree_begin(d), e = basis_->degree_end(d);
      out.coeffs_.middleCols(b, e - b) = coeffs_.middleCols(b, e - b);
    }
    return out;
  }
  Polynomial degree_part(int d) const { return degree_range(d, d); }

  /// Linear coefficient matrix (outputs x nvars).
  Matrix linear_part() const {
    Matrix m = Matrix::Zero(outputs(), basis_->nvars());
    for (Eigen::Index i = basis_->degree_begin(1); i < basis_->degree_end(1); ++i) m.col(basis_->parent_var(i)) = coeffs_.col(i);
    return m;
  }

  Polynomial rows(Eigen::Index start, Eigen::Index n) const { return Polynomial(basis_, coeffs_.middleRows(start, n)); }

  Polynomial derivative(int v) const {
    Polynomial out(basis_, outputs());
    for (Eigen::Index i = 1; i < basis_->size(); ++i) {
      const int e = basis_->exponent(i)[v];
      if (e == 0) continue;
      out.coeffs_.col(basis_->over_var(i, v)) += coeffs_.col(i) * Scalar(static_cast<double>(e));
    }
    return out;
  }

  /// Largest degree carrying a nonzero coefficient (-1 for the zero polynomial).
  int degree() const {
    for (int d = basis_->max_degree(); d >= 0; --d) {
      const Eigen::Index b = basis_->degree_begin(d), e = basis_->degree_end(d);
      if ((coeffs_.middleCols(b, e - b).array() != Scalar(0)).any()) return d;
    }
    return -1;
  }
  /// Smallest degree carrying a nonzero coefficient (-1 for the zero polynomial).
  int low_degree() const {
    for (int d = 0; d <= basis_->max_degree(); ++d) {
      const Eigen::Index b = basis_->degree_begin(d), e = basis_->degree_end(d);
      if ((coeffs_.middleCols(b, e - b).array() != Scalar(0)).any()) return d;
    }
    return -1;
  }

  Polynomial operator+(const Polynomial& o) const { return Polynomial(basis_, coeffs_ + o.coeffs_); }
  Polynomial operator-(const Polynomial& o) const { return Polynomial(basis_, coeffs_ - o.coeffs_); }
  Polynomial operator*(Scalar s) const { return Polynomial(basis_, coeffs_ * s); }

  /// Apply a linear map to the outputs.
  template <typename Derived>
  friend Polynomial operator*(const Eigen::MatrixBase<Derived>& m, const Polynomial& p) {
    return Polynomial(p.basis_, m * p.coeffs_);
  }

 private:
  BasisPtr basis_;
  Matrix coeffs_;
};

/// Truncated product of two scalar polynomials on a shared basis.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> truncated_product(const MonomialBasis& basis,
                                                           const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& a,
                                                           const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& b) {
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> out = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(basis.size());
  std::vector<Eigen::Index> nz_b;
  for (Eigen::Index j = 0; j < b.size(); ++j)
    if (b(j) != Scalar(0)) nz_b.push_back(j);
  const int top = basis.max_degree();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) == Scalar(0)) continue;
    const int di = basis.degree(i);
    for (Eigen::Index j : nz_b) {
      if (di + basis.degree(j) > top) continue;
      out(basis.product(i, j)) += a(i) * b(j);
    }
  }
  return out;
}

/// outer(inner(y)), truncated at inner's basis degree.  inner.outputs() must
/// equal outer's variable count.
template <typename Scalar>
Polynomial<Scalar> compose(const Polynomial<Scalar>& outer, const Polynomial<Scalar>& inner) {
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const MonomialBasis& ob = *outer.basis();
  const MonomialBasis& ib = *inner.basis();
  if (inner.outputs() != ob.nvars()) throw std::invalid_argument("compose: inner outputs differ from outer variables");

  // Without a constant term in inner, monomials above ib.max_degree() vanish.
  int top = outer.degree();
  if (inner.coeffs().col(0).isZero(0.0)) top = std::min(top, ib.max_degree());
  // values(i) = m_i(inner), built from the parent monomial times one variable.
  Matrix values = Matrix::Zero(ob.size(), ib.size());
  values(0, 0) = Scalar(1);
  for (Eigen::Index i = 1; i < ob.size(); ++i) {
    if (ob.degree(i) > top) break;
    const RowVector parent = values.row(ob.parent(i));
    const RowVector var = inner.coeffs().row(ob.parent_var(i));
    values.row(i) = truncated_product<Scalar>(ib, parent, var);
  }
  return Polynomial<Scalar>(inner.basis(), outer.coeffs() * values);
}

}  // namespace blockspin
