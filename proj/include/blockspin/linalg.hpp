#pragma once

// Finite-dimensional spaces carrying a real symmetric positive-definite
// bilinear form, operators between their complexifications, and the
// inversion identities used throughout one block-spin step.
//
// The pairing is the bilinear (unconjugated) extension of the real form:
// <u, v> = u^T G v.  Adjoints are taken with respect to these pairings, so
// A* = G_dom^{-1} A^T G_cod; no complex conjugation appears anywhere.

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blockspin {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kDefaultCondLimit = 1e8;

/// Raised when an operator that the construction requires to be invertible
/// has estimated condition number above the configured limit.
class NearSingular : public std::runtime_error {
 public:
  NearSingular(std::string assumption, double condition, double limit);

  const std::string& assumption() const noexcept { return assumption_; }
  double condition() const noexcept { return condition_; }

 private:
  std::string assumption_;
  double condition_;
};

class SpaceMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A real space H with positive-definite symmetric form, together with its
/// complexification.  Immutable; shared through `Space`.
class SpaceSpec {
 public:
  SpaceSpec(std::string name, RMatrix gram);

  const std::string& name() const noexcept { return name_; }
  Index dim() const noexcept { return gram_.rows(); }
  const RMatrix& gram() const noexcept { return gram_; }
  const RMatrix& gram_inverse() const noexcept { return gram_inv_; }
  bool has_identity_gram() const noexcept { return identity_; }
  /// det(gram); the volume form on the complexification carries this factor.
  double gram_determinant() const noexcept { return gram_det_; }

 private:
  std::string name_;
  RMatrix gram_;
  RMatrix gram_inv_;
  double gram_det_ = 1.0;
  bool identity_ = false;
};

using Space = std::shared_ptr<const SpaceSpec>;

Space make_space(std::string name, Index dim);
Space make_space(std::string name, RMatrix gram);

/// Same object, or same name, dimension and form.
bool same_space(const Space& a, const Space& b);
void require_same_space(const Space& a, const Space& b, std::string_view what);

// ---------------------------------------------------------------------------
// Expression-level free functions.  These work on any Eigen scalar and are
// what the typed wrappers below dispatch to.

template <typename DerivedU, typename DerivedG, typename DerivedV>
typename DerivedU::Scalar pairing(const Eigen::MatrixBase<DerivedU>& u,
                                  const Eigen::MatrixBase<DerivedG>& gram,
                                  const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  return (u.transpose() * gram.template cast<Scalar>() * v).value();
}

/// A* = G_dom^{-1} A^T G_cod for A : dom -> cod.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> adjoint_matrix(
    const Eigen::MatrixBase<Derived>& a, const RMatrix& gram_dom_inverse,
    const RMatrix& gram_cod) {
  using Scalar = typename Derived::Scalar;
  return gram_dom_inverse.cast<Scalar>() * a.transpose() * gram_cod.cast<Scalar>();
}

template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(a);
  return svd.singularValues()(0);
}

/// 2-norm condition number; +inf for a singular (or empty-rank) matrix.
template <typename Derived>
double condition_number(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

/// ||lhs - rhs||_2 / ||lhs||_2, falling back to the absolute residual when
/// lhs vanishes.
template <typename DerivedA, typename DerivedB>
double relative_residual(const Eigen::MatrixBase<DerivedA>& lhs,
                         const Eigen::MatrixBase<DerivedB>& rhs) {
  const double diff = spectral_norm(lhs - rhs);
  const double scale = spectral_norm(lhs);
  return scale > 0.0 ? diff / scale : diff;
}

/// Inverse behind a condition-number gate.  `assumption` names the
/// hypothesis that failed, e.g. "D + Q-*fQ Q- invertible".
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> checked_inverse(
    const Eigen::MatrixBase<Derived>& a, std::string_view assumption,
    double cond_limit = kDefaultCondLimit) {
  if (a.rows() != a.cols()) throw std::invalid_argument("checked_inverse: matrix not square");
  const double cond = condition_number(a);
  if (!(cond <= cond_limit)) throw NearSingular(std::string(assumption), cond, cond_limit);
  return a.partialPivLu().inverse();
}

/// (1_W + g q f^{-1} q_*)^{-1} = 1_W - g q (f + q_* g q)^{-1} q_*
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> woodbury_left_matrix(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& f,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& g,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& q,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& q_star,
    double cond_limit = kDefaultCondLimit) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  checked_inverse(f, "f invertible", cond_limit);
  const Mat inner = checked_inverse(Mat(f + q_star * g * q), "f + q_* g q invertible", cond_limit);
  return Mat::Identity(g.rows(), g.cols()) - g * q * inner * q_star;
}

/// (1_W + q f^{-1} q_* g)^{-1} = 1_W - q (f + q_* g q)^{-1} q_* g
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> woodbury_right_matrix(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& f,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& g,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& q,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& q_star,
    double cond_limit = kDefaultCondLimit) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  checked_inverse(f, "f invertible", cond_limit);
  const Mat inner = checked_inverse(Mat(f + q_star * g * q), "f + q_* g q invertible", cond_limit);
  return Mat::Identity(g.rows(), g.cols()) - q * inner * q_star * g;
}

// ---------------------------------------------------------------------------
// Typed values.

class FieldVector {
 public:
  FieldVector() = default;
  FieldVector(Space space, CVector values);

  static FieldVector zero(Space space);

  const Space& space() const noexcept { return space_; }
  const CVector& values() const noexcept { return values_; }
  Index dim() const noexcept { return values_.size(); }

  FieldVector operator+(const FieldVector& other) const;
  FieldVector operator-(const FieldVector& other) const;
  FieldVector operator*(cplx s) const;

 private:
  Space space_;
  CVector values_;
};

/// Complex-linear map between complexified spaces.
class Operator {
 public:
  Operator() = default;
  Operator(Space domain, Space codomain, CMatrix entries);

  static Operator identity(const Space& space);
  static Operator zero(const Space& domain, const Space& codomain);
  /// Lift a real matrix.
  static Operator real(const Space& domain, const Space& codomain, const RMatrix& entries);

  const Space& domain() const noexcept { return domain_; }
  const Space& codomain() const noexcept { return codomain_; }
  const CMatrix& matrix() const noexcept { return m_; }

  Operator operator*(const Operator& rhs) const;
  FieldVector operator*(const FieldVector& v) const;
  Operator operator+(const Operator& rhs) const;
  Operator operator-(const Operator& rhs) const;
  Operator operator*(cplx s) const;
  friend Operator operator*(cplx s, const Operator& a) { return a * s; }

 private:
  Space domain_;
  Space codomain_;
  CMatrix m_;
};

cplx pairing(const FieldVector& u, const FieldVector& v);
Operator adjoint(const Operator& a);

/// Solve A x = rhs; fails with NearSingular naming `assumption` when
/// cond(A) exceeds cond_limit.
FieldVector solve(const Operator& a, const FieldVector& rhs, double cond_limit = kDefaultCondLimit,
                  std::string_view assumption = "operator invertible");
Operator inverse(const Operator& a, std::string_view assumption = "operator invertible",
                 double cond_limit = kDefaultCondLimit);

Operator woodbury_left(const Operator& f, const Operator& g, const Operator& q,
                       const Operator& q_star, double cond_limit = kDefaultCondLimit);
Operator woodbury_right(const Operator& f, const Operator& g, const Operator& q,
                        const Operator& q_star, double cond_limit = kDefaultCondLimit);

/// ||A - A*|| / ||A||: deviation from self-adjointness with respect to the form.
double symmetry_defect(const Operator& a);
double spectral_norm(const Operator& a);
double condition_number(const Operator& a);

}  // namespace blockspin
