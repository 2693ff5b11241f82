#include "blockspin/series.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace blockspin {

namespace {

CMatrix block_diag(const CMatrix& a, const CMatrix& b) {
  CMatrix m = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

CMatrix twice(const Operator& a) { return block_diag(a.matrix(), a.matrix()); }

CPolynomial linear_map(const BasisPtr& basis, const CMatrix& m) {
  CPolynomial p(basis, m.rows());
  for (Index i = basis->degree_begin(1); i < basis->degree_end(1); ++i) p.coeffs().col(i) = m.col(basis->parent_var(i));
  return p;
}

std::map<std::pair<int, int>, double> bidegree_norms(const CPolynomial& p, int split) {
  std::map<std::pair<int, int>, double> sq;
  const MonomialBasis& basis = *p.basis();
  for (Index i = basis.degree_begin(1); i < basis.size(); ++i) {
    const double w = 1.0 / basis.split_multiplicity(i, split);
    sq[basis.bidegree(i, split)] += p.coeffs().col(i).squaredNorm() * w;
  }
  for (auto& [bd, v] : sq) v = std::sqrt(v);
  return sq;
}

using Rhs = std::function<CPolynomial(const CPolynomial&)>;

// K Y = B u + R(Y), degree by degree.
CPolynomial solve_triangular(const BasisPtr& basis, const CMatrix& k_inv, const CMatrix& b, const Rhs& rhs) {
  CPolynomial y = linear_map(basis, k_inv * b);
  for (int d = 2; d <= basis->max_degree(); ++d) {
    const CPolynomial r = rhs(y);
    const Index s = basis->degree_begin(d), n = basis->degree_end(d) - s;
    y.coeffs().middleCols(s, n) = k_inv * r.coeffs().middleCols(s, n);
  }
  return y;
}

void require_order(int max_order) {
  if (max_order < 1) throw std::invalid_argument("series: max_order must be >= 1");
}

// Background-type equations: diag(D* + X*, D + X) Y + P'(Y) = diag(V*, V) u.
SeriesPair solve_background_type(const ActionSpec& spec, const Space& input, const Operator& x_star,
                                 const Operator& x, const Operator& v_star, const Operator& v, int max_order,
                                 double cond_limit, const std::string& assumption) {
  require_order(max_order);
  const BasisPtr basis = MonomialBasis::make(static_cast<int>(2 * input->dim()), max_order);
  const CMatrix j0 = spec.p.gradient().linear_part();
  const CMatrix k = block_diag((spec.d_adj + x_star).matrix(), (spec.rg.d + x).matrix()) + j0;
  const bool quadratic = !j0.isZero(0.0);
  const CMatrix k_inv = checked_inverse(k, quadratic ? assumption + " (with the quadratic part of P)" : assumption,
                                        cond_limit);
  const CMatrix b = block_diag(v_star.matrix(), v.matrix());
  const CPolynomial g2 = spec.p.gradient().degree_range(2, spec.p.max_degree());
  const bool nonlinear = g2.degree() >= 0;
  const CPolynomial y = solve_triangular(basis, k_inv, b, [&](const CPolynomial& cur) {
    if (!nonlinear) return CPolynomial(basis, cur.outputs());
    return compose(g2, cur) * cplx(-1.0);
  });
  return SeriesPair::from_stacked(input, spec.rg.h_minus, y);
}

double background_type_residual(const ActionSpec& spec, const SeriesPair& s, const Operator& x_star,
                                const Operator& x, const Operator& v_star, const Operator& v) {
  const CPolynomial y = s.stacked();
  const CMatrix k = block_diag((spec.d_adj + x_star).matrix(), (spec.rg.d + x).matrix());
  const CMatrix b = block_diag(v_star.matrix(), v.matrix());
  CPolynomial r = k * y - linear_map(y.basis(), b);
  if (!spec.p.is_zero()) r = r + compose(spec.p.gradient(), y);
  return max_tensor_norm(r, static_cast<int>(s.starred.input->dim()));
}

SeriesCheck check_from(const CMatrix& diff, const BasisPtr& basis, int split) {
  SeriesCheck out;
  std::map<int, double> by_order;
  for (const auto& [bd, v] : bidegree_norms(CPolynomial(basis, diff), split)) {
    by_order[bd.first + bd.second] = std::max(by_order[bd.first + bd.second], v);
    out.residual = std::max(out.residual, v);
  }
  for (const auto& [n, v] : by_order) out.by_order.push_back({"order " + std::to_string(n), v});
  return out;
}

}  // namespace

CVector FormalSeries::tensor(int kstar, int k) const {
  const MonomialBasis& basis = *poly.basis();
  const int m = static_cast<int>(input->dim());
  const int order = kstar + k;
  Index per_row = 1;
  for (int i = 0; i < order; ++i) per_row *= m;
  const Index rows = poly.outputs();
  CVector out = CVector::Zero(rows * per_row);
  if (order < 1 || order > basis.max_degree()) return out;
  std::vector<int> idx(order, 0);
  for (Index flat = 0; flat < per_row; ++flat) {
    Index rest = flat;
    for (int s = order - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rest % m);
      rest /= m;
    }
    Exponent e(2 * m, 0);
    for (int s = 0; s < kstar; ++s) ++e[idx[s]];
    for (int s = kstar; s < order; ++s) ++e[m + idx[s]];
    const Index mono = basis.find(e);
    const double w = basis.split_multiplicity(mono, m);
    for (Index r = 0; r < rows; ++r) out(r * per_row + flat) = poly.coeffs()(r, mono) / w;
  }
  return out;
}

SeriesPair SeriesPair::from_stacked(Space input, Space target, const CPolynomial& stacked) {
  const Index n = target->dim();
  if (stacked.outputs() != 2 * n) throw std::invalid_argument("SeriesPair: stacked output count mismatch");
  return {{input, target, stacked.rows(0, n)}, {input, target, stacked.rows(n, n)}};
}

CPolynomial SeriesPair::stacked() const {
  CMatrix c(starred.poly.outputs() + unstarred.poly.outputs(), starred.poly.coeffs().cols());
  c << starred.poly.coeffs(), unstarred.poly.coeffs();
  return CPolynomial(starred.poly.basis(), std::move(c));
}

std::pair<FieldVector, FieldVector> SeriesPair::evaluate(const FieldVector& x_star, const FieldVector& x) const {
  require_same_space(x_star.space(), starred.input, "SeriesPair::evaluate: x*");
  require_same_space(x.space(), starred.input, "SeriesPair::evaluate: x");
  CVector in(2 * x.dim());
  in << x_star.values(), x.values();
  const CVector mono = starred.poly.basis()->monomial_values(in);
  return {FieldVector(starred.target, starred.poly.coeffs() * mono),
          FieldVector(unstarred.target, unstarred.poly.coeffs() * mono)};
}

double max_tensor_norm(const CPolynomial& p, int split) {
  double m = 0.0;
  for (const auto& [bd, v] : bidegree_norms(p, split)) m = std::max(m, v);
  return m;
}

SeriesPair fps_background(const ActionSpec& spec, int max_order, double cond_limit) {
  const Operator x = spec.q_minus_adj * spec.rg.fq * spec.rg.q_minus;
  const Operator v = spec.q_minus_adj * spec.rg.fq;
  return solve_background_type(spec, spec.rg.h, x, x, v, v, max_order, cond_limit, "D + Q-*fQ Q- invertible");
}

SeriesPair fps_nextscale(const ActionSpec& spec, int max_order, double cond_limit) {
  const Operator& qcm = spec.k.qcheck_minus;
  const Operator x_star = spec.qcheck_minus_adj * spec.qcheck_adj * qcm;
  const Operator x = spec.qcheck_minus_adj * spec.k.qcheck * qcm;
  return solve_background_type(spec, spec.rg.h_plus, x_star, x, spec.qcheck_minus_adj * spec.qcheck_adj,
                               spec.qcheck_minus_adj * spec.k.qcheck, max_order, cond_limit,
                               "D + Qcheck-* Qcheck Qcheck- invertible");
}

SeriesPair fps_critical(const ActionSpec& spec, const SeriesPair& bg, int max_order, double cond_limit) {
  require_order(max_order);
  if (bg.max_order() < max_order) throw std::invalid_argument("fps_critical: background series order too low");
  require_same_space(bg.starred.input, spec.rg.h, "fps_critical: background input");
  const RGData& r = spec.rg;
  const BasisPtr basis = MonomialBasis::make(static_cast<int>(2 * r.h_plus->dim()), max_order);
  const CPolynomial phi = bg.stacked();
  const CMatrix lift = twice(r.fq * r.q_minus);
  const CMatrix k = twice(spec.k.coupling) - lift * phi.linear_part();
  const CMatrix k_inv = checked_inverse(k, "bQ*Q+fQ-fQ Q- L_(*) invertible", cond_limit);
  const CMatrix b = twice(spec.q_adj * r.b);
  const CPolynomial phi2 = phi.degree_range(2, bg.max_order());
  const bool nonlinear = phi2.degree() >= 0;
  const CPolynomial y = solve_triangular(basis, k_inv, b, [&](const CPolynomial& cur) {
    if (!nonlinear) return CPolynomial(basis, cur.outputs());
    return lift * compose(phi2, cur);
  });
  return SeriesPair::from_stacked(r.h_plus, r.h, y);
}

SeriesPair compose_cp(const SeriesPair& bg, const SeriesPair& cr, int max_order) {
  if (cr.max_order() != max_order || bg.max_order() < max_order)
    throw std::invalid_argument("compose_cp: order mismatch");
  require_same_space(bg.starred.input, cr.starred.target, "compose_cp: background input vs critical target");
  return SeriesPair::from_stacked(cr.starred.input, bg.starred.target, compose(bg.stacked(), cr.stacked()));
}

double background_equation_residual(const ActionSpec& spec, const SeriesPair& bg) {
  const Operator x = spec.q_minus_adj * spec.rg.fq * spec.rg.q_minus;
  const Operator v = spec.q_minus_adj * spec.rg.fq;
  return background_type_residual(spec, bg, x, x, v, v);
}

double nextscale_equation_residual(const ActionSpec& spec, const SeriesPair& ns) {
  const Operator& qcm = spec.k.qcheck_minus;
  return background_type_residual(spec, ns, spec.qcheck_minus_adj * spec.qcheck_adj * qcm,
                                  spec.qcheck_minus_adj * spec.k.qcheck * qcm,
                                  spec.qcheck_minus_adj * spec.qcheck_adj, spec.qcheck_minus_adj * spec.k.qcheck);
}

double critical_equation_residual(const ActionSpec& spec, const SeriesPair& bg, const SeriesPair& cr) {
  const RGData& r = spec.rg;
  const CPolynomial y = cr.stacked();
  CPolynomial res = twice(spec.k.coupling) * y - linear_map(y.basis(), twice(spec.q_adj * r.b)) -
                    twice(r.fq * r.q_minus) * compose(bg.stacked(), y);
  return max_tensor_norm(res, static_cast<int>(r.h_plus->dim()));
}

SeriesCheck verify_composition(const ActionSpec& spec, int max_order, double cond_limit) {
  const SeriesPair bg = fps_background(spec, max_order, cond_limit);
  const SeriesPair cr = fps_critical(spec, bg, max_order, cond_limit);
  const SeriesPair cp = compose_cp(bg, cr, max_order);
  const SeriesPair ns = fps_nextscale(spec, max_order, cond_limit);
  const CPolynomial a = cp.stacked();
  return check_from(a.coeffs() - ns.stacked().coeffs(), a.basis(), static_cast<int>(spec.rg.h_plus->dim()));
}

SeriesCheck verify_crit_representation(const ActionSpec& spec, int max_order, double cond_limit) {
  const RGData& r = spec.rg;
  const SeriesPair bg = fps_background(spec, max_order, cond_limit);
  const SeriesPair cr = fps_critical(spec, bg, max_order, cond_limit);
  const CPolynomial cp = compose_cp(bg, cr, max_order).stacked();
  const Operator& m_inv = spec.k.coupling_inv;
  const CPolynomial rhs =
      linear_map(cp.basis(), twice(m_inv * spec.q_adj * r.b)) + twice(m_inv * r.fq * r.q_minus) * cp;
  return check_from(cr.stacked().coeffs() - rhs.coeffs(), cp.basis(), static_cast<int>(r.h_plus->dim()));
}

}  // namespace blockspin
