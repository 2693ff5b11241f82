#include "blockspin/action.hpp"

#include "blockspin/quadrature.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace blockspin {

namespace {

CVector stack(const CVector& a, const CVector& b) {
  CVector x(a.size() + b.size());
  x << a, b;
  return x;
}

}  // namespace

PolynomialP::PolynomialP(Space h_minus, int max_degree)
    : space_(std::move(h_minus)),
      poly_(MonomialBasis::make(static_cast<int>(2 * space_->dim()), std::max(max_degree, 0)), 1) {
  finish();
}

PolynomialP PolynomialP::from_entries(Space h_minus, int max_degree, const std::vector<TensorEntry>& entries) {
  PolynomialP p(std::move(h_minus), max_degree);
  const int n = static_cast<int>(p.dim());
  const MonomialBasis& basis = *p.poly_.basis();
  std::map<Index, std::vector<cplx>> parts;
  for (const TensorEntry& t : entries) {
    const int deg = static_cast<int>(t.star.size() + t.plain.size());
    if (deg < 2) throw std::invalid_argument("polynomial P: monomials must have degree >= 2");
    if (deg > max_degree)
      throw std::invalid_argument("polynomial P: degree " + std::to_string(deg) + " exceeds max degree " +
                                  std::to_string(max_degree));
    Exponent e(2 * n, 0);
    for (int i : t.star) {
      if (i < 0 || i >= n) throw std::invalid_argument("polynomial P: star index out of range");
      ++e[i];
    }
    for (int j : t.plain) {
      if (j < 0 || j >= n) throw std::invalid_argument("polynomial P: index out of range");
      ++e[n + j];
    }
    parts[basis.find(e)].push_back(t.value);
  }
  for (auto& [index, values] : parts) {
    std::sort(values.begin(), values.end(), [](const cplx& a, const cplx& b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    cplx sum = 0.0;
    for (const cplx& v : values) sum += v;
    p.poly_.coeffs()(0, index) = sum;
  }
  p.finish();
  return p;
}

PolynomialP PolynomialP::from_polynomial(Space h_minus, CPolynomial poly) {
  if (poly.outputs() != 1 || poly.basis()->nvars() != 2 * h_minus->dim())
    throw std::invalid_argument("polynomial P: expected a scalar polynomial in (phi*, phi)");
  if (poly.degree() >= 0 && poly.low_degree() < 2)
    throw std::invalid_argument("polynomial P: monomials must have degree >= 2");
  PolynomialP p;
  p.space_ = std::move(h_minus);
  p.poly_ = std::move(poly);
  p.finish();
  return p;
}

void PolynomialP::finish() {
  const Index n = dim();
  CPolynomial raw(poly_.basis(), 2 * n);
  for (Index j = 0; j < n; ++j) {
    raw.coeffs().row(j) = poly_.derivative(static_cast<int>(n + j)).coeffs();
    raw.coeffs().row(n + j) = poly_.derivative(static_cast<int>(j)).coeffs();
  }
  if (space_->has_identity_gram()) {
    grad_ = raw;
  } else {
    CMatrix g = CMatrix::Zero(2 * n, 2 * n);
    g.topLeftCorner(n, n) = space_->gram_inverse().cast<cplx>();
    g.bottomRightCorner(n, n) = space_->gram_inverse().cast<cplx>();
    grad_ = g * raw;
  }
  hess_.clear();
  for (int v = 0; v < 2 * n; ++v) hess_.push_back(grad_.derivative(v));
}

std::vector<std::pair<int, int>> PolynomialP::bidegrees() const {
  std::vector<std::pair<int, int>> out;
  const MonomialBasis& basis = *poly_.basis();
  for (Index i = 0; i < basis.size(); ++i) {
    if (poly_.coeffs()(0, i) == cplx(0.0)) continue;
    const auto bd = basis.bidegree(i, static_cast<int>(dim()));
    if (std::find(out.begin(), out.end(), bd) == out.end()) out.push_back(bd);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CVector PolynomialP::dense_tensor(int kstar, int k) const {
  const int n = static_cast<int>(dim());
  const int order = kstar + k;
  Index size = 1;
  for (int i = 0; i < order; ++i) size *= n;
  CVector out = CVector::Zero(size);
  if (order > max_degree()) return out;
  const MonomialBasis& basis = *poly_.basis();
  std::vector<int> idx(order, 0);
  for (Index flat = 0; flat < size; ++flat) {
    Index rest = flat;
    for (int s = order - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rest % n);
      rest /= n;
    }
    Exponent e(2 * n, 0);
    for (int s = 0; s < kstar; ++s) ++e[idx[s]];
    for (int s = kstar; s < order; ++s) ++e[n + idx[s]];
    const Index m = basis.find(e);
    out(flat) = poly_.coeffs()(0, m) / basis.split_multiplicity(m, n);
  }
  return out;
}

cplx PolynomialP::value(const CVector& phi_star, const CVector& phi) const {
  return poly_.evaluate(stack(phi_star, phi))(0);
}

CVector PolynomialP::gradient(const CVector& phi_star, const CVector& phi) const {
  return grad_.evaluate(stack(phi_star, phi));
}

CMatrix PolynomialP::jacobian(const CVector& phi_star, const CVector& phi) const {
  const CVector x = stack(phi_star, phi);
  const CVector mono = poly_.basis()->monomial_values(x);
  CMatrix j(grad_.outputs(), static_cast<Index>(hess_.size()));
  for (std::size_t v = 0; v < hess_.size(); ++v) j.col(static_cast<Index>(v)) = hess_[v].coeffs() * mono;
  return j;
}

PValue eval_P_and_grads(const PolynomialP& p, const FieldVector& phi_star, const FieldVector& phi) {
  require_same_space(phi_star.space(), p.space(), "eval_P_and_grads: phi*");
  require_same_space(phi.space(), p.space(), "eval_P_and_grads: phi");
  const CVector x = stack(phi_star.values(), phi.values());
  const CVector mono = p.scalar().basis()->monomial_values(x);
  const CVector g = p.gradient().coeffs() * mono;
  const Index n = p.dim();
  return {(p.scalar().coeffs() * mono)(0), FieldVector(p.space(), g.head(n)), FieldVector(p.space(), g.tail(n))};
}

ActionSpec ActionSpec::make(RGData rg, PolynomialP p, double cond_limit) {
  rg.validate();
  require_same_space(p.space(), rg.h_minus, "ActionSpec: P must live on H-");
  ActionSpec s;
  s.k = compute_kernels(rg, cond_limit);
  s.q_minus_adj = adjoint(rg.q_minus);
  s.q_adj = adjoint(rg.q);
  s.d_adj = adjoint(rg.d);
  s.qcheck_adj = adjoint(s.k.qcheck);
  s.qcheck_minus_adj = adjoint(s.k.qcheck_minus);
  s.c_inverse = s.k.delta + s.q_adj * rg.q * rg.b;
  s.rg = std::move(rg);
  s.p = std::move(p);
  return s;
}

cplx eval_fA(const ActionSpec& spec, const FieldVector& phi_star, const FieldVector& phi) {
  return pairing(phi_star, spec.rg.d * phi) + spec.p.value(phi_star.values(), phi.values());
}

cplx eval_A(const ActionSpec& spec, const FieldVector& psi_star, const FieldVector& psi,
            const FieldVector& phi_star, const FieldVector& phi) {
  const RGData& r = spec.rg;
  return pairing(psi_star - r.q_minus * phi_star, r.fq * (psi - r.q_minus * phi)) + eval_fA(spec, phi_star, phi);
}

cplx eval_Aeff(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
               const FieldVector& psi_star, const FieldVector& psi, const FieldVector& phi_star,
               const FieldVector& phi) {
  const RGData& r = spec.rg;
  return r.b * pairing(theta_star - r.q * psi_star, theta - r.q * psi) + eval_A(spec, psi_star, psi, phi_star, phi);
}

cplx eval_Acheck(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                 const FieldVector& phi_star, const FieldVector& phi) {
  const Operator& qcm = spec.k.qcheck_minus;
  return pairing(theta_star - qcm * phi_star, spec.k.qcheck * (theta - qcm * phi)) + eval_fA(spec, phi_star, phi);
}

ActionGradient grad_fA(const ActionSpec& spec, const FieldVector& phi_star, const FieldVector& phi) {
  const PValue pv = eval_P_and_grads(spec.p, phi_star, phi);
  ActionGradient g;
  g.phi_star = spec.rg.d * phi + pv.grad_phi_star;
  g.phi = spec.d_adj * phi_star + pv.grad_phi;
  return g;
}

ActionGradient grad_A(const ActionSpec& spec, const FieldVector& psi_star, const FieldVector& psi,
                      const FieldVector& phi_star, const FieldVector& phi) {
  const RGData& r = spec.rg;
  ActionGradient g = grad_fA(spec, phi_star, phi);
  g.psi_star = r.fq * (psi - r.q_minus * phi);
  g.psi = r.fq * (psi_star - r.q_minus * phi_star);
  g.phi_star = g.phi_star - spec.q_minus_adj * g.psi_star;
  g.phi = g.phi - spec.q_minus_adj * g.psi;
  return g;
}

ActionGradient grad_Aeff(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                         const FieldVector& psi_star, const FieldVector& psi, const FieldVector& phi_star,
                         const FieldVector& phi) {
  const RGData& r = spec.rg;
  ActionGradient g = grad_A(spec, psi_star, psi, phi_star, phi);
  g.theta_star = (theta - r.q * psi) * r.b;
  g.theta = (theta_star - r.q * psi_star) * r.b;
  g.psi_star = g.psi_star - spec.q_adj * g.theta_star;
  g.psi = g.psi - spec.q_adj * g.theta;
  return g;
}

ActionGradient grad_Acheck(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                           const FieldVector& phi_star, const FieldVector& phi) {
  const Operator& qcm = spec.k.qcheck_minus;
  ActionGradient g = grad_fA(spec, phi_star, phi);
  g.theta_star = spec.k.qcheck * (theta - qcm * phi);
  g.theta = spec.qcheck_adj * (theta_star - qcm * phi_star);
  g.phi_star = g.phi_star - spec.qcheck_minus_adj * g.theta_star;
  g.phi = g.phi - spec.qcheck_minus_adj * g.theta;
  return g;
}

FieldVector psi_tilde(const ActionSpec& spec, const FieldVector& theta, const FieldVector& phi) {
  const RGData& r = spec.rg;
  return spec.k.coupling_inv * (spec.q_adj * theta * r.b + r.fq * (r.q_minus * phi));
}

PreparationResidual preparation_check(const ActionSpec& spec, const FieldVector& theta_star,
                                      const FieldVector& theta, const FieldVector& phi_star,
                                      const FieldVector& phi) {
  const RGData& r = spec.rg;
  const FieldVector pt_star = psi_tilde(spec, theta_star, phi_star);
  const FieldVector pt = psi_tilde(spec, theta, phi);

  PreparationResidual res;
  const cplx check = eval_Acheck(spec, theta_star, theta, phi_star, phi);
  const cplx eff = eval_Aeff(spec, theta_star, theta, pt_star, pt, phi_star, phi);
  res.value = std::abs(check - eff) / std::max(1.0, std::abs(check));

  const ActionGradient lhs = grad_Acheck(spec, theta_star, theta, phi_star, phi);
  const ActionGradient a = grad_A(spec, pt_star, pt, phi_star, phi);
  const ActionGradient e = grad_Aeff(spec, theta_star, theta, pt_star, pt, phi_star, phi);
  const Operator lift = spec.q_minus_adj * r.fq * spec.k.coupling_inv;
  const auto slot = [](const FieldVector& l, const FieldVector& rhs) {
    return (l.values() - rhs.values()).norm() / std::max(1.0, l.values().norm());
  };
  res.gradient = std::max(slot(lhs.phi_star, a.phi_star + lift * e.psi_star), slot(lhs.phi, a.phi + lift * e.psi));
  return res;
}

cplx delta_A_direct(const ActionSpec& spec, const BackgroundFn& bg, const FieldVector& theta_star,
                    const FieldVector& theta, const FieldVector& psi_star_cr, const FieldVector& psi_cr,
                    const FieldVector& dpsi_star, const FieldVector& dpsi) {
  const FieldVector s_star = psi_star_cr + dpsi_star;
  const FieldVector s = psi_cr + dpsi;
  const auto [f_star, f] = bg(s_star, s);
  const auto [b_star, b] = bg(psi_star_cr, psi_cr);
  return eval_Aeff(spec, theta_star, theta, s_star, s, f_star, f) -
         eval_Aeff(spec, theta_star, theta, psi_star_cr, psi_cr, b_star, b);
}

cplx delta_A_formula(const ActionSpec& spec, const DeltaPlusFn& plus, const FieldVector& dpsi_star,
                     const FieldVector& dpsi, int t_nodes) {
  const RGData& r = spec.rg;
  const Operator lift = r.fq * r.q_minus;
  const QuadratureRule rule = gauss_legendre(t_nodes, 0.0, 1.0);
  std::vector<cplx> terms;
  terms.reserve(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double t = rule.nodes[i];
    const auto [p_star, p] = plus(dpsi_star * t, dpsi * t);
    terms.push_back(rule.weights[i] * (pairing(dpsi_star, lift * p) + pairing(lift * p_star, dpsi)));
  }
  return pairing(dpsi_star, spec.c_inverse * dpsi) - pairwise_sum(terms);
}

cplx delta_E(const FieldFunction& e, const FieldVector& psi_star_cr, const FieldVector& psi_cr,
             const FieldVector& dpsi_star, const FieldVector& dpsi) {
  return e(psi_star_cr + dpsi_star, psi_cr + dpsi) - e(psi_star_cr, psi_cr);
}

}  // namespace blockspin
