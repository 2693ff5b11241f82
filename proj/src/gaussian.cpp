#include "blockspin/gaussian.hpp"

#include "blockspin/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

namespace blockspin {

namespace {

void require_positive(const Operator& a, const std::string& what) {
  const CMatrix gm = a.domain()->gram().cast<cplx>() * a.matrix();
  const CMatrix herm = 0.5 * (gm + gm.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw std::invalid_argument(what + " not positive definite");
}

cplx log_det(const CMatrix& m) {
  const Eigen::PartialPivLU<CMatrix> lu(m);
  cplx s = 0.0;
  for (Index i = 0; i < m.rows(); ++i) s += std::log(lu.matrixLU()(i, i));
  // permutation sign
  const auto& p = lu.permutationP().indices();
  std::vector<bool> seen(p.size(), false);
  int transpositions = 0;
  for (Index i = 0; i < p.size(); ++i) {
    if (seen[i]) continue;
    Index len = 0;
    for (Index j = i; !seen[j]; j = p(j)) {
      seen[j] = true;
      ++len;
    }
    transpositions += static_cast<int>(len - 1);
  }
  if (transpositions % 2 == 1) s += cplx(0.0, std::numbers::pi);
  return s;
}

struct DiscGrid {
  std::vector<cplx> points;
  std::vector<double> weights;  // include r dr dangle / pi
};

// Gauss-Legendre in the radius on [r_in, r_out], uniform angles.
DiscGrid disc_grid(double r_in, double r_out, int nodes) {
  DiscGrid g;
  if (!(r_out > r_in)) return g;
  const QuadratureRule radial = gauss_legendre(nodes, r_in, r_out);
  g.points.reserve(static_cast<std::size_t>(nodes) * nodes);
  g.weights.reserve(static_cast<std::size_t>(nodes) * nodes);
  for (int i = 0; i < nodes; ++i) {
    const double r = radial.nodes[i];
    const double w = radial.weights[i] * r * 2.0 / nodes;
    for (int j = 0; j < nodes; ++j) {
      const double a = 2.0 * std::numbers::pi * (j + 0.5) / nodes;
      g.points.push_back(std::polar(r, a));
      g.weights.push_back(w);
    }
  }
  return g;
}

FieldVector scalar_field(const Space& s, cplx v) { return FieldVector(s, CVector::Constant(1, v)); }

void require_scalar_spaces(const RGData& r, const char* what) {
  if (r.h->dim() != 1 || r.h_plus->dim() != 1)
    throw std::invalid_argument(std::string(what) + ": quadrature mode needs dim H = dim H+ = 1");
}

struct PsiGrid {
  DiscGrid grid;
  std::vector<cplx> a;   // A(conj psi, psi; phi_bg)
  std::vector<cplx> e;   // E(conj psi, psi)
  std::vector<cplx> qpsi;
};

PsiGrid psi_grid(const ActionSpec& spec, double radius, int nodes, const FieldFunction& e,
                 const NewtonOptions& newton) {
  const RGData& r = spec.rg;
  PsiGrid out;
  out.grid = disc_grid(0.0, radius, nodes);
  const cplx q = r.q.matrix()(0, 0);
  for (const cplx& z : out.grid.points) {
    const FieldVector ps = scalar_field(r.h, std::conj(z));
    const FieldVector p = scalar_field(r.h, z);
    const FieldPair bg = newton_background(spec, ps, p, newton);
    out.a.push_back(eval_A(spec, ps, p, bg.star, bg.plain));
    out.e.push_back(e ? e(ps, p) : cplx(0.0));
    out.qpsi.push_back(q * z);
  }
  return out;
}

struct Sides {
  cplx lhs, rhs, small, large;
  double outer = 0.0;
};

Sides integrate_sides(const ActionSpec& spec, const QuadratureConfig& c, int nodes, const FieldFunction& e,
                      const NewtonOptions& newton) {
  const RGData& r = spec.rg;
  const double g_h = r.h->gram_determinant();
  const double g_p = r.h_plus->gram_determinant();
  const double gp_form = r.h_plus->gram()(0, 0);
  const double b = r.b;
  const PsiGrid pg = psi_grid(spec, c.radius_psi, nodes, e, newton);
  const std::size_t np = pg.grid.points.size();

  Sides s;
  {
    std::vector<cplx> terms(np);
    for (std::size_t i = 0; i < np; ++i) terms[i] = pg.grid.weights[i] * g_h * std::exp(-pg.a[i] + pg.e[i]);
    s.lhs = pairwise_sum(terms);
  }

  std::vector<cplx> inner(np);
  auto aeff = [&](cplx theta, std::size_t i) {
    return b * gp_form * (std::conj(theta) - std::conj(pg.qpsi[i])) * (theta - pg.qpsi[i]) + pg.a[i];
  };

  // small fields: exp(-Acheck) exp(E(psi_cr)) F(theta)
  const DiscGrid small = disc_grid(0.0, c.radius_theta, nodes);
  std::vector<cplx> small_terms(small.points.size());
  for (std::size_t k = 0; k < small.points.size(); ++k) {
    const cplx th = small.points[k];
    const FieldVector ts = scalar_field(r.h_plus, std::conj(th));
    const FieldVector t = scalar_field(r.h_plus, th);
    const CriticalPoint cp = newton_critical(spec, ts, t, newton);
    const cplx acheck = eval_Acheck(spec, ts, t, cp.phi_star, cp.phi);
    const cplx base = eval_Aeff(spec, ts, t, cp.psi_star, cp.psi, cp.phi_star, cp.phi);
    const cplx e_cr = e ? e(cp.psi_star, cp.psi) : cplx(0.0);
    for (std::size_t i = 0; i < np; ++i)
      inner[i] = pg.grid.weights[i] * g_h * std::exp(-(aeff(th, i) - base) + (pg.e[i] - e_cr));
    const cplx f = pairwise_sum(inner);
    small_terms[k] = small.weights[k] * g_p * std::exp(-acheck + e_cr) * f;
  }
  s.small = pairwise_sum(small_terms);

  // large fields: theta outside the disc, psi integrated directly
  const double qnorm = std::abs(r.q.matrix()(0, 0));
  s.outer = qnorm * c.radius_psi + c.theta_cutoff_sigmas / std::sqrt(b * gp_form);
  const DiscGrid large = disc_grid(c.radius_theta, s.outer, nodes);
  std::vector<cplx> large_terms(large.points.size());
  for (std::size_t k = 0; k < large.points.size(); ++k) {
    const cplx th = large.points[k];
    for (std::size_t i = 0; i < np; ++i)
      inner[i] = pg.grid.weights[i] * g_h * std::exp(-aeff(th, i) + pg.e[i]);
    large_terms[k] = large.weights[k] * g_p * pairwise_sum(inner);
  }
  s.large = pairwise_sum(large_terms);
  s.rhs = b * (s.small + s.large);
  return s;
}

}  // namespace

cplx gaussian_exact(const Operator& m) {
  require_same_space(m.domain(), m.codomain(), "gaussian_exact");
  require_positive(m, "gaussian_exact: Re M");
  return std::exp(-log_det(m.matrix()));
}

InsertionConstant insertion_constant(const RGData& data, const std::vector<CVector>& shifts, int nodes) {
  if (!(data.b > 0.0)) throw std::invalid_argument("insertion_constant: b must be > 0");
  InsertionConstant out;
  out.value = std::pow(data.b, -static_cast<double>(data.h_plus->dim()));
  if (data.h_plus->dim() != 1) return out;
  const double g = data.h_plus->gram()(0, 0);
  // fixed square grid, large enough for every shift
  double reach = 0.0;
  for (const CVector& s : shifts) reach = std::max(reach, std::abs((data.q.matrix() * s)(0)));
  const double half = reach + 9.0 / std::sqrt(data.b * g);
  const QuadratureRule rule = gauss_legendre(nodes, -half, half);
  for (const CVector& s : shifts) {
    const cplx c = (data.q.matrix() * s)(0);
    std::vector<double> terms;
    terms.reserve(rule.nodes.size() * rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const cplx th(rule.nodes[i], rule.nodes[j]);
        terms.push_back(rule.weights[i] * rule.weights[j] * g / std::numbers::pi *
                        std::exp(-data.b * g * std::norm(th - c)));
      }
    out.deviation = std::max(out.deviation, std::abs(pairwise_sum(terms) - out.value));
  }
  return out;
}

DeterminantCheck prop_d_gaussian_check(const RGData& data, double cond_limit) {
  data.validate();
  if (!data.d_is_symmetric()) throw std::invalid_argument("prop_d_gaussian_check: D must be symmetric");
  require_positive(data.d, "D");
  Eigen::FullPivLU<CMatrix> rank(data.q.matrix());
  if (rank.rank() < data.h_plus->dim())
    throw std::invalid_argument("prop_d_gaussian_check: Q must have full rank dim H+ (Deltacheck + bQ*Q degenerate)");
  const KernelSet k = compute_kernels(data, cond_limit);
  const Operator dcheck = delta_check(k);
  require_positive(k.delta, "Delta");
  require_positive(dcheck, "Deltacheck");
  require_positive(k.c, "C");
  DeterminantCheck out;
  const cplx l = -log_det(k.delta.matrix());
  const cplx r = static_cast<double>(data.h_plus->dim()) * std::log(data.b) - log_det(dcheck.matrix()) +
                 log_det(k.c.matrix());
  out.lhs = std::exp(l);
  out.rhs = std::exp(r);
  out.residual = std::abs(std::exp(r - l) - 1.0);
  return out;
}

QuadratureCheck prop_d_quadrature_check(const ActionSpec& spec, const QuadratureConfig& config,
                                        const FieldFunction& e, const NewtonOptions& newton) {
  require_scalar_spaces(spec.rg, "prop_d_quadrature_check");
  if (config.nodes < 2) throw std::invalid_argument("prop_d_quadrature_check: need at least 2 nodes");
  const Sides s = integrate_sides(spec, config, config.nodes, e, newton);
  QuadratureCheck out;
  out.lhs = s.lhs;
  out.rhs = s.rhs;
  out.small_field = s.small;
  out.large_field = s.large;
  out.outer_radius = s.outer;
  out.relative_difference = std::abs(s.lhs - s.rhs) / std::abs(s.lhs);
  if (config.check_nodes > 0) {
    const Sides t = integrate_sides(spec, config, config.check_nodes, e, newton);
    out.lhs_change = std::abs(s.lhs - t.lhs) / std::abs(t.lhs);
    out.rhs_change = std::abs(s.rhs - t.rhs) / std::abs(t.rhs);
    const double limit = 0.5 * config.tolerance;
    if (out.lhs_change > limit || out.rhs_change > limit)
      throw QuadratureNotConverged("quadrature not converged: " + std::to_string(config.nodes) + " vs " +
                                   std::to_string(config.check_nodes) + " nodes differ by " +
                                   std::to_string(std::max(out.lhs_change, out.rhs_change)));
  }
  return out;
}

cplx fluctuation_integral_exact(const ActionSpec& spec) {
  if (!spec.p.is_zero()) throw std::invalid_argument("fluctuation_integral_exact: needs P = 0");
  return std::exp(log_det(spec.k.c.matrix()));
}

cplx fluctuation_integral(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                          double radius, int nodes, const FieldFunction& e, DeltaAMode mode,
                          const NewtonOptions& newton, int t_nodes) {
  require_scalar_spaces(spec.rg, "fluctuation_integral");
  const RGData& r = spec.rg;
  const DiscGrid grid = disc_grid(0.0, radius, nodes);
  if (grid.points.empty()) return 0.0;
  const CriticalPoint cp = newton_critical(spec, theta_star, theta, newton);
  const BackgroundFn bg = newton_background_fn(spec, cp, newton);
  const DeltaPlusFn plus = newton_delta_plus_fn(spec, cp, newton);
  const double g_h = r.h->gram_determinant();
  std::vector<cplx> terms(grid.points.size());
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    const FieldVector ps = scalar_field(r.h, std::conj(grid.points[i]));
    const FieldVector p = scalar_field(r.h, grid.points[i]);
    const FieldVector ds = ps - cp.psi_star;
    const FieldVector d = p - cp.psi;
    const cplx da = mode == DeltaAMode::direct
                        ? delta_A_direct(spec, bg, theta_star, theta, cp.psi_star, cp.psi, ds, d)
                        : delta_A_formula(spec, plus, ds, d, t_nodes);
    const cplx de = e ? delta_E(e, cp.psi_star, cp.psi, ds, d) : cplx(0.0);
    terms[i] = grid.weights[i] * g_h * std::exp(-da + de);
  }
  return pairwise_sum(terms);
}

}  // namespace blockspin
