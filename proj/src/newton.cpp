#include "blockspin/newton.hpp"

#include <algorithm>
#include <functional>

namespace blockspin {

namespace {

CMatrix block_diag(const CMatrix& a, const CMatrix& b) {
  CMatrix m = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

CVector stack(const CVector& a, const CVector& b) {
  CVector x(a.size() + b.size());
  x << a, b;
  return x;
}

double max_norm(const CVector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct NewtonOutcome {
  CVector x;
  int iterations = 0;
  double residual = 0.0;
};

using Residual = std::function<CVector(const CVector&)>;
using Jacobian = std::function<CMatrix(const CVector&)>;

enum class Corrector { converged, not_contracting, exhausted };

// Undamped Newton that gives up as soon as the residual fails to decrease or
// an increment fails to halve the previous one: the iterate has then left the
// basin of the root being followed.
Corrector correct(const Residual& f, const Jacobian& jac, CVector& x, double& res, int& budget, double denom,
                  const NewtonOptions& opt, const std::string& jac_assumption) {
  CVector r;
  try {
    r = f(x);
  } catch (const NoConvergence&) {
    return Corrector::not_contracting;
  }
  res = max_norm(r) / denom;
  double last_step = -1.0;
  while (res > opt.tol) {
    if (budget == 0) return Corrector::exhausted;
    --budget;
    const CMatrix j = jac(x);
    const double cond = condition_number(j);
    if (!(cond <= opt.cond_limit)) throw NearSingular(jac_assumption, cond, opt.cond_limit);
    const CVector step = j.partialPivLu().solve(r);
    const double size = max_norm(step);
    if (last_step >= 0.0 && size > 0.5 * last_step && size > 1e-10 * std::max(1.0, max_norm(x)))
      return Corrector::not_contracting;
    last_step = size;
    const CVector trial = x - step;
    CVector tr;
    try {
      tr = f(trial);
    } catch (const NoConvergence&) {
      return Corrector::not_contracting;
    }
    const double tres = max_norm(tr) / denom;
    if (!(tres < res) && tres > opt.tol) return Corrector::not_contracting;
    x = trial;
    r = tr;
    res = tres;
  }
  return Corrector::converged;
}

// Follow the root of F(x, s) = 0 from a known root x0 at s = 0 to s = 1, so
// the result lies on the branch through x0.  Each step takes a tangent
// predictor and the Newton corrector above; a rejected step is halved (at
// most max_halvings times in total).  The first attempt is the whole path.
struct Homotopy {
  std::function<CVector(const CVector&, double)> f;
  std::function<CMatrix(const CVector&, double)> jac;
  CVector df_ds;  // dF/ds, constant along the path
  std::function<void(const CVector&, double)> on_accept;
};

NewtonOutcome follow(const Homotopy& h, CVector x, double scale, const NewtonOptions& opt, const std::string& what,
                     const std::string& jac_assumption) {
  const double denom = std::max(1.0, scale);
  double s = 0.0, ds = 1.0, res = 0.0;
  int budget = opt.max_iter;
  int halvings = 0;
  while (s < 1.0) {
    const double next = std::min(1.0, s + ds);
    const CMatrix j0 = h.jac(x, s);
    CVector trial = x - j0.partialPivLu().solve(CVector(h.df_ds * (next - s)));
    const Residual f = [&](const CVector& y) { return h.f(y, next); };
    const Jacobian jac = [&](const CVector& y) { return h.jac(y, next); };
    const Corrector c = correct(f, jac, trial, res, budget, denom, opt, jac_assumption);
    if (c == Corrector::exhausted) throw NoConvergence(what, res);
    if (c == Corrector::not_contracting) {
      if (++halvings > opt.max_halvings) throw NoConvergence(what + " (step halving exhausted)", res);
      ds *= 0.5;
      continue;
    }
    x = std::move(trial);
    s = next;
    if (h.on_accept) h.on_accept(x, s);
    ds = std::min(1.0, 2.0 * ds);
  }
  return {std::move(x), opt.max_iter - budget, res};
}

struct BackgroundSystem {
  CMatrix k;  // diag(D* + X*, D + X)
  CMatrix v;  // diag(V*, V)
  const PolynomialP* p;
};

// Continue the background from a solved point (u_from, x_from) to u.
NewtonOutcome solve_background_system(const BackgroundSystem& sys, const CVector& u_from, const CVector& x_from,
                                      const CVector& u, const NewtonOptions& opt, const std::string& what) {
  const Index n = sys.k.rows() / 2;
  const CVector src_from = sys.v * u_from;
  const CVector src_step = sys.v * (u - u_from);
  Homotopy h;
  h.f = [&](const CVector& x, double s) -> CVector {
    return sys.k * x + sys.p->gradient(x.head(n), x.tail(n)) - src_from - s * src_step;
  };
  h.jac = [&](const CVector& x, double) -> CMatrix { return sys.k + sys.p->jacobian(x.head(n), x.tail(n)); };
  h.df_ds = -src_step;
  return follow(h, x_from, max_norm(CVector(sys.v * u)), opt, what, "background Jacobian invertible");
}

BackgroundSystem background_system(const ActionSpec& spec) {
  const Operator x = spec.q_minus_adj * spec.rg.fq * spec.rg.q_minus;
  const Operator v = spec.q_minus_adj * spec.rg.fq;
  return {block_diag((spec.d_adj + x).matrix(), (spec.rg.d + x).matrix()), block_diag(v.matrix(), v.matrix()),
          &spec.p};
}

double inner_tol(const NewtonOptions& opt) { return std::max(0.1 * opt.tol, 1e-14); }

}  // namespace

FieldPair newton_background(const ActionSpec& spec, const FieldVector& psi_star, const FieldVector& psi,
                            const NewtonOptions& opt, const BackgroundPoint* from) {
  require_same_space(psi_star.space(), spec.rg.h, "newton_background: psi*");
  require_same_space(psi.space(), spec.rg.h, "newton_background: psi");
  const BackgroundSystem sys = background_system(spec);
  const CVector u = stack(psi_star.values(), psi.values());
  const Index n = spec.rg.h_minus->dim();
  CVector u0 = CVector::Zero(u.size()), x0 = CVector::Zero(2 * n);
  if (from != nullptr) {
    u0 = stack(from->psi_star.values(), from->psi.values());
    x0 = stack(from->phi_star.values(), from->phi.values());
  }
  const NewtonOutcome o = solve_background_system(sys, u0, x0, u, opt, "newton_background");
  return {FieldVector(spec.rg.h_minus, o.x.head(n)), FieldVector(spec.rg.h_minus, o.x.tail(n)), o.iterations,
          o.residual};
}

FieldPair newton_nextscale(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                           const NewtonOptions& opt) {
  require_same_space(theta_star.space(), spec.rg.h_plus, "newton_nextscale: theta*");
  require_same_space(theta.space(), spec.rg.h_plus, "newton_nextscale: theta");
  const Operator& qcm = spec.k.qcheck_minus;
  const Operator v_star = spec.qcheck_minus_adj * spec.qcheck_adj;
  const Operator v = spec.qcheck_minus_adj * spec.k.qcheck;
  const BackgroundSystem sys{block_diag((spec.d_adj + v_star * qcm).matrix(), (spec.rg.d + v * qcm).matrix()),
                             block_diag(v_star.matrix(), v.matrix()), &spec.p};
  const CVector u = stack(theta_star.values(), theta.values());
  const Index n = spec.rg.h_minus->dim();
  const NewtonOutcome o =
      solve_background_system(sys, CVector::Zero(u.size()), CVector::Zero(2 * n), u, opt, "newton_nextscale");
  return {FieldVector(spec.rg.h_minus, o.x.head(n)), FieldVector(spec.rg.h_minus, o.x.tail(n)), o.iterations,
          o.residual};
}

CriticalPoint newton_critical(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                              const NewtonOptions& opt) {
  require_same_space(theta_star.space(), spec.rg.h_plus, "newton_critical: theta*");
  require_same_space(theta.space(), spec.rg.h_plus, "newton_critical: theta");
  const RGData& r = spec.rg;
  const Index m = r.h->dim();
  const Index n = r.h_minus->dim();
  const BackgroundSystem sys = background_system(spec);
  NewtonOptions inner = opt;
  inner.tol = inner_tol(opt);

  const CMatrix coupling = block_diag(spec.k.coupling.matrix(), spec.k.coupling.matrix());
  const CMatrix lift = block_diag((r.fq * r.q_minus).matrix(), (r.fq * r.q_minus).matrix());
  const CVector rhs = stack((spec.q_adj * theta_star * r.b).values(), (spec.q_adj * theta * r.b).values());

  // The background is continued from the last accepted critical iterate.
  CVector anchor_u = CVector::Zero(2 * m), anchor_phi = CVector::Zero(2 * n);
  CVector last_u, last_phi;
  auto background_at = [&](const CVector& u) -> const CVector& {
    if (last_u.size() == u.size() && last_u == u) return last_phi;
    last_phi = solve_background_system(sys, anchor_u, anchor_phi, u, inner, "newton_critical: background").x;
    last_u = u;
    return last_phi;
  };
  Homotopy h;
  h.f = [&](const CVector& u, double s) -> CVector { return coupling * u - s * rhs - lift * background_at(u); };
  h.jac = [&](const CVector& u, double) -> CMatrix {
    const CVector& phi = background_at(u);
    const CMatrix jb = sys.k + spec.p.jacobian(phi.head(n), phi.tail(n));
    return coupling - lift * jb.partialPivLu().solve(sys.v);
  };
  h.df_ds = -rhs;
  h.on_accept = [&](const CVector& u, double) {
    anchor_phi = background_at(u);
    anchor_u = u;
  };
  const NewtonOutcome o = follow(h, CVector::Zero(2 * m), max_norm(rhs), opt, "newton_critical",
                                 "bQ*Q+fQ-fQ Q- dphi_bg/dpsi invertible");
  const CVector& phi = background_at(o.x);
  return {FieldVector(r.h, o.x.head(m)),
          FieldVector(r.h, o.x.tail(m)),
          FieldVector(r.h_minus, phi.head(n)),
          FieldVector(r.h_minus, phi.tail(n)),
          o.iterations,
          o.residual};
}

DeltaPhi delta_phi_at(const ActionSpec& spec, const CriticalPoint& cp, const FieldVector& dpsi_star,
                      const FieldVector& dpsi, const NewtonOptions& opt) {
  const Operator v = spec.q_minus_adj * spec.rg.fq;
  const FieldVector lin_star = spec.k.s_adj * (v * dpsi_star);
  const FieldVector lin = spec.k.s * (v * dpsi);
  NewtonOptions inner = opt;
  inner.tol = inner_tol(opt);
  const BackgroundPoint base{cp.psi_star, cp.psi, cp.phi_star, cp.phi};
  const FieldPair shifted = newton_background(spec, cp.psi_star + dpsi_star, cp.psi + dpsi, inner, &base);
  DeltaPhi d;
  d.dphi_star = shifted.star - cp.phi_star;
  d.dphi = shifted.plain - cp.phi;
  d.plus_star = d.dphi_star - lin_star;
  d.plus = d.dphi - lin;
  return d;
}

DeltaPhi delta_phi_variants(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                            const FieldVector& dpsi_star, const FieldVector& dpsi, const NewtonOptions& opt) {
  return delta_phi_at(spec, newton_critical(spec, theta_star, theta, opt), dpsi_star, dpsi, opt);
}

double delta_phi_equation_residual(const ActionSpec& spec, const CriticalPoint& cp, const DeltaPhi& d,
                                   const FieldVector& dpsi_star, const FieldVector& dpsi) {
  const Operator v = spec.q_minus_adj * spec.rg.fq;
  const PValue base = eval_P_and_grads(spec.p, cp.phi_star, cp.phi);
  const PValue moved = eval_P_and_grads(spec.p, cp.phi_star + d.dphi_star, cp.phi + d.dphi);
  const FieldVector rhs_star = spec.k.s_adj * (v * dpsi_star - (moved.grad_phi - base.grad_phi));
  const FieldVector rhs = spec.k.s * (v * dpsi - (moved.grad_phi_star - base.grad_phi_star));
  const double scale = std::max({1.0, max_norm(d.dphi_star.values()), max_norm(d.dphi.values())});
  return std::max(max_norm((d.dphi_star - rhs_star).values()), max_norm((d.dphi - rhs).values())) / scale;
}

BackgroundFn newton_background_fn(const ActionSpec& spec, const NewtonOptions& opt) {
  return [&spec, opt](const FieldVector& psi_star, const FieldVector& psi) {
    const FieldPair f = newton_background(spec, psi_star, psi, opt);
    return std::make_pair(f.star, f.plain);
  };
}

BackgroundFn newton_background_fn(const ActionSpec& spec, const CriticalPoint& cp, const NewtonOptions& opt) {
  const BackgroundPoint base{cp.psi_star, cp.psi, cp.phi_star, cp.phi};
  return [&spec, base, opt](const FieldVector& psi_star, const FieldVector& psi) {
    const FieldPair f = newton_background(spec, psi_star, psi, opt, &base);
    return std::make_pair(f.star, f.plain);
  };
}

DeltaPlusFn newton_delta_plus_fn(const ActionSpec& spec, const CriticalPoint& cp, const NewtonOptions& opt) {
  return [&spec, cp, opt](const FieldVector& dpsi_star, const FieldVector& dpsi) {
    const DeltaPhi d = delta_phi_at(spec, cp, dpsi_star, dpsi, opt);
    return std::make_pair(d.plus_star, d.plus);
  };
}

}  // namespace blockspin
