#include "blockspin/newton.hpp"
#include "blockspin/random.hpp"
#include "blockspin/series.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace blockspin;
using namespace test_support;

namespace {

// Plain fixed-point iteration of the scalar background equations
//   2 phi* = psi* - 2 g phi* phi,  2 phi = psi - g phi^2.
std::pair<cplx, cplx> scalar_background(double g, cplx psi_star, cplx psi) {
  cplx fs = 0.5 * psi_star, f = 0.5 * psi;
  for (int i = 0; i < 500; ++i) {
    f = 0.5 * (psi - g * f * f);
    fs = 0.5 * psi_star / (1.0 + g * f);
  }
  return {fs, f};
}

ActionSpec random_spec(CounterRng& rng, std::array<Index, 3> dims, bool grams, double scale) {
  EnsembleOptions o;
  o.dims = dims;
  o.random_grams = grams;
  o.b = 1.2;
  RGData d = random_rgdata(rng, o);
  PolynomialP p = random_polynomial(rng, d.h_minus, {3, 4}, scale);
  return ActionSpec::make(std::move(d), std::move(p));
}

double gap(const FieldVector& a, const FieldVector& b) { return (a.values() - b.values()).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("scalar background against closed-form and high-precision roots") {
  {
    const ActionSpec s = scalar_spec(1.0);
    const FieldPair r = newton_background(s, field(s.rg.h, 0.01), field(s.rg.h, 0.01));
    CHECK(std::abs(scalar(r.plain) - 0.004987562112089027021926491) < 1e-17);
    CHECK(r.iterations <= 5);
  }
  {
    const ActionSpec s = scalar_spec(0.1);
    const FieldPair r = newton_background(s, field(s.rg.h, 0.2), field(s.rg.h, 0.2));
    CHECK(std::abs(scalar(r.star) - 0.0990147542976674309153273129124) < 1e-16);
    CHECK(std::abs(scalar(r.plain) - 0.0995049383620779533633859170696) < 1e-16);
    CHECK(r.residual <= 1e-12);
  }
}

TEST_CASE("without interaction Newton stops at the linear solution") {
  CounterRng rng(51, "newton.free");
  ActionSpec s = random_spec(rng, {3, 2, 1}, true, 0.3);
  s.p = PolynomialP(s.rg.h_minus, 3);
  const FieldVector ps(s.rg.h, complex_normal(rng, 2)), p(s.rg.h, complex_normal(rng, 2));
  const FieldPair r = newton_background(s, ps, p);
  CHECK(r.iterations == 0);
  CHECK(gap(r.plain, s.k.s * (s.q_minus_adj * (s.rg.fq * p))) < 1e-14);
  const FieldVector ts(s.rg.h_plus, complex_normal(rng, 1)), t(s.rg.h_plus, complex_normal(rng, 1));
  const CriticalPoint cp = newton_critical(s, ts, t);
  CHECK(cp.iterations == 0);
  CHECK(gap(cp.psi, s.k.c * (s.q_adj * t) * s.rg.b) < 1e-14);
}

TEST_CASE("scalar Newton against high-order series") {
  const ActionSpec s = scalar_spec(0.1, 3);
  const SeriesPair bg = fps_background(s, 6);
  const SeriesPair cr = fps_critical(s, bg, 6);
  const SeriesPair ns = fps_nextscale(s, 6);
  const Space& h = s.rg.h;
  const Space& hp = s.rg.h_plus;

  const FieldPair r = newton_background(s, field(h, 0.2), field(h, 0.2));
  const auto [fs, f] = bg.evaluate(field(h, 0.2), field(h, 0.2));
  CHECK(gap(r.star, fs) < 1e-8);
  CHECK(gap(r.plain, f) < 1e-8);

  const CriticalPoint cp = newton_critical(s, field(hp, 0.3), field(hp, 0.3));
  const auto [cs, c] = cr.evaluate(field(hp, 0.3), field(hp, 0.3));
  CHECK(gap(cp.psi_star, cs) < 1e-7);
  CHECK(gap(cp.psi, c) < 1e-7);

  const auto [ns_star, ns_plain] = ns.evaluate(field(hp, 0.3), field(hp, 0.3));
  CHECK(gap(cp.phi_star, ns_star) < 1e-7);
  CHECK(gap(cp.phi, ns_plain) < 1e-7);
  const FieldPair direct = newton_nextscale(s, field(hp, 0.3), field(hp, 0.3));
  CHECK(gap(direct.plain, cp.phi) < 1e-12);
  CHECK(gap(direct.star, cp.phi_star) < 1e-12);
}

TEST_CASE("Newton against order-4 series: truncation error scales like the fifth power") {
  for (bool grams : {false, true}) {
    CounterRng rng(53, grams ? "newton.scaling.grams" : "newton.scaling");
    const ActionSpec s = random_spec(rng, {3, 2, 1}, grams, 0.1);
    const SeriesPair bg = fps_background(s, 4);
    const SeriesPair cr = fps_critical(s, bg, 4);
    const CVector dir_s = complex_normal(rng, 2).normalized(), dir = complex_normal(rng, 2).normalized();
    const CVector tdir_s = complex_normal(rng, 1).normalized(), tdir = complex_normal(rng, 1).normalized();
    auto bg_gap = [&](double scale) {
      const FieldVector ps(s.rg.h, dir_s * scale), p(s.rg.h, dir * scale);
      const FieldPair r = newton_background(s, ps, p);
      const auto [fs, f] = bg.evaluate(ps, p);
      return std::max(gap(r.star, fs), gap(r.plain, f));
    };
    auto cr_gap = [&](double scale) {
      const FieldVector ts(s.rg.h_plus, tdir_s * scale), t(s.rg.h_plus, tdir * scale);
      const CriticalPoint r = newton_critical(s, ts, t);
      const auto [cs, c] = cr.evaluate(ts, t);
      return std::max(gap(r.psi_star, cs), gap(r.psi, c));
    };
    const double b1 = bg_gap(0.1), b2 = bg_gap(0.2);
    const double c1 = cr_gap(0.1), c2 = cr_gap(0.2);
    INFO("background ", b1, " ", b2, "  critical ", c1, " ", c2);
    CHECK(b1 <= 1e-7);
    CHECK(c1 <= 1e-7);
    CHECK(b2 / b1 >= 16.0);
    CHECK(b2 / b1 <= 64.0);
    CHECK(c2 / c1 >= 16.0);
    CHECK(c2 / c1 <= 64.0);
  }
}

TEST_CASE("background shift around the critical point") {
  const double g = 0.1;
  const ActionSpec s = scalar_spec(g);
  const Space& h = s.rg.h;
  const CriticalPoint cp = newton_critical(s, field(s.rg.h_plus, 0.3), field(s.rg.h_plus, 0.3));
  const DeltaPhi d = delta_phi_at(s, cp, field(h, 0.05), field(h, 0.05));
  const auto [b0s, b0] = scalar_background(g, scalar(cp.psi_star), scalar(cp.psi));
  const auto [b1s, b1] = scalar_background(g, scalar(cp.psi_star) + 0.05, scalar(cp.psi) + 0.05);
  CHECK(std::abs(scalar(d.dphi) - (b1 - b0)) < 1e-14);
  CHECK(std::abs(scalar(d.dphi_star) - (b1s - b0s)) < 1e-14);
  CHECK(std::abs(scalar(d.plus) - (b1 - b0 - 0.025)) < 1e-14);
  CHECK(std::abs(scalar(d.plus_star) - (b1s - b0s - 0.025)) < 1e-14);
  CHECK(delta_phi_equation_residual(s, cp, d, field(h, 0.05), field(h, 0.05)) <= 1e-10);

  CounterRng rng(57, "newton.dphi");
  const ActionSpec r = random_spec(rng, {3, 2, 1}, true, 0.3);
  for (int n = 0; n < 10; ++n) {
    const FieldVector ts(r.rg.h_plus, complex_normal(rng, 1) * 0.3), t(r.rg.h_plus, complex_normal(rng, 1) * 0.3);
    const FieldVector ds(r.rg.h, complex_normal(rng, 2) * 0.1), dd(r.rg.h, complex_normal(rng, 2) * 0.1);
    const CriticalPoint c = newton_critical(r, ts, t);
    const DeltaPhi dp = delta_phi_at(r, c, ds, dd);
    CHECK(delta_phi_equation_residual(r, c, dp, ds, dd) <= 1e-10);
    const DeltaPhi dv = delta_phi_variants(r, ts, t, ds, dd);
    CHECK(gap(dv.plus, dp.plus) < 1e-13);
    CHECK(gap(dv.plus_star, dp.plus_star) < 1e-13);
  }
}

TEST_CASE("delta A: direct difference against the integral formula") {
  {
    const ActionSpec s = scalar_spec(0.1);
    const Space& h = s.rg.h;
    const FieldVector th = field(s.rg.h_plus, 0.3);
    const CriticalPoint cp = newton_critical(s, th, th);
    const BackgroundFn bg = newton_background_fn(s, cp);
    const DeltaPlusFn plus = newton_delta_plus_fn(s, cp);
    CHECK(std::abs(delta_A_direct(s, bg, th, th, cp.psi_star, cp.psi, field(h, 0.05), field(h, 0.05)) -
                   delta_A_formula(s, plus, field(h, 0.05), field(h, 0.05), 24)) < 1e-8);
    CounterRng rng(59, "newton.deltaA.scalar");
    for (int n = 0; n < 20; ++n) {
      const FieldVector ds(h, complex_normal(rng, 1) * 0.2), d(h, complex_normal(rng, 1) * 0.2);
      const cplx direct = delta_A_direct(s, bg, th, th, cp.psi_star, cp.psi, ds, d);
      const cplx formula = delta_A_formula(s, plus, ds, d, 24);
      CHECK(std::abs(direct - formula) <= 1e-8 * std::max(1.0, std::abs(direct)));
    }
  }
  CounterRng rng(61, "newton.deltaA");
  const ActionSpec s = random_spec(rng, {3, 2, 1}, true, 0.3);
  for (int n = 0; n < 10; ++n) {
    const FieldVector ts(s.rg.h_plus, complex_normal(rng, 1) * 0.3), t(s.rg.h_plus, complex_normal(rng, 1) * 0.3);
    const FieldVector ds(s.rg.h, complex_normal(rng, 2) * 0.1), d(s.rg.h, complex_normal(rng, 2) * 0.1);
    const CriticalPoint cp = newton_critical(s, ts, t);
    const BackgroundFn bg = newton_background_fn(s, cp);
    const cplx direct = delta_A_direct(s, bg, ts, t, cp.psi_star, cp.psi, ds, d);
    const cplx formula = delta_A_formula(s, newton_delta_plus_fn(s, cp), ds, d, 24);
    CHECK(std::abs(direct - formula) <= 1e-8 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("delta A vanishes to first order at the critical point") {
  CounterRng rng(67, "newton.critical.first");
  const ActionSpec s = random_spec(rng, {3, 2, 1}, false, 0.3);
  const FieldVector ts(s.rg.h_plus, complex_normal(rng, 1) * 0.4), t(s.rg.h_plus, complex_normal(rng, 1) * 0.4);
  const CriticalPoint cp = newton_critical(s, ts, t);
  const BackgroundFn bg = newton_background_fn(s, cp);
  const FieldVector zero = FieldVector::zero(s.rg.h);
  CHECK(delta_A_direct(s, bg, ts, t, cp.psi_star, cp.psi, zero, zero) == cplx(0.0));
  const double eps = 1e-4;
  for (int n = 0; n < 5; ++n) {
    const CVector vs = complex_normal(rng, 2), v = complex_normal(rng, 2);
    const cplx up = delta_A_direct(s, bg, ts, t, cp.psi_star, cp.psi, FieldVector(s.rg.h, vs * eps),
                                   FieldVector(s.rg.h, v * eps));
    const cplx down = delta_A_direct(s, bg, ts, t, cp.psi_star, cp.psi, FieldVector(s.rg.h, -vs * eps),
                                     FieldVector(s.rg.h, -v * eps));
    CHECK(std::abs((up - down) / (2 * eps)) <= 1e-7);
  }
}

TEST_CASE("Newton reports non-convergence") {
  const ActionSpec s = scalar_spec(1.0);
  NewtonOptions o;
  o.max_iter = 1;
  CHECK_THROWS_AS(newton_background(s, field(s.rg.h, 0.5), field(s.rg.h, 0.5), o), NoConvergence);
}
