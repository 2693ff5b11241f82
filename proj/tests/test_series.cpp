#include "blockspin/series.hpp"
#include "blockspin/random.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace blockspin;
using namespace test_support;

namespace {

cplx coeff(const FormalSeries& s, int a, int c) {
  const Index i = s.poly.basis()->find(Exponent{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(c)});
  REQUIRE(i >= 0);
  return s.poly.coeffs()(0, i);
}

using Table = std::map<std::pair<int, int>, double>;

// Frozen from tests/oracles/srm_series.py (sympy fixed-point iteration).
Table background_star(double g) {
  return {{{1, 0}, 0.5}, {{1, 1}, -g / 4}, {{1, 2}, 3 * g * g / 16}, {{1, 3}, -5 * std::pow(g, 3) / 32},
          {{1, 4}, 35 * std::pow(g, 4) / 256}};
}
Table background(double g) {
  return {{{0, 1}, 0.5}, {{0, 2}, -g / 8}, {{0, 3}, g * g / 16}, {{0, 4}, -5 * std::pow(g, 3) / 128},
          {{0, 5}, 7 * std::pow(g, 4) / 256}};
}
Table critical_star(double g) {
  return {{{1, 0}, 2.0 / 3}, {{1, 1}, -2 * g / 27}, {{1, 2}, 4 * g * g / 81},
          {{1, 3}, -80 * std::pow(g, 3) / 2187}, {{1, 4}, 560 * std::pow(g, 4) / 19683}};
}
Table critical(double g) {
  return {{{0, 1}, 2.0 / 3}, {{0, 2}, -g / 27}, {{0, 3}, 4 * g * g / 243},
          {{0, 4}, -20 * std::pow(g, 3) / 2187}, {{0, 5}, 112 * std::pow(g, 4) / 19683}};
}
Table nextscale_star(double g) {
  return {{{1, 0}, 1.0 / 3}, {{1, 1}, -4 * g / 27}, {{1, 2}, 8 * g * g / 81},
          {{1, 3}, -160 * std::pow(g, 3) / 2187}, {{1, 4}, 1120 * std::pow(g, 4) / 19683}};
}
Table nextscale(double g) {
  return {{{0, 1}, 1.0 / 3}, {{0, 2}, -2 * g / 27}, {{0, 3}, 8 * g * g / 243},
          {{0, 4}, -40 * std::pow(g, 3) / 2187}, {{0, 5}, 224 * std::pow(g, 4) / 19683}};
}

// Every monomial of degree 1..order: the table value, or zero.
double table_mismatch(const FormalSeries& s, const Table& t, int order) {
  double worst = 0.0;
  for (int deg = 1; deg <= order; ++deg)
    for (int a = 0; a <= deg; ++a) {
      const auto it = t.find({a, deg - a});
      const double want = it == t.end() ? 0.0 : it->second;
      worst = std::max(worst, std::abs(coeff(s, a, deg - a) - want));
    }
  return worst;
}

ActionSpec random_spec(CounterRng& rng, std::array<Index, 3> dims, bool grams, std::vector<int> degrees,
                       double scale) {
  EnsembleOptions o;
  o.dims = dims;
  o.random_grams = grams;
  o.b = 1.3;
  RGData d = random_rgdata(rng, o);
  PolynomialP p = random_polynomial(rng, d.h_minus, degrees, scale);
  return ActionSpec::make(std::move(d), std::move(p));
}

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("scalar model series through order 5") {
  for (double g : {0.1, 1.0, -0.7}) {
    const ActionSpec s = scalar_spec(g);
    const SeriesPair bg = fps_background(s, 5);
    const SeriesPair cr = fps_critical(s, bg, 5);
    const SeriesPair ns = fps_nextscale(s, 5);
    CHECK(table_mismatch(bg.starred, background_star(g), 5) < 1e-12);
    CHECK(table_mismatch(bg.unstarred, background(g), 5) < 1e-12);
    CHECK(table_mismatch(cr.starred, critical_star(g), 5) < 1e-12);
    CHECK(table_mismatch(cr.unstarred, critical(g), 5) < 1e-12);
    CHECK(table_mismatch(ns.starred, nextscale_star(g), 5) < 1e-12);
    CHECK(table_mismatch(ns.unstarred, nextscale(g), 5) < 1e-12);
    const SeriesPair cp = compose_cp(bg, cr, 5);
    CHECK(table_mismatch(cp.starred, nextscale_star(g), 5) < 1e-12);
    CHECK(table_mismatch(cp.unstarred, nextscale(g), 5) < 1e-12);
  }
}

TEST_CASE("scalar model order-2 hand values") {
  const double g = 0.3;
  const ActionSpec s = scalar_spec(g);
  const SeriesPair bg = fps_background(s, 2);
  const SeriesPair cr = fps_critical(s, bg, 2);
  const SeriesPair ns = fps_nextscale(s, 2);
  CHECK(std::abs(coeff(bg.unstarred, 0, 2) + g / 8) < 1e-15);
  CHECK(std::abs(coeff(bg.starred, 1, 1) + g / 4) < 1e-15);
  CHECK(std::abs(coeff(cr.unstarred, 0, 1) - 2.0 / 3) < 1e-15);
  CHECK(std::abs(coeff(cr.unstarred, 0, 2) + g / 27) < 1e-12);
  CHECK(std::abs(coeff(cr.starred, 1, 1) + 2 * g / 27) < 1e-12);
  CHECK(std::abs(coeff(ns.unstarred, 0, 1) - 1.0 / 3) < 1e-15);
  CHECK(std::abs(coeff(ns.unstarred, 0, 2) + 2 * g / 27) < 1e-12);
}

TEST_CASE("without interaction the series are linear") {
  CounterRng rng(21, "series.free");
  for (bool grams : {false, true}) {
    ActionSpec s = random_spec(rng, {3, 2, 1}, grams, {3}, 0.0);
    s.p = PolynomialP(s.rg.h_minus, 3);
    const SeriesPair bg = fps_background(s, 3);
    const SeriesPair cr = fps_critical(s, bg, 3);
    const SeriesPair ns = fps_nextscale(s, 3);
    const Index n = s.rg.h->dim(), np = s.rg.h_plus->dim();
    const CMatrix want_bg = (s.k.s * s.q_minus_adj * s.rg.fq).matrix();
    const CMatrix want_cr = (s.k.c * s.q_adj).matrix() * s.rg.b;
    const CMatrix want_ns = (s.k.scheck * s.qcheck_minus_adj * s.k.qcheck).matrix();
    CHECK(max_abs(bg.unstarred.poly.linear_part().rightCols(n) - want_bg) < 1e-12);
    CHECK(max_abs(bg.unstarred.poly.linear_part().leftCols(n)) == 0.0);
    CHECK(max_abs(bg.starred.poly.linear_part().leftCols(n) - (s.k.s_adj * s.q_minus_adj * s.rg.fq).matrix()) <
          1e-12);
    CHECK(max_abs(cr.unstarred.poly.linear_part().rightCols(np) - want_cr) < 1e-12);
    CHECK(max_abs(cr.starred.poly.linear_part().leftCols(np) - (s.k.c_adj * s.q_adj).matrix() * s.rg.b) < 1e-12);
    CHECK(max_abs(ns.unstarred.poly.linear_part().rightCols(np) - want_ns) < 1e-12);
    for (const SeriesPair* sp : {&bg, &cr, &ns}) CHECK(max_abs(sp->stacked().degree_range(2, 3).coeffs()) == 0.0);
  }
}

TEST_CASE("linear part of the critical series: two forms of b C Q*") {
  CounterRng rng(23, "series.linear");
  const ActionSpec s = random_spec(rng, {4, 3, 2}, true, {3, 4}, 0.3);
  const SeriesPair bg = fps_background(s, 1);
  const SeriesPair cr = fps_critical(s, bg, 1);
  const RGData& r = s.rg;
  const Index np = r.h_plus->dim();
  const Operator tail = s.qcheck_minus_adj * s.k.qcheck;
  const CMatrix want = (s.k.coupling_inv * (s.q_adj * r.b + r.fq * r.q_minus * s.k.scheck * tail)).matrix();
  const CMatrix want_star = (s.k.coupling_inv * (s.q_adj * r.b + r.fq * r.q_minus * s.k.scheck_adj * tail)).matrix();
  CHECK(max_abs(cr.unstarred.poly.linear_part().rightCols(np) - want) < 1e-12);
  CHECK(max_abs(cr.starred.poly.linear_part().leftCols(np) - want_star) < 1e-12);
}

TEST_CASE("composition rule and critical representation on random P") {
  int case_no = 0;
  for (std::array<Index, 3> dims : {std::array<Index, 3>{3, 2, 1}, std::array<Index, 3>{4, 3, 2}})
    for (bool grams : {false, true})
      for (std::vector<int> degrees : {std::vector<int>{3}, std::vector<int>{3, 4}, std::vector<int>{2, 3, 4}}) {
        CounterRng rng(31 + case_no++, "series.random");
        const ActionSpec s = random_spec(rng, dims, grams, degrees, 0.3);
        const SeriesCheck comp = verify_composition(s, 4);
        const SeriesCheck rep = verify_crit_representation(s, 4);
        CHECK(comp.residual <= 1e-10);
        CHECK(rep.residual <= 1e-10);
        CHECK(comp.by_order.size() == 4);
      }
}

TEST_CASE("series solve their defining equations") {
  CounterRng rng(41, "series.residual");
  for (std::array<Index, 3> dims : {std::array<Index, 3>{3, 2, 1}, std::array<Index, 3>{4, 3, 2}}) {
    const ActionSpec s = random_spec(rng, dims, true, {2, 3, 4}, 0.3);
    const SeriesPair bg = fps_background(s, 4);
    const SeriesPair cr = fps_critical(s, bg, 4);
    const SeriesPair ns = fps_nextscale(s, 4);
    CHECK(background_equation_residual(s, bg) <= 1e-12);
    CHECK(critical_equation_residual(s, bg, cr) <= 1e-12);
    CHECK(nextscale_equation_residual(s, ns) <= 1e-12);
  }
}

TEST_CASE("series are deterministic") {
  CounterRng rng(43, "series.det");
  const ActionSpec s = random_spec(rng, {3, 2, 1}, false, {3, 4}, 0.3);
  const CMatrix a = fps_background(s, 4).stacked().coeffs();
  const CMatrix b = fps_background(s, 4).stacked().coeffs();
  CHECK((a.array() == b.array()).all());

  // the same P from entries listed in two orders
  std::vector<TensorEntry> entries = {{{0}, {1, 1}, 0.2}, {{1}, {0, 1}, cplx(0.1, 0.3)}, {{0, 1}, {1}, -0.4},
                                      {{}, {0, 1, 1}, 0.05}, {{1}, {1, 0}, cplx(0.1, 0.3)}};
  EnsembleOptions o;
  o.dims = {2, 2, 1};
  CounterRng r2(44, "series.det.data");
  const RGData d = random_rgdata(r2, o);
  const PolynomialP p1 = PolynomialP::from_entries(d.h_minus, 3, entries);
  std::reverse(entries.begin(), entries.end());
  const PolynomialP p2 = PolynomialP::from_entries(d.h_minus, 3, entries);
  const ActionSpec s1 = ActionSpec::make(d, p1), s2 = ActionSpec::make(d, p2);
  const CMatrix c1 = fps_critical(s1, fps_background(s1, 4), 4).stacked().coeffs();
  const CMatrix c2 = fps_critical(s2, fps_background(s2, 4), 4).stacked().coeffs();
  CHECK((c1.array() == c2.array()).all());
}

TEST_CASE("tensors carry the symmetric entries") {
  const ActionSpec s = scalar_spec(0.4);
  const SeriesPair bg = fps_background(s, 3);
  // phi* coefficient of psi* psi is -g/4, split over one star and one plain slot
  CHECK(std::abs(bg.starred.tensor(1, 1)(0) + 0.1) < 1e-15);
  CHECK(std::abs(bg.unstarred.tensor(0, 2)(0) + 0.05) < 1e-15);
  CounterRng rng(47, "series.tensor");
  EnsembleOptions o;
  o.dims = {2, 2, 1};
  const ActionSpec r = ActionSpec::make(random_rgdata(rng, o), random_polynomial(rng, make_space("H-", 2), {3}, 0.5));
  const SeriesPair rb = fps_background(r, 3);
  const CVector t = rb.unstarred.tensor(0, 2);  // 2 outputs x 2 x 2
  REQUIRE(t.size() == 8);
  for (int o2 = 0; o2 < 2; ++o2) CHECK(std::abs(t(o2 * 4 + 1) - t(o2 * 4 + 2)) < 1e-15);
}

TEST_CASE("compose_cp rejects mismatched orders") {
  const ActionSpec s = scalar_spec(0.2);
  const SeriesPair bg = fps_background(s, 3);
  const SeriesPair cr = fps_critical(s, bg, 3);
  CHECK_NOTHROW(compose_cp(bg, cr, 3));
  CHECK_THROWS(compose_cp(bg, cr, 4));
  CHECK_THROWS(compose_cp(fps_background(s, 2), cr, 3));
}
