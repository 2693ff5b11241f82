#include "blockspin/gaussian.hpp"
#include "blockspin/random.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace blockspin;
using namespace test_support;

TEST_CASE("gaussian_exact") {
  const Space h = make_space("H", 1);
  CHECK(std::abs(gaussian_exact(Operator::real(h, h, RMatrix::Constant(1, 1, 2.0))) - 0.5) < 1e-15);

  CounterRng rng(71, "gauss.exact");
  const Space g = make_space("H", spd_matrix(rng, 3) / 3.0 + RMatrix::Identity(3, 3));
  const RMatrix m = g->gram_inverse() * spd_matrix(rng, 3);
  const Operator op = Operator::real(g, g, m);
  CHECK(std::abs(gaussian_exact(op) * m.determinant() - 1.0) < 1e-13);
  // a real skew part and i times a symmetric part leave Re M alone
  const RMatrix k = normal_matrix(rng, 3, 3), l = normal_matrix(rng, 3, 3);
  const CMatrix tilt = (k - k.transpose()).cast<cplx>() + cplx(0, 1) * (l + l.transpose()).cast<cplx>();
  const Operator tilted(g, g, op.matrix() + g->gram_inverse().cast<cplx>() * tilt);
  CHECK(std::abs(gaussian_exact(tilted) * tilted.matrix().determinant() - 1.0) < 1e-13);
  CHECK_THROWS_AS(gaussian_exact(Operator::real(h, h, RMatrix::Constant(1, 1, -1.0))), std::invalid_argument);
}

TEST_CASE("insertion constant") {
  RGData d = scalar_model();
  d.b = 2.0;
  const InsertionConstant c =
      insertion_constant(d, {CVector::Constant(1, cplx(0.3, -0.2)), CVector::Constant(1, cplx(-1.5, 2.0))});
  CHECK(c.value == 0.5);
  CHECK(c.deviation < 1e-12);

  CounterRng rng(73, "gauss.insertion");
  EnsembleOptions o;
  o.dims = {4, 3, 2};
  o.b = 3.0;
  CHECK(std::abs(insertion_constant(random_rgdata(rng, o)).value - 1.0 / 9.0) < 1e-16);
}

TEST_CASE("determinant form of the integral identity") {
  const DeterminantCheck srm = prop_d_gaussian_check(scalar_model());
  CHECK(std::abs(srm.lhs - 2.0) < 1e-14);
  CHECK(std::abs(srm.rhs - 2.0) < 1e-14);

  int used = 0;
  for (int n = 0; n < 25; ++n) {
    CounterRng rng(75, "gauss.det." + std::to_string(n));
    EnsembleOptions o;
    o.dims = n % 2 ? std::array<Index, 3>{4, 3, 2} : std::array<Index, 3>{3, 2, 1};
    o.random_grams = n % 3 == 0;
    o.b = 0.5 + rng.uniform() * 2.0;
    const DeterminantCheck r = prop_d_gaussian_check(random_rgdata(rng, o));
    CHECK(r.residual <= 1e-10);
    ++used;
  }
  CHECK(used == 25);
}

TEST_CASE("determinant form preconditions") {
  RGData d = scalar_model();
  d.q = Operator::zero(d.h, d.h_plus);
  CHECK_THROWS_AS(prop_d_gaussian_check(d), std::invalid_argument);
  RGData e = scalar_model();
  e.d = Operator::real(e.h_minus, e.h_minus, RMatrix::Constant(1, 1, -0.2));
  CHECK_THROWS_AS(prop_d_gaussian_check(e), std::invalid_argument);
}

TEST_CASE("fluctuation integral without interaction") {
  const ActionSpec s = scalar_spec(0.0);
  CHECK(std::abs(fluctuation_integral_exact(s) - 2.0 / 3.0) < 1e-15);
  // 1.5 |dpsi|^2 is negligible beyond radius 7
  const cplx f = fluctuation_integral(s, field(s.rg.h_plus, 0.2), field(s.rg.h_plus, 0.2), 7.0, 48, nullptr,
                                      DeltaAMode::direct);
  CHECK(std::abs(f - 2.0 / 3.0) < 1e-6);
}

TEST_CASE("fluctuation integral: direct and formula delta A agree") {
  const ActionSpec s = scalar_spec(0.05);
  const FieldVector ts = field(s.rg.h_plus, cplx(0.2, 0.1)), t = field(s.rg.h_plus, cplx(0.2, -0.1));
  const cplx direct = fluctuation_integral(s, ts, t, 1.0, 12, nullptr, DeltaAMode::direct);
  const cplx formula = fluctuation_integral(s, ts, t, 1.0, 12, nullptr, DeltaAMode::formula);
  CHECK(std::abs(direct - formula) < 1e-8);
}

TEST_CASE("quadrature form of the integral identity") {
  QuadratureConfig c;
  c.nodes = 32;
  c.check_nodes = 48;
  {
    // P = 0, E = 0, large radii: both sides approach det Delta^-1 = 2
    const ActionSpec s = scalar_spec(0.0);
    QuadratureConfig wide = c;
    wide.radius_psi = 7.0;
    wide.radius_theta = 3.0;
    const QuadratureCheck q = prop_d_quadrature_check(s, wide, nullptr);
    CHECK(std::abs(q.lhs - 2.0) < 1e-6);
    CHECK(std::abs(q.rhs - 2.0) < 1e-6);
  }
  const ActionSpec s = scalar_spec(0.05);
  const QuadratureCheck plain = prop_d_quadrature_check(s, c, nullptr);
  CHECK(plain.relative_difference <= 1e-3);
  CHECK(plain.lhs_change <= 5e-4);
  const FieldFunction e = [](const FieldVector& a, const FieldVector& b) {
    return -0.1 * scalar(a) * scalar(b) + 0.02 * scalar(a) * scalar(a) * scalar(b);
  };
  const QuadratureCheck with_e = prop_d_quadrature_check(s, c, e);
  CHECK(with_e.relative_difference <= 1e-3);
  CHECK(std::abs(with_e.lhs - plain.lhs) > 1e-3);
}

TEST_CASE("quadrature form reports an unresolved grid") {
  const ActionSpec s = scalar_spec(0.0);
  QuadratureConfig c;
  c.nodes = 3;
  c.check_nodes = 4;
  c.radius_psi = 7.0;
  c.radius_theta = 3.0;
  c.tolerance = 1e-6;
  CHECK_THROWS_AS(prop_d_quadrature_check(s, c, nullptr), QuadratureNotConverged);
}
