#include "blockspin/polynomial.hpp"
#include "blockspin/random.hpp"

#include <doctest.h>

#include <complex>

using namespace blockspin;

using CPoly = Polynomial<cplx>;

TEST_CASE("basis enumeration") {
  MonomialBasis b(2, 3);
  CHECK(b.size() == 10);
  CHECK(b.degree_begin(2) == 3);
  CHECK(b.exponent(1) == Exponent{1, 0});
  CHECK(b.exponent(3) == Exponent{2, 0});
  CHECK(b.find({1, 2}) == 8);
  CHECK(b.find({2, 2}) == -1);
  CHECK(b.product(1, 2) == b.find({1, 1}));
  CHECK(b.product(3, 4) == -1);
  CHECK(b.multiplicity(b.find({1, 2})) == 3.0);
  CHECK(b.bidegree(b.find({1, 2}), 1) == std::pair<int, int>{1, 2});
}

TEST_CASE("evaluate, derivative and degrees") {
  auto basis = MonomialBasis::make(2, 4);
  CPoly p(basis, 1);
  p.coeffs()(0, basis->find({1, 2})) = 2.0;  // 2 x y^2
  p.coeffs()(0, basis->find({0, 1})) = 1.0;  // y
  CVector x(2);
  x << cplx(0.5, 1), cplx(-1, 0.25);
  const cplx expected = 2.0 * x(0) * x(1) * x(1) + x(1);
  CHECK(std::abs(p.evaluate(x)(0) - expected) <= 1e-15);
  CHECK(p.degree() == 3);
  CHECK(p.low_degree() == 1);
  const CPoly dy = p.derivative(1);
  CHECK(std::abs(dy.evaluate(x)(0) - (4.0 * x(0) * x(1) + 1.0)) <= 1e-15);
  CHECK(p.linear_part()(0, 1) == cplx(1.0));
  CHECK(p.degree_part(3).degree() == 3);
  CHECK(p.degree_part(3).low_degree() == 3);
}

TEST_CASE("composition matches pointwise evaluation of polynomial maps") {
  CounterRng rng(17, "compose");
  auto ob = MonomialBasis::make(3, 3);
  auto ib = MonomialBasis::make(2, 6);
  CPoly outer(ob, 2), inner(ib, 3);
  for (Index i = 0; i < ob->size(); ++i)
    for (Index r = 0; r < 2; ++r) outer.coeffs()(r, i) = cplx(rng.normal(), rng.normal());
  // inner has degree <= 2 and no constant term, so the product has degree <= 6
  for (Index i = 1; i < ib->degree_end(2); ++i)
    for (Index r = 0; r < 3; ++r) inner.coeffs()(r, i) = cplx(rng.normal(), rng.normal());
  const CPoly c = compose(outer, inner);
  for (int k = 0; k < 5; ++k) {
    const CVector y = complex_normal(rng, 2) * 0.3;
    const CVector direct = outer.evaluate(inner.evaluate(y));
    CHECK((c.evaluate(y) - direct).norm() <= 1e-12 * (1 + direct.norm()));
  }
}

TEST_CASE("composition truncates at the inner basis degree") {
  auto b1 = MonomialBasis::make(1, 3);
  CPoly sq(b1, 1);
  sq.coeffs()(0, 2) = 1.0;  // x^2
  CPoly lin(b1, 1);
  lin.coeffs()(0, 1) = 1.0;
  lin.coeffs()(0, 2) = 1.0;  // y + y^2
  const CPoly c = compose(sq, lin);
  // (y + y^2)^2 = y^2 + 2y^3 + y^4 -> y^2 + 2 y^3
  CHECK(c.coeffs()(0, 2) == cplx(1.0));
  CHECK(c.coeffs()(0, 3) == cplx(2.0));
  CHECK(c.degree() == 3);
}

TEST_CASE("variables and output maps") {
  auto basis = MonomialBasis::make(2, 2);
  const CPoly id = CPoly::variables(basis);
  CVector x(2);
  x << 3.0, cplx(0, 2);
  CHECK((id.evaluate(x) - x).norm() == 0.0);
  CMatrix m(1, 2);
  m << 1.0, 2.0;
  CHECK(std::abs((m * id).evaluate(x)(0) - (x(0) + 2.0 * x(1))) <= 1e-15);
  CHECK_THROWS(basis->monomial_values(CVector::Zero(3)));
}
