#pragma once

#include "blockspin/action.hpp"

#include <vector>

namespace test_support {

using namespace blockspin;

/// One-dimensional spaces, every operator and form equal to 1, b = 1.
inline RGData scalar_model() {
  RGData d;
  d.h_minus = make_space("H-", 1);
  d.h = make_space("H", 1);
  d.h_plus = make_space("H+", 1);
  const RMatrix one = RMatrix::Ones(1, 1);
  d.q_minus = Operator::real(d.h_minus, d.h, one);
  d.q = Operator::real(d.h, d.h_plus, one);
  d.fq = Operator::real(d.h, d.h, one);
  d.d = Operator::real(d.h_minus, d.h_minus, one);
  d.b = 1.0;
  return d;
}

/// P = g phi* phi^2.
inline PolynomialP cubic(const Space& h_minus, double g, int max_degree = 3) {
  if (g == 0.0) return PolynomialP(h_minus, max_degree);
  return PolynomialP::from_entries(h_minus, max_degree, {{{0}, {0, 0}, g}});
}

inline ActionSpec scalar_spec(double g, int max_degree = 3) {
  RGData d = scalar_model();
  PolynomialP p = cubic(d.h_minus, g, max_degree);
  return ActionSpec::make(std::move(d), std::move(p));
}

inline FieldVector field(const Space& s, cplx v) { return FieldVector(s, CVector::Constant(s->dim(), v)); }

inline cplx scalar(const FieldVector& v) { return v.values()(0); }

}  // namespace test_support
