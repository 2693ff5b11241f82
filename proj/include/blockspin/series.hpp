#pragma once

// Truncated formal power series solutions of the field equations.
//
// A SeriesPair holds (starred, unstarred) series sharing one input basis
// whose variables are ordered (x*, x).  All three equations have the shape
//
//   K Y = B u + R(Y)
//
// with Y the stacked unknowns, u the stacked inputs, K and B block diagonal
// and R of degree >= 2 in Y, so the degree-n coefficients follow from those of
// degree < n.
//
//   background (inputs psi):    K = diag(D* + Q-* fQ Q-, D + Q-* fQ Q-) + P''(0)
//                               B = diag(Q-* fQ),  R = -P'_{>=2}(Y)
//   critical (inputs theta):    K = diag(bQ*Q + fQ) - diag(fQ Q-) L,  B = diag(b Q*)
//                               R = diag(fQ Q-) phi_bg_{>=2}(Y),  L = linear part of phi_bg
//   next scale (inputs theta):  background with Qcheck- and Qcheck in place of Q- and fQ

#include "blockspin/action.hpp"

#include <string>
#include <utility>
#include <vector>

namespace blockspin {

struct FormalSeries {
  Space input;
  Space target;
  CPolynomial poly;  // dim(target) outputs over 2 dim(input) variables

  int max_order() const { return poly.basis()->max_degree(); }
  /// Dense symmetric tensor of bidegree (kstar, k), flattened row-major over
  /// (output, star indices, plain indices).
  CVector tensor(int kstar, int k) const;
};

struct SeriesPair {
  FormalSeries starred;
  FormalSeries unstarred;

  static SeriesPair from_stacked(Space input, Space target, const CPolynomial& stacked);
  CPolynomial stacked() const;
  int max_order() const { return starred.max_order(); }
  std::pair<FieldVector, FieldVector> evaluate(const FieldVector& x_star, const FieldVector& x) const;
};

/// Frobenius norms of the symmetric tensors of a stacked series, maximized
/// over bidegrees 1..max_order; split is the number of starred input variables.
double max_tensor_norm(const CPolynomial& p, int split);

SeriesPair fps_background(const ActionSpec& spec, int max_order, double cond_limit = kDefaultCondLimit);
SeriesPair fps_critical(const ActionSpec& spec, const SeriesPair& bg, int max_order,
                        double cond_limit = kDefaultCondLimit);
SeriesPair fps_nextscale(const ActionSpec& spec, int max_order, double cond_limit = kDefaultCondLimit);

/// phi_bg(psi*_cr, psi_cr) truncated at max_order.
SeriesPair compose_cp(const SeriesPair& bg, const SeriesPair& cr, int max_order);

/// Coefficientwise residuals of the defining equations (max tensor norm).
double background_equation_residual(const ActionSpec& spec, const SeriesPair& bg);
double critical_equation_residual(const ActionSpec& spec, const SeriesPair& bg, const SeriesPair& cr);
double nextscale_equation_residual(const ActionSpec& spec, const SeriesPair& ns);

struct SeriesCheck {
  double residual = 0.0;          // max over bidegrees of the tensor-norm difference
  std::vector<NamedResidual> by_order;  // "order n"
};

/// compose_cp(bg, cr) against fps_nextscale.
SeriesCheck verify_composition(const ActionSpec& spec, int max_order, double cond_limit = kDefaultCondLimit);
/// psi_cr against (bQ*Q + fQ)^{-1}(b Q* theta + fQ Q- phi_cp).
SeriesCheck verify_crit_representation(const ActionSpec& spec, int max_order,
                                       double cond_limit = kDefaultCondLimit);

}  // namespace blockspin
