#pragma once

// Gaussian integrals over complexified spaces and the two numerical forms of
// the integral identity for one block-spin step.
//
// The volume form on C H is dmu = det(G) prod d^2 phi / pi on the slice
// phi* = conj(phi), so that  int dmu exp(-<phi*, M phi>) = 1 / det M.

#include "blockspin/action.hpp"
#include "blockspin/newton.hpp"

#include <vector>

namespace blockspin {

/// 1/det M; requires the Hermitian part of G M to be positive definite.
cplx gaussian_exact(const Operator& m);

struct InsertionConstant {
  double value = 0.0;      // b^{-dim H+}
  double deviation = 0.0;  // max |quadrature at shifted psi - value| (dim H+ = 1 only)
};

/// int dmu_+ exp(-b <theta* - Q psi*, theta - Q psi>_+); with dim H+ = 1 the
/// integral is also done by quadrature at each psi in `shifts`.
InsertionConstant insertion_constant(const RGData& data, const std::vector<CVector>& shifts = {}, int nodes = 96);

struct DeterminantCheck {
  cplx lhs;  // det Delta^{-1}
  cplx rhs;  // b^{dim H+} det Deltacheck^{-1} det C
  double residual = 0.0;
};

/// The P = 0, E = 0, full-domain case.  Requires D, Delta, Deltacheck and C
/// positive and Q of full rank dim H+.
DeterminantCheck prop_d_gaussian_check(const RGData& data, double cond_limit = kDefaultCondLimit);

struct QuadratureConfig {
  int nodes = 64;        // per polar axis (radius, angle)
  int check_nodes = 96;  // second grid for self-consistency; 0 disables
  double radius_psi = 1.0;
  double radius_theta = 1.0;
  double theta_cutoff_sigmas = 6.0;
  double tolerance = 1e-3;
};

struct QuadratureCheck {
  cplx lhs;
  cplx rhs;
  cplx small_field;  // before the b^{dim H+} factor
  cplx large_field;
  double relative_difference = 0.0;
  double lhs_change = 0.0;  // |value(nodes) - value(check_nodes)| / |value(check_nodes)|
  double rhs_change = 0.0;
  double outer_radius = 0.0;
};

class QuadratureNotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Both sides of the integral identity with dim H = dim H+ = 1 on discs
/// |psi| <= radius_psi, |theta| <= radius_theta.  The large-field theta
/// annulus ends at |Q| radius_psi + theta_cutoff_sigmas / sqrt(b G+).
/// Throws QuadratureNotConverged when the two grids disagree by more than
/// tolerance / 2.
QuadratureCheck prop_d_quadrature_check(const ActionSpec& spec, const QuadratureConfig& config,
                                        const FieldFunction& e, const NewtonOptions& newton = {});

/// det C: the fluctuation integral for P = 0, E = 0 over the full space.
cplx fluctuation_integral_exact(const ActionSpec& spec);

enum class DeltaAMode { direct, formula };

/// F(theta*, theta) on the slice psi_cr + dpsi = conj(psi*_cr + dpsi*), |psi| <= radius
/// (dim H = 1).
cplx fluctuation_integral(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                          double radius, int nodes, const FieldFunction& e, DeltaAMode mode,
                          const NewtonOptions& newton = {}, int t_nodes = 24);

}  // namespace blockspin
