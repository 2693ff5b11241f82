#pragma once

// Pointwise solutions of the background, critical and next-scale field
// equations by Newton's method with the exact Jacobian and step halving.

#include "blockspin/action.hpp"

#include <stdexcept>
#include <string>

namespace blockspin {

class NoConvergence : public std::runtime_error {
 public:
  NoConvergence(const std::string& what, double last_residual)
      : std::runtime_error(what + " did not converge (last residual " + std::to_string(last_residual) + ")"),
        last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

// Solutions are continued from a known solution (the zero field unless given)
// so they stay on the branch through it.  max_iter bounds the Newton
// iterations over the whole path, max_halvings the continuation step halvings.
struct NewtonOptions {
  double tol = 1e-12;  // max-norm of the residual, relative to max(1, |rhs|)
  int max_iter = 50;
  int max_halvings = 20;
  double cond_limit = kDefaultCondLimit;
};

struct FieldPair {
  FieldVector star;
  FieldVector plain;
  int iterations = 0;
  double residual = 0.0;
};

struct CriticalPoint {
  FieldVector psi_star, psi;  // critical fields
  FieldVector phi_star, phi;  // background fields at them
  int iterations = 0;
  double residual = 0.0;
};

/// A solved background point.
struct BackgroundPoint {
  FieldVector psi_star, psi;
  FieldVector phi_star, phi;
};

/// Continued from `from`, or from zero.
FieldPair newton_background(const ActionSpec& spec, const FieldVector& psi_star, const FieldVector& psi,
                            const NewtonOptions& opt = {}, const BackgroundPoint* from = nullptr);
/// The background is re-solved at every iterate.
CriticalPoint newton_critical(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                              const NewtonOptions& opt = {});
FieldPair newton_nextscale(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                           const NewtonOptions& opt = {});

struct DeltaPhi {
  FieldVector dphi_star, dphi;  // phi_bg(psi_cr + dpsi) - phi_bg(psi_cr)
  FieldVector plus_star, plus;  // minus S^(*) Q-* fQ dpsi_(*)
};

/// Around a solved critical point.
DeltaPhi delta_phi_at(const ActionSpec& spec, const CriticalPoint& cp, const FieldVector& dpsi_star,
                      const FieldVector& dpsi, const NewtonOptions& opt = {});
DeltaPhi delta_phi_variants(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                            const FieldVector& dpsi_star, const FieldVector& dpsi, const NewtonOptions& opt = {});

/// dphi_(*) - [S^(*) Q-* fQ dpsi_(*) - S^(*)(P'_(*)(phi + dphi) - P'_(*)(phi))], relative max-norm.
double delta_phi_equation_residual(const ActionSpec& spec, const CriticalPoint& cp, const DeltaPhi& d,
                                   const FieldVector& dpsi_star, const FieldVector& dpsi);

BackgroundFn newton_background_fn(const ActionSpec& spec, const NewtonOptions& opt = {});
/// Backgrounds on the branch through a critical point, continued along the
/// segment from it; the setting of the delta A formula.
BackgroundFn newton_background_fn(const ActionSpec& spec, const CriticalPoint& cp, const NewtonOptions& opt = {});
DeltaPlusFn newton_delta_plus_fn(const ActionSpec& spec, const CriticalPoint& cp, const NewtonOptions& opt = {});

}  // namespace blockspin
