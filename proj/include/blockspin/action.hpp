#pragma once

// Actions of one block-spin step.
//
//   fA(phi*, phi)              = <phi*, D phi>_- + P(phi*, phi)
//   A(psi*, psi; phi*, phi)    = <psi* - Q- phi*, fQ (psi - Q- phi)> + fA
//   Aeff(theta*, theta; ...)   = b <theta* - Q psi*, theta - Q psi>_+ + A
//   Acheck(theta*, theta; ...) = <theta* - Qcheck- phi*, Qcheck (theta - Qcheck- phi)>_+ + fA
//
// Gradients are with respect to the bilinear pairings, so grad = G^{-1} d.
// Note the slot swap: P'_* = grad_phi P sits in the starred equation and
// P' = grad_{phi*} P in the unstarred one.

#include "blockspin/kernels.hpp"
#include "blockspin/polynomial.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace blockspin {

using CPolynomial = Polynomial<cplx>;

/// One tensor entry T(e_{star[0]}, ..., e_{plain[0]}, ...).
struct TensorEntry {
  std::vector<int> star;
  std::vector<int> plain;
  cplx value;
};

/// Polynomial P on C H- x C H-, variables ordered (phi*, phi).  Each nonzero
/// monomial has degree >= 2.
class PolynomialP {
 public:
  PolynomialP() = default;
  /// The zero polynomial able to hold degrees up to max_degree.
  PolynomialP(Space h_minus, int max_degree);

  /// Tensor entries are summed into monomials (which symmetrizes them).
  /// Contributions to one monomial are sorted before summing, so the entry
  /// order never changes the result.
  static PolynomialP from_entries(Space h_minus, int max_degree, const std::vector<TensorEntry>& entries);
  /// Wrap a scalar polynomial over the 2 dim(H-) variables.
  static PolynomialP from_polynomial(Space h_minus, CPolynomial p);

  const Space& space() const noexcept { return space_; }
  Index dim() const noexcept { return space_->dim(); }
  int max_degree() const noexcept { return poly_.basis()->max_degree(); }
  int degree() const { return poly_.degree(); }
  int low_degree() const { return poly_.low_degree(); }
  bool is_zero() const { return poly_.degree() < 0; }

  const CPolynomial& scalar() const noexcept { return poly_; }
  /// Stacked (P'_*, P') as a polynomial map with 2 dim outputs.
  const CPolynomial& gradient() const noexcept { return grad_; }
  /// Column v: derivative of the stacked gradient in variable v.
  const std::vector<CPolynomial>& hessian() const noexcept { return hess_; }

  /// Present bidegrees (kstar, k), sorted.
  std::vector<std::pair<int, int>> bidegrees() const;
  /// Symmetric tensor of bidegree (kstar, k), flattened row-major over
  /// (star indices, plain indices).
  CVector dense_tensor(int kstar, int k) const;

  cplx value(const CVector& phi_star, const CVector& phi) const;
  /// Stacked (P'_*, P').
  CVector gradient(const CVector& phi_star, const CVector& phi) const;
  /// d(P'_*, P') / d(phi*, phi).
  CMatrix jacobian(const CVector& phi_star, const CVector& phi) const;

 private:
  void finish();

  Space space_;
  CPolynomial poly_;
  CPolynomial grad_;
  std::vector<CPolynomial> hess_;
};

struct PValue {
  cplx value;
  FieldVector grad_phi;       // P'_*
  FieldVector grad_phi_star;  // P'
};

PValue eval_P_and_grads(const PolynomialP& p, const FieldVector& phi_star, const FieldVector& phi);

struct ActionSpec {
  RGData rg;
  PolynomialP p;
  KernelSet k;
  Operator q_minus_adj;
  Operator q_adj;
  Operator d_adj;
  Operator qcheck_adj;
  Operator qcheck_minus_adj;
  Operator c_inverse;  // Delta + b Q*Q

  static ActionSpec make(RGData rg, PolynomialP p, double cond_limit = kDefaultCondLimit);
};

/// Gradients of an action; fields the action does not depend on are left empty.
struct ActionGradient {
  FieldVector theta_star, theta;
  FieldVector psi_star, psi;
  FieldVector phi_star, phi;
};

cplx eval_fA(const ActionSpec& spec, const FieldVector& phi_star, const FieldVector& phi);
cplx eval_A(const ActionSpec& spec, const FieldVector& psi_star, const FieldVector& psi,
            const FieldVector& phi_star, const FieldVector& phi);
cplx eval_Aeff(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
               const FieldVector& psi_star, const FieldVector& psi, const FieldVector& phi_star,
               const FieldVector& phi);
cplx eval_Acheck(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                 const FieldVector& phi_star, const FieldVector& phi);

ActionGradient grad_fA(const ActionSpec& spec, const FieldVector& phi_star, const FieldVector& phi);
ActionGradient grad_A(const ActionSpec& spec, const FieldVector& psi_star, const FieldVector& psi,
                      const FieldVector& phi_star, const FieldVector& phi);
ActionGradient grad_Aeff(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                         const FieldVector& psi_star, const FieldVector& psi, const FieldVector& phi_star,
                         const FieldVector& phi);
ActionGradient grad_Acheck(const ActionSpec& spec, const FieldVector& theta_star, const FieldVector& theta,
                           const FieldVector& phi_star, const FieldVector& phi);

/// (bQ*Q + fQ)^{-1} (b Q* theta + fQ Q- phi); the same map serves both slots.
FieldVector psi_tilde(const ActionSpec& spec, const FieldVector& theta, const FieldVector& phi);

struct PreparationResidual {
  double value = 0.0;     // |Acheck - Aeff o psi_tilde| / max(1, |Acheck|)
  double gradient = 0.0;  // chain-rule identity for grad_phi(*) Acheck, relative
};

PreparationResidual preparation_check(const ActionSpec& spec, const FieldVector& theta_star,
                                      const FieldVector& theta, const FieldVector& phi_star,
                                      const FieldVector& phi);

/// (psi*, psi) -> (phi*_bg, phi_bg).
using BackgroundFn = std::function<std::pair<FieldVector, FieldVector>(const FieldVector&, const FieldVector&)>;
/// (dpsi*, dpsi) -> (dphi*^+, dphi^+) at a fixed base point.
using DeltaPlusFn = std::function<std::pair<FieldVector, FieldVector>(const FieldVector&, const FieldVector&)>;
/// Scalar function of (psi*, psi).
using FieldFunction = std::function<cplx(const FieldVector&, const FieldVector&)>;

/// Aeff at (psi_cr + dpsi) minus Aeff at psi_cr, phi slots filled by bg.
cplx delta_A_direct(const ActionSpec& spec, const BackgroundFn& bg, const FieldVector& theta_star,
                    const FieldVector& theta, const FieldVector& psi_star_cr, const FieldVector& psi_cr,
                    const FieldVector& dpsi_star, const FieldVector& dpsi);

/// <dpsi*, C^{-1} dpsi> - int_0^1 dt [<dpsi*, fQ Q- dphi^+(t)> + <fQ Q- dphi*^+(t), dpsi>]
/// with an n-point Gauss-Legendre rule in t.
cplx delta_A_formula(const ActionSpec& spec, const DeltaPlusFn& plus, const FieldVector& dpsi_star,
                     const FieldVector& dpsi, int t_nodes);

cplx delta_E(const FieldFunction& e, const FieldVector& psi_star_cr, const FieldVector& psi_cr,
             const FieldVector& dpsi_star, const FieldVector& dpsi);

}  // namespace blockspin
