#pragma once

// Quadratic kernels of one block-spin step.
//
//   Qcheck = ((1/b) 1 + Q fQ^{-1} Q*)^{-1}           (next-scale fQ)
//   S      = (D + Q-* fQ Q-)^{-1}
//   Scheck = (D + Qcheck-* Qcheck Qcheck-)^{-1},     Qcheck- = Q Q-
//   Delta  = fQ - fQ Q- S Q-* fQ
//   C      = (Delta + b Q*Q)^{-1}                     (fluctuation covariance)

#include "blockspin/linalg.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace blockspin {

struct RGData {
  Space h_minus;
  Space h;
  Space h_plus;
  Operator q_minus;  // H- -> H
  Operator q;        // H  -> H+
  double b = 1.0;
  Operator fq;       // on H, symmetric positive definite
  Operator d;        // on H-

  /// Throws std::invalid_argument when shapes, b > 0, or the symmetry and
  /// positivity of fQ fail.
  void validate() const;
  bool d_is_symmetric(double tol = 1e-12) const;
};

struct NamedResidual {
  std::string name;
  double value = 0.0;
};

struct KernelSet {
  Operator qcheck_minus;  // Q Q-
  Operator qcheck;
  Operator s;
  Operator scheck;
  Operator delta;
  Operator c;
  Operator coupling;      // b Q*Q + fQ
  Operator coupling_inv;
  // Adjoints with respect to the forms; they appear in the starred equations.
  Operator s_adj;
  Operator scheck_adj;
  Operator c_adj;
  std::map<std::string, double> condition;
};

Operator qcheck_recursion(const RGData& data, double cond_limit = kDefaultCondLimit);
Operator qcheck_alt(const RGData& data, double cond_limit = kDefaultCondLimit);
std::pair<Operator, Operator> greens(const RGData& data, double cond_limit = kDefaultCondLimit);
std::pair<Operator, Operator> delta_cov(const RGData& data, double cond_limit = kDefaultCondLimit);

KernelSet compute_kernels(const RGData& data, double cond_limit = kDefaultCondLimit);

/// Next-scale analogue of Delta on H+:
/// Qcheck - Qcheck Qcheck- Scheck Qcheck-* Qcheck.
Operator delta_check(const KernelSet& k);

/// Residuals (relative, spectral norm) of the kernel identities that hold
/// when D is invertible: two forms of Delta, the resolvent identity for S
/// (and for a synthetic family R = Q- T, R_* = D T^{-1} D^{-1} Q-*), two
/// forms of Scheck, the representation of C, and b C^(*) Q* in both slots.
/// Evaluated in long double from the input data.
std::vector<NamedResidual> identity_suite_edA(const RGData& data, double cond_limit = kDefaultCondLimit,
                                              const CMatrix* r_transform = nullptr);

/// Symmetry defects of Qcheck, S, Scheck, Delta and C with respect to their forms.
std::vector<NamedResidual> kernel_symmetry(const KernelSet& k);

}  // namespace blockspin
