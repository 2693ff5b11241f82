#include "blockspin/kernels.hpp"

#include "blockspin/lattice.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace blockspin {

void RGData::validate() const {
  if (!h_minus || !h || !h_plus) throw std::invalid_argument("RGData: spaces not set");
  if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("RGData: b must be > 0");
  require_same_space(q_minus.domain(), h_minus, "RGData: Q- domain");
  require_same_space(q_minus.codomain(), h, "RGData: Q- codomain");
  require_same_space(q.domain(), h, "RGData: Q domain");
  require_same_space(q.codomain(), h_plus, "RGData: Q codomain");
  require_same_space(fq.domain(), h, "RGData: fQ domain");
  require_same_space(fq.codomain(), h, "RGData: fQ codomain");
  require_same_space(d.domain(), h_minus, "RGData: D domain");
  require_same_space(d.codomain(), h_minus, "RGData: D codomain");
  if (fq.matrix().imag().cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("RGData: fQ must be real");
  if (symmetry_defect(fq) > 1e-12) throw std::invalid_argument("RGData: fQ not symmetric with respect to <.,.>");
  // Symmetric w.r.t. the form means gram * fQ is a symmetric matrix.
  const RMatrix weighted = h->gram() * fq.matrix().real();
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(0.5 * (weighted + weighted.transpose()));
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw std::invalid_argument("RGData: fQ not positive definite");
}

bool RGData::d_is_symmetric(double tol) const { return symmetry_defect(d) <= tol; }

namespace {

void record(std::map<std::string, double>& diag, const std::string& name, const CMatrix& m) {
  diag[name] = condition_number(m);
}

}  // namespace

Operator qcheck_recursion(const RGData& data, double cond_limit) {
  const Operator fq_inv = inverse(data.fq, "fQ invertible", cond_limit);
  const Operator inner = Operator::identity(data.h_plus) * (1.0 / data.b) + data.q * fq_inv * adjoint(data.q);
  return inverse(inner, "(1/b) 1 + Q fQ^-1 Q* invertible", cond_limit);
}

Operator qcheck_alt(const RGData& data, double cond_limit) {
  const Operator qs = adjoint(data.q);
  const Operator coupling = qs * data.q * data.b + data.fq;
  const Operator inv = inverse(coupling, "b Q*Q + fQ invertible", cond_limit);
  return (Operator::identity(data.h_plus) - data.q * inv * qs * data.b) * data.b;
}

std::pair<Operator, Operator> greens(const RGData& data, double cond_limit) {
  const Operator qm_adj = adjoint(data.q_minus);
  const Operator s = inverse(data.d + qm_adj * data.fq * data.q_minus, "D + Q-*fQ Q- invertible", cond_limit);
  const Operator qc = qcheck_recursion(data, cond_limit);
  const Operator qcm = compose_averaging(data.q, data.q_minus);
  const Operator sc =
      inverse(data.d + adjoint(qcm) * qc * qcm, "D + Qcheck-* Qcheck Qcheck- invertible", cond_limit);
  return {s, sc};
}

std::pair<Operator, Operator> delta_cov(const RGData& data, double cond_limit) {
  const Operator s = greens(data, cond_limit).first;
  const Operator delta = data.fq - data.fq * data.q_minus * s * adjoint(data.q_minus) * data.fq;
  const Operator c = inverse(delta + adjoint(data.q) * data.q * data.b, "Delta + b Q*Q invertible", cond_limit);
  return {delta, c};
}

KernelSet compute_kernels(const RGData& data, double cond_limit) {
  data.validate();
  KernelSet k;
  const Operator qm_adj = adjoint(data.q_minus);
  const Operator q_adj = adjoint(data.q);

  k.qcheck_minus = compose_averaging(data.q, data.q_minus);
  k.qcheck = qcheck_recursion(data, cond_limit);

  const Operator s_lhs = data.d + qm_adj * data.fq * data.q_minus;
  k.s = inverse(s_lhs, "D + Q-*fQ Q- invertible", cond_limit);
  const Operator sc_lhs = data.d + adjoint(k.qcheck_minus) * k.qcheck * k.qcheck_minus;
  k.scheck = inverse(sc_lhs, "D + Qcheck-* Qcheck Qcheck- invertible", cond_limit);

  k.delta = data.fq - data.fq * data.q_minus * k.s * qm_adj * data.fq;
  const Operator c_lhs = k.delta + q_adj * data.q * data.b;
  k.c = inverse(c_lhs, "Delta + b Q*Q invertible", cond_limit);

  k.coupling = q_adj * data.q * data.b + data.fq;
  k.coupling_inv = inverse(k.coupling, "b Q*Q + fQ invertible", cond_limit);

  k.s_adj = adjoint(k.s);
  k.scheck_adj = adjoint(k.scheck);
  k.c_adj = adjoint(k.c);

  record(k.condition, "fQ", data.fq.matrix());
  record(k.condition, "D + Q-*fQ Q-", s_lhs.matrix());
  record(k.condition, "D + Qcheck-* Qcheck Qcheck-", sc_lhs.matrix());
  record(k.condition, "Delta + b Q*Q", c_lhs.matrix());
  record(k.condition, "b Q*Q + fQ", k.coupling.matrix());
  return k;
}

Operator delta_check(const KernelSet& k) {
  return k.qcheck - k.qcheck * k.qcheck_minus * k.scheck * adjoint(k.qcheck_minus) * k.qcheck;
}

namespace {

using WideScalar = std::complex<long double>;
using WideMatrix = Eigen::Matrix<WideScalar, Eigen::Dynamic, Eigen::Dynamic>;

WideMatrix widen(const CMatrix& m) { return m.cast<WideScalar>(); }
WideMatrix widen(const RMatrix& m) { return m.cast<WideScalar>(); }

WideMatrix wide_adjoint(const WideMatrix& a, const Space& dom, const Space& cod) {
  return widen(dom->gram_inverse()) * a.transpose() * widen(cod->gram());
}

}  // namespace

// Both sides are evaluated from the input data in extended precision.  Several
// of these identities subtract terms of size |D^-1| to produce terms of size |S|,
// so a double evaluation loses digits in proportion to that ratio squared.
std::vector<NamedResidual> identity_suite_edA(const RGData& data, double cond_limit, const CMatrix* r_transform) {
  data.validate();
  const auto inv = [cond_limit](const WideMatrix& m, std::string_view what) {
    return checked_inverse(m, what, cond_limit);
  };
  const WideMatrix d = widen(data.d.matrix());
  const WideMatrix qm = widen(data.q_minus.matrix());
  const WideMatrix q = widen(data.q.matrix());
  const WideMatrix fq = widen(data.fq.matrix());
  const WideMatrix qm_adj = wide_adjoint(qm, data.h_minus, data.h);
  const WideMatrix q_adj = wide_adjoint(q, data.h, data.h_plus);
  const WideScalar b(data.b);
  const WideMatrix one_h = WideMatrix::Identity(fq.rows(), fq.cols());
  const WideMatrix one_p = WideMatrix::Identity(q.rows(), q.rows());

  const WideMatrix d_inv = inv(d, "D invertible (hypothesis of the kernel identities)");
  const WideMatrix qc = inv(WideMatrix(one_p / b + q * inv(fq, "fQ invertible") * q_adj),
                            "(1/b) 1 + Q fQ^-1 Q* invertible");
  const WideMatrix qcm = q * qm;
  const WideMatrix qcm_adj = wide_adjoint(qcm, data.h_minus, data.h_plus);
  const WideMatrix s = inv(WideMatrix(d + qm_adj * fq * qm), "D + Q-*fQ Q- invertible");
  const WideMatrix sc = inv(WideMatrix(d + qcm_adj * qc * qcm), "D + Qcheck-* Qcheck Qcheck- invertible");
  const WideMatrix delta = fq - fq * qm * s * qm_adj * fq;
  const WideMatrix c = inv(WideMatrix(delta + b * q_adj * q), "Delta + b Q*Q invertible");
  const WideMatrix m_inv = inv(WideMatrix(b * q_adj * q + fq), "b Q*Q + fQ invertible");

  std::vector<NamedResidual> out;
  auto add = [&](std::string name, const WideMatrix& lhs, const WideMatrix& rhs) {
    out.push_back({std::move(name), relative_residual(lhs, rhs)});
  };

  // (a) two forms of Delta
  add("a.left", delta, inv(WideMatrix(one_h + fq * qm * d_inv * qm_adj), "1 + fQ Q- D^-1 Q-* invertible") * fq);
  add("a.right", delta, fq * inv(WideMatrix(one_h + qm * d_inv * qm_adj * fq), "1 + Q- D^-1 Q-* fQ invertible"));

  // (b) resolvent identity, R = R_* = Q-
  add("b.S", s, d_inv - d_inv * qm_adj * delta * qm * d_inv);

  // (b) general R with R D^-1 R_* = Q- D^-1 Q-*: R = Q- T, R_* = D T^-1 D^-1 Q-*.
  if (r_transform != nullptr) {
    const WideMatrix t = widen(*r_transform);
    const WideMatrix r = qm * t;
    const WideMatrix r_star = d * inv(t, "T invertible") * d_inv * qm_adj;
    const WideMatrix lhs = inv(WideMatrix(d + r_star * fq * r), "D + R_* fQ R invertible");
    add("b.general", lhs, d_inv - d_inv * r_star * delta * r * d_inv);
  }

  // (c) two forms of Scheck
  const WideMatrix s_inv = inv(s, "S invertible");
  add("c.first", sc,
      inv(WideMatrix(s_inv - qm_adj * fq * m_inv * fq * qm), "S^-1 - Q-*fQ(fQ+bQ*Q)^-1 fQ Q- invertible"));
  add("c.second", sc, s + s * qm_adj * fq * c * fq * qm * s);

  // (d) representation of C
  add("d", c, m_inv + m_inv * fq * qm * sc * qm_adj * fq * m_inv);

  // (e) b C^(*) Q* in both slots
  const WideMatrix tail = qcm_adj * qc;
  const WideMatrix c_adj = wide_adjoint(c, data.h, data.h);
  const WideMatrix sc_adj = wide_adjoint(sc, data.h_minus, data.h_minus);
  add("e", b * c * q_adj, m_inv * (b * q_adj + fq * qm * sc * tail));
  add("e.star", b * c_adj * q_adj, m_inv * (b * q_adj + fq * qm * sc_adj * tail));
  return out;
}

std::vector<NamedResidual> kernel_symmetry(const KernelSet& k) {
  return {{"Qcheck", symmetry_defect(k.qcheck)},
          {"S", symmetry_defect(k.s)},
          {"Scheck", symmetry_defect(k.scheck)},
          {"Delta", symmetry_defect(k.delta)},
          {"C", symmetry_defect(k.c)}};
}

}  // namespace blockspin
