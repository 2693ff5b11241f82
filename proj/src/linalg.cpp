#include "blockspin/linalg.hpp"

#include <sstream>

namespace blockspin {

namespace {

std::string near_singular_message(const std::string& assumption, double cond, double limit) {
  std::ostringstream os;
  os << "NearSingular: " << assumption << " fails (condition number " << cond << " > " << limit
     << ")";
  return os.str();
}

void require_shape(bool ok, std::string_view what) {
  if (!ok) throw SpaceMismatch(std::string(what));
}

}  // namespace

NearSingular::NearSingular(std::string assumption, double condition, double limit)
    : std::runtime_error(near_singular_message(assumption, condition, limit)),
      assumption_(std::move(assumption)),
      condition_(condition) {}

SpaceSpec::SpaceSpec(std::string name, RMatrix gram) : name_(std::move(name)), gram_(std::move(gram)) {
  if (gram_.rows() < 1 || gram_.rows() != gram_.cols())
    throw std::invalid_argument("SpaceSpec '" + name_ + "': gram must be square with dim >= 1");
  const double scale = gram_.cwiseAbs().maxCoeff();
  if (!((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale))
    throw std::invalid_argument("SpaceSpec '" + name_ + "': gram not symmetric");
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(gram_);
  if (!(eig.eigenvalues().minCoeff() > 0.0))
    throw std::invalid_argument("SpaceSpec '" + name_ + "': gram not positive definite");
  gram_inv_ = gram_.inverse();
  gram_det_ = gram_.determinant();
  identity_ = gram_.isIdentity(0.0);
}

Space make_space(std::string name, Index dim) {
  return std::make_shared<const SpaceSpec>(std::move(name), RMatrix::Identity(dim, dim));
}

Space make_space(std::string name, RMatrix gram) {
  return std::make_shared<const SpaceSpec>(std::move(name), std::move(gram));
}

bool same_space(const Space& a, const Space& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->name() == b->name() && a->dim() == b->dim() && a->gram() == b->gram();
}

void require_same_space(const Space& a, const Space& b, std::string_view what) {
  if (!same_space(a, b)) {
    std::string msg(what);
    msg += ": space mismatch (";
    msg += a ? a->name() : "null";
    msg += " vs ";
    msg += b ? b->name() : "null";
    msg += ")";
    throw SpaceMismatch(msg);
  }
}

FieldVector::FieldVector(Space space, CVector values) : space_(std::move(space)), values_(std::move(values)) {
  require_shape(space_ != nullptr, "FieldVector: null space");
  require_shape(values_.size() == space_->dim(), "FieldVector: length differs from space dimension");
}

FieldVector FieldVector::zero(Space space) {
  const Index n = space->dim();
  return FieldVector(std::move(space), CVector::Zero(n));
}

FieldVector FieldVector::operator+(const FieldVector& other) const {
  require_same_space(space_, other.space_, "FieldVector +");
  return FieldVector(space_, values_ + other.values_);
}

FieldVector FieldVector::operator-(const FieldVector& other) const {
  require_same_space(space_, other.space_, "FieldVector -");
  return FieldVector(space_, values_ - other.values_);
}

FieldVector FieldVector::operator*(cplx s) const { return FieldVector(space_, values_ * s); }

Operator::Operator(Space domain, Space codomain, CMatrix entries)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), m_(std::move(entries)) {
  require_shape(domain_ && codomain_, "Operator: null space");
  require_shape(m_.rows() == codomain_->dim() && m_.cols() == domain_->dim(),
                "Operator: entries shape inconsistent with domain/codomain");
}

Operator Operator::identity(const Space& space) {
  return Operator(space, space, CMatrix::Identity(space->dim(), space->dim()));
}

Operator Operator::zero(const Space& domain, const Space& codomain) {
  return Operator(domain, codomain, CMatrix::Zero(codomain->dim(), domain->dim()));
}

Operator Operator::real(const Space& domain, const Space& codomain, const RMatrix& entries) {
  return Operator(domain, codomain, entries.cast<cplx>());
}

Operator Operator::operator*(const Operator& rhs) const {
  require_same_space(domain_, rhs.codomain_, "Operator composition");
  return Operator(rhs.domain_, codomain_, m_ * rhs.m_);
}

FieldVector Operator::operator*(const FieldVector& v) const {
  require_same_space(domain_, v.space(), "Operator application");
  return FieldVector(codomain_, m_ * v.values());
}

Operator Operator::operator+(const Operator& rhs) const {
  require_same_space(domain_, rhs.domain_, "Operator + (domain)");
  require_same_space(codomain_, rhs.codomain_, "Operator + (codomain)");
  return Operator(domain_, codomain_, m_ + rhs.m_);
}

Operator Operator::operator-(const Operator& rhs) const {
  require_same_space(domain_, rhs.domain_, "Operator - (domain)");
  require_same_space(codomain_, rhs.codomain_, "Operator - (codomain)");
  return Operator(domain_, codomain_, m_ - rhs.m_);
}

Operator Operator::operator*(cplx s) const { return Operator(domain_, codomain_, m_ * s); }

cplx pairing(const FieldVector& u, const FieldVector& v) {
  require_same_space(u.space(), v.space(), "pairing");
  return pairing(u.values(), u.space()->gram(), v.values());
}

Operator adjoint(const Operator& a) {
  return Operator(a.codomain(), a.domain(),
                  adjoint_matrix(a.matrix(), a.domain()->gram_inverse(), a.codomain()->gram()));
}

FieldVector solve(const Operator& a, const FieldVector& rhs, double cond_limit, std::string_view assumption) {
  if (a.matrix().rows() != a.matrix().cols()) throw SpaceMismatch("solve: operator not square");
  require_same_space(a.codomain(), rhs.space(), "solve");
  const double cond = condition_number(a.matrix());
  if (!(cond <= cond_limit)) throw NearSingular(std::string(assumption), cond, cond_limit);
  return FieldVector(a.domain(), a.matrix().partialPivLu().solve(rhs.values()));
}

Operator inverse(const Operator& a, std::string_view assumption, double cond_limit) {
  if (a.matrix().rows() != a.matrix().cols()) throw SpaceMismatch("inverse: operator not square");
  return Operator(a.codomain(), a.domain(), checked_inverse(a.matrix(), assumption, cond_limit));
}

namespace {

void check_woodbury_shapes(const Operator& f, const Operator& g, const Operator& q, const Operator& q_star) {
  require_same_space(f.domain(), f.codomain(), "woodbury: f must map V to V");
  require_same_space(g.domain(), g.codomain(), "woodbury: g must map W to W");
  require_same_space(q.domain(), f.domain(), "woodbury: q must map V to W");
  require_same_space(q.codomain(), g.domain(), "woodbury: q must map V to W");
  require_same_space(q_star.domain(), g.domain(), "woodbury: q_* must map W to V");
  require_same_space(q_star.codomain(), f.domain(), "woodbury: q_* must map W to V");
}

}  // namespace

Operator woodbury_left(const Operator& f, const Operator& g, const Operator& q, const Operator& q_star,
                       double cond_limit) {
  check_woodbury_shapes(f, g, q, q_star);
  return Operator(g.domain(), g.domain(),
                  woodbury_left_matrix<cplx>(f.matrix(), g.matrix(), q.matrix(), q_star.matrix(), cond_limit));
}

Operator woodbury_right(const Operator& f, const Operator& g, const Operator& q, const Operator& q_star,
                        double cond_limit) {
  check_woodbury_shapes(f, g, q, q_star);
  return Operator(g.domain(), g.domain(),
                  woodbury_right_matrix<cplx>(f.matrix(), g.matrix(), q.matrix(), q_star.matrix(), cond_limit));
}

double symmetry_defect(const Operator& a) { return relative_residual(a.matrix(), adjoint(a).matrix()); }

double spectral_norm(const Operator& a) { return spectral_norm(a.matrix()); }

double condition_number(const Operator& a) { return condition_number(a.matrix()); }

}  // namespace blockspin
