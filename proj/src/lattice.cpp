#include "blockspin/lattice.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace blockspin {

TorusLattice::TorusLattice(std::vector<int> extents) : extents_(std::move(extents)) {
  if (extents_.empty()) throw std::invalid_argument("TorusLattice: at least one axis required");
  for (int e : extents_) {
    if (e < 1) throw std::invalid_argument("TorusLattice: extents must be >= 1");
    points_ *= e;
  }
}

Index TorusLattice::index_of(const std::vector<int>& coords) const {
  Index idx = 0;
  for (int a = 0; a < axes(); ++a) {
    const int e = extents_[a];
    const int c = ((coords[a] % e) + e) % e;
    idx = idx * e + c;
  }
  return idx;
}

std::vector<int> TorusLattice::coords_of(Index index) const {
  std::vector<int> c(extents_.size());
  for (int a = axes() - 1; a >= 0; --a) {
    c[a] = static_cast<int>(index % extents_[a]);
    index /= extents_[a];
  }
  return c;
}

std::string TorusLattice::label() const {
  std::ostringstream os;
  os << "lattice(";
  for (std::size_t i = 0; i < extents_.size(); ++i) os << (i ? "," : "") << extents_[i];
  os << ")";
  return os.str();
}

BlockScheme BlockScheme::uniform(std::vector<int> block) { return BlockScheme{std::move(block), {}, false}; }

Index BlockScheme::volume() const {
  Index v = 1;
  for (int b : block) v *= b;
  return v;
}

std::vector<double> BlockScheme::weights() const {
  if (profile.empty()) return std::vector<double>(volume(), 1.0 / static_cast<double>(volume()));
  return profile;
}

Space lattice_space(const TorusLattice& lat) { return make_space(lat.label(), lat.points()); }

namespace {

void check_scheme(const TorusLattice& lat, const BlockScheme& scheme) {
  if (static_cast<int>(scheme.block.size()) != lat.axes())
    throw std::invalid_argument("BlockScheme: block has wrong number of axes");
  for (int a = 0; a < lat.axes(); ++a) {
    if (scheme.block[a] < 1) throw std::invalid_argument("BlockScheme: block sides must be >= 1");
    if (lat.extents()[a] % scheme.block[a] != 0) {
      std::ostringstream os;
      os << "BlockScheme: extent " << lat.extents()[a] << " on axis " << a << " not divisible by block "
         << scheme.block[a];
      throw std::invalid_argument(os.str());
    }
  }
  if (!scheme.profile.empty()) {
    if (static_cast<Index>(scheme.profile.size()) != scheme.volume())
      throw std::invalid_argument("BlockScheme: profile length differs from block volume");
    const double total = std::accumulate(scheme.profile.begin(), scheme.profile.end(), 0.0);
    if (!scheme.allow_unnormalized && std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("BlockScheme: profile weights must sum to 1 (set allow_unnormalized)");
  }
}

}  // namespace

TorusLattice sublattice(const TorusLattice& lat, const BlockScheme& scheme) {
  check_scheme(lat, scheme);
  std::vector<int> coarse(lat.extents());
  for (int a = 0; a < lat.axes(); ++a) coarse[a] /= scheme.block[a];
  return TorusLattice(std::move(coarse));
}

Operator averaging_operator(const TorusLattice& lat, const BlockScheme& scheme) {
  const TorusLattice coarse = sublattice(lat, scheme);
  return averaging_operator(lat, scheme, lattice_space(lat), lattice_space(coarse));
}

Operator averaging_operator(const TorusLattice& lat, const BlockScheme& scheme, const Space& fine,
                            const Space& coarse_space) {
  const TorusLattice coarse = sublattice(lat, scheme);
  if (fine->dim() != lat.points() || coarse_space->dim() != coarse.points())
    throw SpaceMismatch("averaging_operator: space dimensions do not match lattices");
  const std::vector<double> w = scheme.weights();
  const TorusLattice offsets(scheme.block);
  RMatrix m = RMatrix::Zero(coarse.points(), lat.points());
  for (Index y = 0; y < coarse.points(); ++y) {
    const std::vector<int> cy = coarse.coords_of(y);
    for (Index o = 0; o < offsets.points(); ++o) {
      const std::vector<int> co = offsets.coords_of(o);
      std::vector<int> x(cy.size());
      for (std::size_t a = 0; a < cy.size(); ++a) x[a] = cy[a] * scheme.block[a] + co[a];
      m(y, lat.index_of(x)) += w[o];
    }
  }
  return Operator::real(fine, coarse_space, m);
}

Operator compose_averaging(const Operator& q, const Operator& q_minus) { return q * q_minus; }

std::vector<TowerLevel> build_tower(const TorusLattice& lat, const BlockScheme& scheme, int steps) {
  if (steps < 0) throw std::invalid_argument("build_tower: steps must be >= 0");
  std::vector<TowerLevel> tower;
  const Space base = lattice_space(lat);
  tower.push_back({lat, base, Operator::identity(base), Operator::identity(base)});
  for (int k = 1; k <= steps; ++k) {
    const TowerLevel& prev = tower.back();
    TorusLattice next({1});
    try {
      next = sublattice(prev.lattice, scheme);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("build_tower: step " + std::to_string(k) + ": " + e.what());
    }
    const Space space = lattice_space(next);
    Operator step = averaging_operator(prev.lattice, scheme, prev.space, space);
    Operator cumulative = compose_averaging(step, prev.cumulative);
    tower.push_back({next, space, std::move(step), std::move(cumulative)});
  }
  return tower;
}

Operator lattice_laplacian(const TorusLattice& lat, const Space& space, double mass) {
  if (space->dim() != lat.points()) throw SpaceMismatch("lattice_laplacian: dimension mismatch");
  RMatrix m = RMatrix::Zero(lat.points(), lat.points());
  for (Index x = 0; x < lat.points(); ++x) {
    m(x, x) += mass;
    const std::vector<int> c = lat.coords_of(x);
    for (int a = 0; a < lat.axes(); ++a) {
      if (lat.extents()[a] == 1) continue;
      for (int s : {-1, 1}) {
        std::vector<int> n = c;
        n[a] += s;
        m(x, x) += 1.0;
        m(x, lat.index_of(n)) -= 1.0;
      }
    }
  }
  return Operator::real(space, space, m);
}

CVector translate(const TorusLattice& lat, const CVector& field, int axis, int shift) {
  CVector out(field.size());
  for (Index x = 0; x < lat.points(); ++x) {
    std::vector<int> c = lat.coords_of(x);
    c[axis] += shift;
    out(lat.index_of(c)) = field(x);
  }
  return out;
}

}  // namespace blockspin
