#pragma once

// Periodic rectangular lattices, their block pavings, and the averaging
// operators that map fields on a lattice to fields on the coarse sublattice.
//
// Points are indexed row-major over coordinates (last axis fastest).  The
// block owned by coarse point y covers fine coordinates y*block + offset,
// offset in [0, block) per axis, and profile weights are listed row-major
// over the offsets.

#include "blockspin/linalg.hpp"

#include <vector>

namespace blockspin {

class TorusLattice {
 public:
  explicit TorusLattice(std::vector<int> extents);

  const std::vector<int>& extents() const noexcept { return extents_; }
  int axes() const noexcept { return static_cast<int>(extents_.size()); }
  Index points() const noexcept { return points_; }

  Index index_of(const std::vector<int>& coords) const;
  std::vector<int> coords_of(Index index) const;
  std::string label() const;

  bool operator==(const TorusLattice&) const = default;

 private:
  std::vector<int> extents_;
  Index points_ = 1;
};

struct BlockScheme {
  std::vector<int> block;
  std::vector<double> profile;  // empty means uniform
  bool allow_unnormalized = false;

  static BlockScheme uniform(std::vector<int> block);
  Index volume() const;
  /// The profile with the uniform default expanded.
  std::vector<double> weights() const;
};

/// Field space on a lattice with the l2 form.
Space lattice_space(const TorusLattice& lat);

TorusLattice sublattice(const TorusLattice& lat, const BlockScheme& scheme);
Operator averaging_operator(const TorusLattice& lat, const BlockScheme& scheme);
/// Averaging whose codomain is the supplied (already constructed) space; used
/// so consecutive operators in a tower share space objects.
Operator averaging_operator(const TorusLattice& lat, const BlockScheme& scheme, const Space& fine,
                            const Space& coarse);
Operator compose_averaging(const Operator& q, const Operator& q_minus);

struct TowerLevel {
  TorusLattice lattice;
  Space space;
  Operator step;        // previous level -> this level (identity at level 0)
  Operator cumulative;  // level 0 -> this level
};

std::vector<TowerLevel> build_tower(const TorusLattice& lat, const BlockScheme& scheme, int steps);

/// -Laplacian (nearest neighbour, periodic) plus mass on a lattice; a
/// convenient symmetric D.
Operator lattice_laplacian(const TorusLattice& lat, const Space& space, double mass);

/// Shift a field by `shift` sites along `axis` (periodic).
CVector translate(const TorusLattice& lat, const CVector& field, int axis, int shift);

}  // namespace blockspin
