#pragma once

// Counter-based random draws.
//
// A CounterRng is keyed by (seed, stream name).  Draw number k (k = 1, 2, ...)
// is splitmix64(key + k * 0x9E3779B97F4A7C15) with key = seed XOR
// fnv1a64(stream).  Uniforms take the top 53 bits; normals use Box-Muller
// with one uniform pair per normal (cosine branch only):
//   z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2).
// The recipe is small enough to reproduce in any language.

#include "blockspin/action.hpp"
#include "blockspin/kernels.hpp"

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace blockspin {

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stream);

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();
  int uniform_int(int lo, int hi);  // inclusive

  /// An independent generator for sub-stream `name`.
  CounterRng substream(std::string_view name) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

RMatrix normal_matrix(CounterRng& rng, Index rows, Index cols);
/// A A^T + shift 1 with standard normal A.
RMatrix spd_matrix(CounterRng& rng, Index n, double shift = 0.1);
CVector complex_normal(CounterRng& rng, Index n);

struct EnsembleOptions {
  std::array<Index, 3> dims{3, 2, 1};  // H-, H, H+
  double b = 1.0;
  bool random_grams = false;
  bool symmetric_d = true;
};

/// fQ = G^{-1}(A A^T + 0.1), D = G-^{-1}(B B^T + 0.1), Q-, Q standard normal.
/// With identity forms these are the plain SPD ensembles.
RGData random_rgdata(CounterRng& rng, const EnsembleOptions& options);

/// P with every monomial of the listed total degrees, coefficients
/// scale * (normal + i normal), drawn in basis order.
PolynomialP random_polynomial(CounterRng& rng, const Space& h_minus, const std::vector<int>& degrees,
                              double scale, bool real_coefficients = false);

}  // namespace blockspin
