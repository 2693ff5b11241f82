#include "blockspin/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <numbers>

namespace blockspin {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::string_view stream) : key_(seed ^ fnv1a64(stream)) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return splitmix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int CounterRng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(next_u64() % span);
}

CounterRng CounterRng::substream(std::string_view name) const {
  CounterRng r(0, name);
  r.key_ ^= splitmix64(key_);
  return r;
}

RMatrix normal_matrix(CounterRng& rng, Index rows, Index cols) {
  RMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

RMatrix spd_matrix(CounterRng& rng, Index n, double shift) {
  const RMatrix a = normal_matrix(rng, n, n);
  return a * a.transpose() + shift * RMatrix::Identity(n, n);
}

CVector complex_normal(CounterRng& rng, Index n) {
  CVector v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = cplx(re, im);
  }
  return v;
}

namespace {

Space random_space(CounterRng& rng, const std::string& name, Index n, bool random_gram) {
  if (!random_gram) return make_space(name, n);
  RMatrix g = spd_matrix(rng, n, 0.0) / static_cast<double>(n) + RMatrix::Identity(n, n);
  g = 0.5 * (g + g.transpose());
  return make_space(name, g);
}

}  // namespace

RGData random_rgdata(CounterRng& rng, const EnsembleOptions& options) {
  RGData data;
  data.h_minus = random_space(rng, "H-", options.dims[0], options.random_grams);
  data.h = random_space(rng, "H", options.dims[1], options.random_grams);
  data.h_plus = random_space(rng, "H+", options.dims[2], options.random_grams);
  data.b = options.b;
  data.q_minus = Operator::real(data.h_minus, data.h, normal_matrix(rng, options.dims[1], options.dims[0]));
  data.q = Operator::real(data.h, data.h_plus, normal_matrix(rng, options.dims[2], options.dims[1]));
  data.fq = Operator::real(data.h, data.h, data.h->gram_inverse() * spd_matrix(rng, options.dims[1]));
  RMatrix d = spd_matrix(rng, options.dims[0]);
  if (!options.symmetric_d) d += normal_matrix(rng, options.dims[0], options.dims[0]) * 0.3;
  data.d = Operator::real(data.h_minus, data.h_minus, data.h_minus->gram_inverse() * d);
  return data;
}

PolynomialP random_polynomial(CounterRng& rng, const Space& h_minus, const std::vector<int>& degrees,
                              double scale, bool real_coefficients) {
  int top = 2;
  for (int d : degrees) {
    if (d < 2) throw std::invalid_argument("random_polynomial: degrees must be >= 2");
    top = std::max(top, d);
  }
  const auto basis = MonomialBasis::make(static_cast<int>(2 * h_minus->dim()), top);
  CPolynomial p(basis, 1);
  for (Index i = 0; i < basis->size(); ++i) {
    if (std::find(degrees.begin(), degrees.end(), basis->degree(i)) == degrees.end()) continue;
    const double re = rng.normal();
    const double im = real_coefficients ? 0.0 : rng.normal();
    p.coeffs()(0, i) = scale * cplx(re, im);
  }
  return PolynomialP::from_polynomial(h_minus, std::move(p));
}

}  // namespace blockspin
