#include "blockspin/polynomial.hpp"

#include <cmath>

namespace blockspin {

namespace {

// All exponents of total degree d in n variables, first variable highest first.
void enumerate(int n, int d, int var, Exponent& cur, std::vector<Exponent>& out) {
  if (var == n - 1) {
    cur[var] = static_cast<std::uint8_t>(d);
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = d; e >= 0; --e) {
    cur[var] = static_cast<std::uint8_t>(e);
    enumerate(n, d - e, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

MonomialBasis::MonomialBasis(int nvars, int max_degree) : nvars_(nvars), max_degree_(max_degree) {
  if (nvars < 1) throw std::invalid_argument("MonomialBasis: nvars must be >= 1");
  if (max_degree < 0 || max_degree > 64) throw std::invalid_argument("MonomialBasis: max_degree out of range");
  Exponent cur(nvars, 0);
  offsets_.push_back(0);
  for (int d = 0; d <= max_degree; ++d) {
    enumerate(nvars, d, 0, cur, exponents_);
    offsets_.push_back(static_cast<Eigen::Index>(exponents_.size()));
  }
  const Eigen::Index m = size();
  degrees_.resize(m);
  multiplicity_.resize(m);
  parent_var_.assign(m, -1);
  for (Eigen::Index i = 0; i < m; ++i) {
    lookup_.emplace(exponents_[i], i);
    int deg = 0;
    double log_mult = 0.0;
    for (int v = 0; v < nvars; ++v) {
      deg += exponents_[i][v];
      log_mult -= std::lgamma(exponents_[i][v] + 1.0);
    }
    degrees_[i] = deg;
    multiplicity_[i] = std::round(std::exp(std::lgamma(deg + 1.0) + log_mult));
  }
  times_var_.assign(m * nvars, -1);
  over_var_.assign(m * nvars, -1);
  for (Eigen::Index i = 0; i < m; ++i) {
    Exponent e = exponents_[i];
    for (int v = 0; v < nvars; ++v) {
      if (degrees_[i] < max_degree) {
        ++e[v];
        times_var_[i * nvars + v] = lookup_.at(e);
        --e[v];
      }
      if (e[v] > 0) {
        --e[v];
        over_var_[i * nvars + v] = lookup_.at(e);
        ++e[v];
        if (parent_var_[i] < 0) parent_var_[i] = v;
      }
    }
  }
}

Eigen::Index MonomialBasis::find(const Exponent& e) const {
  if (static_cast<int>(e.size()) != nvars_) return -1;
  const auto it = lookup_.find(e);
  return it == lookup_.end() ? -1 : it->second;
}

Eigen::Index MonomialBasis::product(Eigen::Index a, Eigen::Index b) const {
  if (degrees_[a] + degrees_[b] > max_degree_) return -1;
  Eigen::Index k = a;
  const Exponent& eb = exponents_[b];
  for (int v = 0; v < nvars_; ++v)
    for (int r = 0; r < eb[v]; ++r) k = times_var_[k * nvars_ + v];
  return k;
}

double MonomialBasis::split_multiplicity(Eigen::Index i, int split) const {
  const auto part = [&](int lo, int hi) {
    int total = 0;
    double log_mult = 0.0;
    for (int v = lo; v < hi; ++v) {
      total += exponents_[i][v];
      log_mult -= std::lgamma(exponents_[i][v] + 1.0);
    }
    return std::round(std::exp(std::lgamma(total + 1.0) + log_mult));
  };
  return part(0, split) * part(split, nvars_);
}

std::pair<int, int> MonomialBasis::bidegree(Eigen::Index i, int split) const {
  int first = 0;
  for (int v = 0; v < split; ++v) first += exponents_[i][v];
  return {first, degrees_[i] - first};
}

}  // namespace blockspin
