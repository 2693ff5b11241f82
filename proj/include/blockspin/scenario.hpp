#pragma once

// Scenario files and the verification suites they drive.
//
// A scenario fixes the spaces (by dimensions or by a lattice), the forms,
// b, fQ, D, Q-, Q, the polynomial P, the function E, series order,
// tolerances, draw counts, field scales, radii and quadrature settings.  All
// random quantities come from CounterRng(seed, <stream>) with fixed stream
// names, so a scenario and seed determine every number in the report.

#include "blockspin/gaussian.hpp"
#include "blockspin/lattice.hpp"
#include "blockspin/report.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blockspin {

struct OperatorChoice {
  OperatorChoice(std::string k = {}) : kind(std::move(k)) {}

  std::string kind;  // identity | random | explicit | recursion | laplacian | averaging
  CMatrix matrix;    // explicit
  double mass = 1.0; // laplacian
  bool symmetric = true;
};

struct PolynomialChoice {
  std::string kind = "none";  // none | file | inline | random | local
  std::vector<TensorEntry> entries;
  std::vector<int> degrees{3, 4};
  double scale = 0.1;
  bool real = false;
  double cubic = 0.0;   // local: sum_x cubic phi*_x phi_x^2 + quartic (phi*_x phi_x)^2
  double quartic = 0.0;
  int max_degree = 0;   // 0: the largest degree present (at least 2)
};

struct EChoice {
  std::string kind = "zero";  // zero | quadratic | polynomial
  double coefficient = 0.0;   // quadratic: coefficient <psi*, psi>
  std::vector<TensorEntry> entries;
};

struct LatticeChoice {
  std::vector<int> extents;
  BlockScheme scheme;
};

struct ScenarioConfig {
  Json source;
  std::uint64_t seed = 1;
  std::optional<std::array<Index, 3>> dims;  // H-, H, H+
  std::optional<LatticeChoice> lattice;
  std::string grams = "identity";  // identity | random
  double b = 1.0;
  OperatorChoice fq{"identity"};
  OperatorChoice d{"identity"};
  OperatorChoice q{"random"};
  OperatorChoice q_minus{"random"};
  PolynomialChoice polynomial;
  EChoice e;
  int max_order = 4;
  std::map<std::string, double> tolerances;
  std::map<std::string, int> draws;
  std::map<std::string, double> fields;
  QuadratureConfig quadrature;
  double quadrature_g = 0.05;  // coupling of the scalar reduction
  std::vector<std::string> suites;

  double tol(const std::string& key) const { return tolerances.at(key); }
};

const std::vector<std::string>& suite_names();

/// Parse a scenario; relative file references resolve against base_dir.
ScenarioConfig parse_scenario(const Json& j, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct Scenario {
  ActionSpec spec;
  FieldFunction e;  // empty when E = 0
  std::optional<TorusLattice> lattice;
};

Scenario build_scenario(const ScenarioConfig& config);

/// Runs config.suites, or `only` when given.  Suite failures are recorded in
/// the report; malformed scenarios throw ConfigError.
Report run_scenario(const ScenarioConfig& config, const std::vector<std::string>& only = {});

}  // namespace blockspin
