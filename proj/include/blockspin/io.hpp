#pragma once

// JSON conversions for scenario files, polynomial files and reports.
//
// Complex numbers are [re, im] pairs; a plain number is read as real.
// Matrices are arrays of rows.  Polynomial files list monomials by bidegree:
//
//   {"monomials": [{"kstar": 1, "k": 2, "entries": [
//       {"multi_index_star": [0], "multi_index": [0, 0], "re": 0.1, "im": 0.0}]}]}

#include "blockspin/action.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace blockspin {

using Json = nlohmann::json;

/// A malformed scenario or data file.  `field` is the JSON path of the
/// offending value, e.g. "fQ.matrix[1][0]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// 17 significant digits, locale independent.
std::string format_number(double v);

Json load_json_file(const std::filesystem::path& path, const std::string& field);

double read_number(const Json& j, const std::string& field);
cplx read_complex(const Json& j, const std::string& field);
CVector read_complex_vector(const Json& j, const std::string& field);
CMatrix read_complex_matrix(const Json& j, const std::string& field);
RMatrix read_real_matrix(const Json& j, const std::string& field);

Json complex_to_json(cplx v);
Json vector_to_json(const CVector& v);
Json matrix_to_json(const CMatrix& m);

/// Entries of a polynomial file (or an inline object with "monomials").
std::vector<TensorEntry> read_polynomial_entries(const Json& j, const std::string& field);
Json polynomial_to_json(const PolynomialP& p);

}  // namespace blockspin
