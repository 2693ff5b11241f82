#include "blockspin/io.hpp"

#include <fstream>
#include <sstream>

namespace blockspin {

namespace {

std::string at(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

const Json& require_array(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array");
  return j;
}

std::vector<int> read_indices(const Json& j, const std::string& field) {
  require_array(j, field);
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) throw ConfigError(at(field, i), "expected an integer index");
    out.push_back(j[i].get<int>());
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

Json load_json_file(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(field, path.string() + ": " + e.what());
  }
}

double read_number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

cplx read_complex(const Json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2) return {read_number(j[0], at(field, 0)), read_number(j[1], at(field, 1))};
  throw ConfigError(field, "expected a number or an [re, im] pair");
}

CVector read_complex_vector(const Json& j, const std::string& field) {
  require_array(j, field);
  CVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = read_complex(j[i], at(field, i));
  return v;
}

CMatrix read_complex_matrix(const Json& j, const std::string& field) {
  require_array(j, field);
  if (j.empty()) throw ConfigError(field, "empty matrix");
  const std::size_t cols = require_array(j[0], at(field, 0)).size();
  CMatrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row = at(field, r);
    if (require_array(j[r], row).size() != cols) throw ConfigError(row, "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = read_complex(j[r][c], at(row, c));
  }
  return m;
}

RMatrix read_real_matrix(const Json& j, const std::string& field) {
  const CMatrix m = read_complex_matrix(j, field);
  if (m.imag().cwiseAbs().maxCoeff() != 0.0) throw ConfigError(field, "expected a real matrix");
  return m.real();
}

Json complex_to_json(cplx v) { return Json::array({v.real(), v.imag()}); }

Json vector_to_json(const CVector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

Json matrix_to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<TensorEntry> read_polynomial_entries(const Json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("monomials")) throw ConfigError(field, "expected an object with \"monomials\"");
  const std::string mf = field + ".monomials";
  const Json& monomials = require_array(j["monomials"], mf);
  std::vector<TensorEntry> out;
  for (std::size_t m = 0; m < monomials.size(); ++m) {
    const std::string f = at(mf, m);
    const Json& mono = monomials[m];
    if (!mono.is_object()) throw ConfigError(f, "expected an object");
    for (const char* key : {"kstar", "k", "entries"})
      if (!mono.contains(key)) throw ConfigError(f, std::string("missing \"") + key + "\"");
    const int kstar = mono["kstar"].get<int>();
    const int k = mono["k"].get<int>();
    const Json& entries = require_array(mono["entries"], f + ".entries");
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const std::string ef = at(f + ".entries", e);
      const Json& entry = entries[e];
      if (!entry.is_object()) throw ConfigError(ef, "expected an object");
      TensorEntry t;
      t.star = read_indices(entry.value("multi_index_star", Json::array()), ef + ".multi_index_star");
      t.plain = read_indices(entry.value("multi_index", Json::array()), ef + ".multi_index");
      if (static_cast<int>(t.star.size()) != kstar || static_cast<int>(t.plain.size()) != k)
        throw ConfigError(ef, "index lengths do not match (kstar, k)");
      t.value = {entry.contains("re") ? read_number(entry["re"], ef + ".re") : 0.0,
                 entry.contains("im") ? read_number(entry["im"], ef + ".im") : 0.0};
      out.push_back(std::move(t));
    }
  }
  return out;
}

Json polynomial_to_json(const PolynomialP& p) {
  const MonomialBasis& basis = *p.scalar().basis();
  const int n = static_cast<int>(p.dim());
  std::map<std::pair<int, int>, Json> groups;
  for (Index i = 0; i < basis.size(); ++i) {
    const cplx c = p.scalar().coeffs()(0, i);
    if (c == cplx(0.0)) continue;
    // one representative index tuple carries the whole monomial coefficient
    Json entry;
    Json star = Json::array(), plain = Json::array();
    for (int v = 0; v < 2 * n; ++v)
      for (int r = 0; r < basis.exponent(i)[v]; ++r) (v < n ? star : plain).push_back(v < n ? v : v - n);
    const auto [ks, k] = basis.bidegree(i, n);
    entry["multi_index_star"] = star;
    entry["multi_index"] = plain;
    entry["re"] = c.real();
    entry["im"] = c.imag();
    groups[{ks, k}].push_back(std::move(entry));
  }
  Json monomials = Json::array();
  for (auto& [key, entries] : groups)
    monomials.push_back({{"kstar", key.first}, {"k", key.second}, {"entries", std::move(entries)}});
  return {{"monomials", monomials}};
}

}  // namespace blockspin
