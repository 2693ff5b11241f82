#include "blockspin/scenario.hpp"

#include "blockspin/newton.hpp"
#include "blockspin/random.hpp"
#include "blockspin/series.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>

namespace blockspin {

namespace {

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"woodbury", 1e-11},
      {"qcheck", 1e-11},
      {"edA", 1e-11},
      {"edA.condition_limit", 1e6},
      {"preparation.value", 1e-11},
      {"preparation.gradient", 1e-9},
      {"fps-composition", 1e-10},
      {"crit-representation", 1e-10},
      {"series-equation", 1e-12},
      {"newton", 1e-12},
      {"newton-vs-fps", 1e-7},
      {"newton.composition", 1e-10},
      {"deltaA", 1e-8},
      {"deltaA.quadratic", 1e-13},
      {"deltaA.first-order", 1e-7},
      {"gaussian-detd", 1e-10},
      {"gaussian-quadrature", 1e-3},
      {"lattice", 1e-12},
  };
  return t;
}

const std::map<std::string, int>& default_draws() {
  static const std::map<std::string, int> d = {{"woodbury", 100}, {"qcheck", 100},     {"edA", 25},
                                               {"preparation", 20}, {"deltaA", 20}, {"gaussian-detd", 25}};
  return d;
}

const std::map<std::string, double>& default_fields() {
  // preparation: point scale; newton: series comparison scale;
  // theta, dpsi: delta A sample scales
  static const std::map<std::string, double> f = {
      {"preparation", 1.0}, {"newton", 0.1}, {"theta", 0.3}, {"dpsi", 0.1}};
  return f;
}

void require_keys(const Json& j, const std::string& field, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(field.empty() ? key : field + "." + key, "unknown field");
  }
}

int read_int(const Json& j, const std::string& field, int lo) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  const long long v = j.get<long long>();
  if (v < lo || v > 1000000) throw ConfigError(field, "out of range");
  return static_cast<int>(v);
}

double read_positive(const Json& j, const std::string& field) {
  const double v = read_number(j, field);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be > 0");
  return v;
}

bool read_bool(const Json& j, const std::string& field) {
  if (!j.is_boolean()) throw ConfigError(field, "expected true or false");
  return j.get<bool>();
}

std::string read_string(const Json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

std::vector<int> read_int_list(const Json& j, const std::string& field, int lo) {
  if (!j.is_array()) throw ConfigError(field, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_int(j[i], field + "[" + std::to_string(i) + "]", lo));
  return out;
}

OperatorChoice read_operator(const Json& j, const std::string& field, std::initializer_list<const char*> kinds) {
  require_keys(j, field, {"kind", "matrix", "mass", "symmetric"});
  if (!j.contains("kind")) throw ConfigError(field + ".kind", "missing");
  OperatorChoice c;
  c.kind = read_string(j["kind"], field + ".kind");
  bool known = false;
  for (const char* k : kinds) known = known || c.kind == k;
  if (!known) throw ConfigError(field + ".kind", "unsupported kind \"" + c.kind + "\"");
  if (c.kind == "explicit") {
    if (!j.contains("matrix")) throw ConfigError(field + ".matrix", "missing");
    c.matrix = read_complex_matrix(j["matrix"], field + ".matrix");
  }
  if (j.contains("mass")) c.mass = read_number(j["mass"], field + ".mass");
  if (j.contains("symmetric")) c.symmetric = read_bool(j["symmetric"], field + ".symmetric");
  return c;
}

PolynomialChoice read_polynomial(const Json& j, const std::string& field, const std::filesystem::path& base) {
  require_keys(j, field,
               {"kind", "file", "monomials", "degrees", "scale", "real", "cubic", "quartic", "max_degree"});
  PolynomialChoice p;
  if (!j.contains("kind")) throw ConfigError(field + ".kind", "missing");
  p.kind = read_string(j["kind"], field + ".kind");
  if (p.kind == "file") {
    if (!j.contains("file")) throw ConfigError(field + ".file", "missing");
    const std::filesystem::path path = base / read_string(j["file"], field + ".file");
    p.entries = read_polynomial_entries(load_json_file(path, field + ".file"), field + ".file");
  } else if (p.kind == "inline") {
    p.entries = read_polynomial_entries(j, field);
  } else if (p.kind == "random") {
    if (j.contains("degrees")) p.degrees = read_int_list(j["degrees"], field + ".degrees", 2);
    if (j.contains("scale")) p.scale = read_number(j["scale"], field + ".scale");
    if (j.contains("real")) p.real = read_bool(j["real"], field + ".real");
  } else if (p.kind == "local") {
    if (j.contains("cubic")) p.cubic = read_number(j["cubic"], field + ".cubic");
    if (j.contains("quartic")) p.quartic = read_number(j["quartic"], field + ".quartic");
  } else if (p.kind != "none") {
    throw ConfigError(field + ".kind", "unsupported kind \"" + p.kind + "\"");
  }
  if (j.contains("max_degree")) p.max_degree = read_int(j["max_degree"], field + ".max_degree", 2);
  return p;
}

EChoice read_e(const Json& j, const std::string& field) {
  require_keys(j, field, {"kind", "coefficient", "monomials"});
  EChoice e;
  if (!j.contains("kind")) throw ConfigError(field + ".kind", "missing");
  e.kind = read_string(j["kind"], field + ".kind");
  if (e.kind == "quadratic") {
    if (!j.contains("coefficient")) throw ConfigError(field + ".coefficient", "missing");
    e.coefficient = read_number(j["coefficient"], field + ".coefficient");
  } else if (e.kind == "polynomial") {
    e.entries = read_polynomial_entries(j, field);
  } else if (e.kind != "zero") {
    throw ConfigError(field + ".kind", "unsupported kind \"" + e.kind + "\"");
  }
  return e;
}

template <typename T>
void read_overrides(const Json& j, const std::string& field, std::map<std::string, T>& target,
                    const std::function<T(const Json&, const std::string&)>& read) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string f = field + "." + key;
    if (!target.contains(key)) throw ConfigError(f, "unknown field");
    target[key] = read(value, f);
  }
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "crit-representation", "deltaA", "edA", "fps-composition", "gaussian-detd", "gaussian-quadrature",
      "lattice", "newton-vs-fps", "preparation", "qcheck", "woodbury"};
  return names;
}

ScenarioConfig parse_scenario(const Json& j, const std::filesystem::path& base_dir) {
  require_keys(j, "",
               {"name", "description", "seed", "dims", "lattice", "grams", "b", "fQ", "D", "Q", "Q_minus",
                "polynomial", "E", "max_order", "tolerances", "draws", "fields", "radii", "quadrature", "suites"});
  ScenarioConfig c;
  c.source = j;
  c.tolerances = default_tolerances();
  c.draws = default_draws();
  c.fields = default_fields();

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative 64-bit integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("dims") == j.contains("lattice")) throw ConfigError("dims", "give exactly one of dims and lattice");
  if (j.contains("dims")) {
    const std::vector<int> d = read_int_list(j["dims"], "dims", 1);
    if (d.size() != 3) throw ConfigError("dims", "expected [dim H-, dim H, dim H+]");
    c.dims = std::array<Index, 3>{d[0], d[1], d[2]};
  } else {
    const Json& l = j["lattice"];
    require_keys(l, "lattice", {"extents", "block", "profile"});
    if (!l.contains("extents") || !l.contains("block")) throw ConfigError("lattice", "needs extents and block");
    LatticeChoice lc;
    lc.extents = read_int_list(l["extents"], "lattice.extents", 1);
    lc.scheme = BlockScheme::uniform(read_int_list(l["block"], "lattice.block", 1));
    if (l.contains("profile")) {
      if (!l["profile"].is_array()) throw ConfigError("lattice.profile", "expected an array");
      for (std::size_t i = 0; i < l["profile"].size(); ++i)
        lc.scheme.profile.push_back(read_number(l["profile"][i], "lattice.profile[" + std::to_string(i) + "]"));
    }
    c.lattice = lc;
  }
  if (j.contains("grams")) {
    c.grams = read_string(j["grams"], "grams");
    if (c.grams != "identity" && c.grams != "random") throw ConfigError("grams", "expected identity or random");
    if (c.lattice && c.grams != "identity") throw ConfigError("grams", "lattice spaces carry the l2 form");
  }
  if (j.contains("b")) c.b = read_positive(j["b"], "b");
  if (c.lattice) {
    c.d = OperatorChoice{"laplacian"};
    c.q = OperatorChoice{"averaging"};
    c.q_minus = OperatorChoice{"averaging"};
  }
  if (j.contains("fQ")) c.fq = read_operator(j["fQ"], "fQ", {"identity", "random", "explicit", "recursion"});
  if (j.contains("D")) c.d = read_operator(j["D"], "D", {"identity", "random", "explicit", "laplacian"});
  if (j.contains("Q")) c.q = read_operator(j["Q"], "Q", {"random", "explicit", "averaging"});
  if (j.contains("Q_minus")) c.q_minus = read_operator(j["Q_minus"], "Q_minus", {"random", "explicit", "averaging"});
  for (const auto& [name, op] : {std::pair{"D", &c.d}, std::pair{"Q", &c.q}, std::pair{"Q_minus", &c.q_minus}})
    if (!c.lattice && (op->kind == "laplacian" || op->kind == "averaging"))
      throw ConfigError(std::string(name) + ".kind", "\"" + op->kind + "\" needs a lattice scenario");
  if (j.contains("polynomial")) c.polynomial = read_polynomial(j["polynomial"], "polynomial", base_dir);
  if (j.contains("E")) c.e = read_e(j["E"], "E");
  if (j.contains("max_order")) c.max_order = read_int(j["max_order"], "max_order", 1);

  const std::function<double(const Json&, const std::string&)> positive = read_positive;
  const std::function<int(const Json&, const std::string&)> count = [](const Json& v, const std::string& f) {
    return read_int(v, f, 1);
  };
  if (j.contains("tolerances")) read_overrides(j["tolerances"], "tolerances", c.tolerances, positive);
  if (j.contains("draws")) read_overrides(j["draws"], "draws", c.draws, count);
  if (j.contains("fields")) read_overrides(j["fields"], "fields", c.fields, positive);
  if (j.contains("radii")) {
    require_keys(j["radii"], "radii", {"psi", "theta"});
    if (j["radii"].contains("psi")) c.quadrature.radius_psi = read_positive(j["radii"]["psi"], "radii.psi");
    if (j["radii"].contains("theta")) c.quadrature.radius_theta = read_positive(j["radii"]["theta"], "radii.theta");
  }
  if (j.contains("quadrature")) {
    const Json& q = j["quadrature"];
    require_keys(q, "quadrature", {"nodes_per_axis", "check_nodes", "theta_cutoff_sigmas", "g"});
    if (q.contains("nodes_per_axis")) c.quadrature.nodes = read_int(q["nodes_per_axis"], "quadrature.nodes_per_axis", 2);
    if (q.contains("check_nodes")) c.quadrature.check_nodes = read_int(q["check_nodes"], "quadrature.check_nodes", 2);
    if (q.contains("theta_cutoff_sigmas"))
      c.quadrature.theta_cutoff_sigmas = read_positive(q["theta_cutoff_sigmas"], "quadrature.theta_cutoff_sigmas");
    if (q.contains("g")) c.quadrature_g = read_number(q["g"], "quadrature.g");
  }
  c.quadrature.tolerance = c.tol("gaussian-quadrature");
  if (j.contains("suites")) {
    if (!j["suites"].is_array()) throw ConfigError("suites", "expected an array");
    for (std::size_t i = 0; i < j["suites"].size(); ++i) {
      const std::string f = "suites[" + std::to_string(i) + "]";
      const std::string name = read_string(j["suites"][i], f);
      if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
        throw ConfigError(f, "unknown suite \"" + name + "\"");
      c.suites.push_back(name);
    }
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  const Json j = load_json_file(path, "config");
  return parse_scenario(j, path.parent_path());
}

// ---------------------------------------------------------------------------
// Building the scenario data.

namespace {

Space random_space(CounterRng& rng, const std::string& name, Index n) {
  RMatrix g = spd_matrix(rng, n) / static_cast<double>(n) + RMatrix::Identity(n, n);
  g = 0.5 * (g + g.transpose());
  return make_space(name, g);
}

Operator explicit_operator(const OperatorChoice& c, const Space& dom, const Space& cod, const std::string& field) {
  if (c.matrix.rows() != cod->dim() || c.matrix.cols() != dom->dim())
    throw ConfigError(field + ".matrix", "expected " + std::to_string(cod->dim()) + " x " +
                                             std::to_string(dom->dim()) + " entries");
  return Operator(dom, cod, c.matrix);
}

PolynomialP build_polynomial(const PolynomialChoice& c, const Space& h_minus, CounterRng& rng) {
  const auto max_entry_degree = [](const std::vector<TensorEntry>& entries) {
    int m = 2;
    for (const TensorEntry& e : entries) m = std::max(m, static_cast<int>(e.star.size() + e.plain.size()));
    return m;
  };
  try {
    if (c.kind == "none") return PolynomialP(h_minus, std::max(2, c.max_degree));
    if (c.kind == "file" || c.kind == "inline")
      return PolynomialP::from_entries(h_minus, std::max(c.max_degree, max_entry_degree(c.entries)), c.entries);
    if (c.kind == "random") return random_polynomial(rng, h_minus, c.degrees, c.scale, c.real);
    // local
    std::vector<TensorEntry> entries;
    for (int x = 0; x < static_cast<int>(h_minus->dim()); ++x) {
      if (c.cubic != 0.0) entries.push_back({{x}, {x, x}, c.cubic});
      if (c.quartic != 0.0) entries.push_back({{x, x}, {x, x}, c.quartic});
    }
    const int top = c.quartic != 0.0 ? 4 : 3;
    return PolynomialP::from_entries(h_minus, std::max(c.max_degree, top), entries);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("polynomial", e.what());
  }
}

FieldFunction build_e(const EChoice& c, const Space& h) {
  if (c.kind == "zero") return {};
  if (c.kind == "quadratic") {
    const double k = c.coefficient;
    return [k](const FieldVector& a, const FieldVector& b) { return k * pairing(a, b); };
  }
  int top = 2;
  for (const TensorEntry& e : c.entries) top = std::max(top, static_cast<int>(e.star.size() + e.plain.size()));
  PolynomialP p;
  try {
    p = PolynomialP::from_entries(h, top, c.entries);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("E", e.what());
  }
  return [p](const FieldVector& a, const FieldVector& b) { return p.value(a.values(), b.values()); };
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& c) {
  CounterRng rng(c.seed, "scenario");
  Scenario out;
  RGData d;
  d.b = c.b;
  if (c.lattice) {
    TorusLattice lat(c.lattice->extents);
    std::vector<TowerLevel> tower;
    try {
      tower = build_tower(lat, c.lattice->scheme, 2);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("lattice", e.what());
    }
    d.h_minus = tower[0].space;
    d.h = tower[1].space;
    d.h_plus = tower[2].space;
    if (c.q_minus.kind == "averaging") d.q_minus = tower[1].step;
    if (c.q.kind == "averaging") d.q = tower[2].step;
    out.lattice = lat;
  } else {
    const auto [nm, n, np] = *c.dims;
    if (c.grams == "random") {
      CounterRng g = rng.substream("grams");
      d.h_minus = random_space(g, "H-", nm);
      d.h = random_space(g, "H", n);
      d.h_plus = random_space(g, "H+", np);
    } else {
      d.h_minus = make_space("H-", nm);
      d.h = make_space("H", n);
      d.h_plus = make_space("H+", np);
    }
  }
  const auto averaging_or = [&](const OperatorChoice& ch, const Space& dom, const Space& cod, const std::string& f,
                                Operator& target) {
    if (ch.kind == "averaging") return;
    if (ch.kind == "explicit") {
      target = explicit_operator(ch, dom, cod, f);
    } else {
      CounterRng r = rng.substream(f);
      target = Operator::real(dom, cod, normal_matrix(r, cod->dim(), dom->dim()));
    }
  };
  averaging_or(c.q_minus, d.h_minus, d.h, "Q_minus", d.q_minus);
  averaging_or(c.q, d.h, d.h_plus, "Q", d.q);

  if (c.fq.kind == "identity") {
    d.fq = Operator::identity(d.h);
  } else if (c.fq.kind == "explicit") {
    d.fq = explicit_operator(c.fq, d.h, d.h, "fQ");
  } else if (c.fq.kind == "random") {
    CounterRng r = rng.substream("fQ");
    d.fq = Operator::real(d.h, d.h, d.h->gram_inverse() * spd_matrix(r, d.h->dim()));
  } else {
    // the next-scale kernel of a previous step with averaging Q- and unit fQ
    RGData prev;
    prev.h_minus = d.h_minus;
    prev.h = d.h_minus;
    prev.h_plus = d.h;
    prev.b = d.b;
    prev.q = d.q_minus;
    prev.fq = Operator::identity(d.h_minus);
    try {
      const Operator raw = qcheck_recursion(prev);
      // symmetrize away rounding so fQ passes the exact symmetry check
      d.fq = (raw + adjoint(raw)) * 0.5;
    } catch (const NearSingular& e) {
      throw ConfigError("fQ", e.what());
    }
  }

  if (c.d.kind == "identity") {
    d.d = Operator::identity(d.h_minus);
  } else if (c.d.kind == "explicit") {
    d.d = explicit_operator(c.d, d.h_minus, d.h_minus, "D");
  } else if (c.d.kind == "laplacian") {
    d.d = lattice_laplacian(*out.lattice, d.h_minus, c.d.mass);
  } else {
    CounterRng r = rng.substream("D");
    RMatrix m = d.h_minus->gram_inverse() * spd_matrix(r, d.h_minus->dim());
    if (!c.d.symmetric) m += 0.3 * normal_matrix(r, d.h_minus->dim(), d.h_minus->dim());
    d.d = Operator::real(d.h_minus, d.h_minus, m);
  }

  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("fQ", e.what());
  }
  CounterRng prng = rng.substream("polynomial");
  PolynomialP p = build_polynomial(c.polynomial, d.h_minus, prng);
  const Space h = d.h;
  try {
    out.spec = ActionSpec::make(std::move(d), std::move(p));
  } catch (const NearSingular& e) {
    throw ConfigError("scenario", e.what());
  }
  out.e = build_e(c.e, h);
  return out;
}

// ---------------------------------------------------------------------------
// Suites.

namespace {

using SuiteFn = std::function<void(const ScenarioConfig&, const Scenario&, SuiteResult&)>;

double max_of(double a, double b) { return std::isnan(b) ? b : std::max(a, b); }

void record_conditions(const Scenario& s, SuiteResult& r) {
  for (const auto& [k, v] : s.spec.k.condition) r.conditions[k] = v;
}

EnsembleOptions ensemble_like(const ScenarioConfig& c, const Scenario& s, CounterRng& rng) {
  EnsembleOptions o;
  o.dims = {s.spec.rg.h_minus->dim(), s.spec.rg.h->dim(), s.spec.rg.h_plus->dim()};
  o.random_grams = c.grams == "random";
  o.b = 0.5 + 2.0 * rng.uniform();
  return o;
}

NewtonOptions newton_options(const ScenarioConfig& c) {
  NewtonOptions o;
  o.tol = c.tol("newton");
  return o;
}

void suite_woodbury(const ScenarioConfig& c, const Scenario&, SuiteResult& r) {
  CounterRng rng(c.seed, "suite.woodbury");
  double left = 0.0, right = 0.0, worst_cond = 0.0;
  for (int k = 0; k < c.draws.at("woodbury"); ++k) {
    const Index nv = rng.uniform_int(1, 12), nw = rng.uniform_int(1, 12);
    const Space v = make_space("V", nv), w = make_space("W", nw);
    const Operator f = Operator::real(v, v, spd_matrix(rng, nv));
    const Operator g = Operator::real(w, w, spd_matrix(rng, nw) / static_cast<double>(nw));
    const Operator q = Operator::real(v, w, normal_matrix(rng, nw, nv));
    const Operator qs = adjoint(q);
    const CMatrix id = CMatrix::Identity(nw, nw);
    const CMatrix finv = inverse(f, "f invertible").matrix();
    const CMatrix lf = id + g.matrix() * q.matrix() * finv * qs.matrix();
    const CMatrix rf = id + q.matrix() * finv * qs.matrix() * g.matrix();
    left = max_of(left, spectral_norm(CMatrix(woodbury_left(f, g, q, qs).matrix() * lf - id)));
    right = max_of(right, spectral_norm(CMatrix(woodbury_right(f, g, q, qs).matrix() * rf - id)));
    worst_cond = std::max({worst_cond, condition_number(lf), condition_number(rf)});
  }
  r.checks["left"] = upper_bound_check(left, c.tol("woodbury"));
  r.checks["right"] = upper_bound_check(right, c.tol("woodbury"));
  r.conditions["1 + g q f^-1 q* (max over draws)"] = worst_cond;
}

void suite_qcheck(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  CounterRng rng(c.seed, "suite.qcheck");
  double worst = 0.0;
  for (int k = 0; k < c.draws.at("qcheck"); ++k) {
    const EnsembleOptions o = ensemble_like(c, s, rng);
    const RGData d = random_rgdata(rng, o);
    worst = max_of(worst, relative_residual(qcheck_recursion(d).matrix(), qcheck_alt(d).matrix()));
  }
  r.checks["draws"] = upper_bound_check(worst, c.tol("qcheck"));
  const RGData& d = s.spec.rg;
  r.checks["scenario"] =
      upper_bound_check(relative_residual(qcheck_recursion(d).matrix(), qcheck_alt(d).matrix()), c.tol("qcheck"));
  record_conditions(s, r);
}

void suite_edA(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  CounterRng rng(c.seed, "suite.edA");
  const double limit = c.tol("edA.condition_limit");
  const int wanted = c.draws.at("edA");
  std::map<std::string, double> worst;
  int used = 0, rejected = 0;
  while (used < wanted) {
    if (rejected > 40 * wanted) {
      r.error = "too many draws rejected by the condition gate";
      break;
    }
    EnsembleOptions o = ensemble_like(c, s, rng);
    o.symmetric_d = true;
    const RGData d = random_rgdata(rng, o);
    const Index nm = d.h_minus->dim();
    const CMatrix t = (normal_matrix(rng, nm, nm) + 3.0 * RMatrix::Identity(nm, nm)).cast<cplx>();
    std::vector<NamedResidual> res;
    try {
      const KernelSet k = compute_kernels(d, limit);
      if (condition_number(d.d.matrix()) > limit || condition_number(t) > limit) throw NearSingular("gate", 0, limit);
      res = identity_suite_edA(d, limit, &t);
      (void)k;
    } catch (const NearSingular&) {
      ++rejected;
      continue;
    }
    for (const NamedResidual& n : res) worst[n.name] = max_of(worst[n.name], n.value);
    ++used;
  }
  for (const auto& [name, v] : worst) r.checks[name] = upper_bound_check(v, c.tol("edA"));
  r.info["draws used"] = std::to_string(used);
  r.info["draws rejected"] = std::to_string(rejected);
  try {
    for (const NamedResidual& n : identity_suite_edA(s.spec.rg))
      r.checks["scenario." + n.name] = upper_bound_check(n.value, c.tol("edA"));
  } catch (const NearSingular& e) {
    r.info["scenario"] = std::string("skipped: ") + e.what();
  }
  record_conditions(s, r);
}

void suite_preparation(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  CounterRng rng(c.seed, "suite.preparation");
  const RGData& d = s.spec.rg;
  const double scale = c.fields.at("preparation");
  double value = 0.0, gradient = 0.0;
  for (int k = 0; k < c.draws.at("preparation"); ++k) {
    const auto draw = [&](const Space& sp) { return FieldVector(sp, complex_normal(rng, sp->dim()) * scale); };
    const FieldVector ts = draw(d.h_plus), t = draw(d.h_plus), ps = draw(d.h_minus), p = draw(d.h_minus);
    const PreparationResidual res = preparation_check(s.spec, ts, t, ps, p);
    value = max_of(value, res.value);
    gradient = max_of(gradient, res.gradient);
  }
  r.checks["value"] = upper_bound_check(value, c.tol("preparation.value"));
  r.checks["gradient"] = upper_bound_check(gradient, c.tol("preparation.gradient"));
  record_conditions(s, r);
}

void suite_fps_composition(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  const SeriesCheck comp = verify_composition(s.spec, c.max_order);
  r.checks["composition"] = upper_bound_check(comp.residual, c.tol("fps-composition"));
  for (const NamedResidual& n : comp.by_order) r.info["composition " + n.name] = format_number(n.value);
  const SeriesPair bg = fps_background(s.spec, c.max_order);
  const SeriesPair cr = fps_critical(s.spec, bg, c.max_order);
  const SeriesPair ns = fps_nextscale(s.spec, c.max_order);
  const double eq = c.tol("series-equation");
  r.checks["background-equation"] = upper_bound_check(background_equation_residual(s.spec, bg), eq);
  r.checks["critical-equation"] = upper_bound_check(critical_equation_residual(s.spec, bg, cr), eq);
  r.checks["nextscale-equation"] = upper_bound_check(nextscale_equation_residual(s.spec, ns), eq);
  record_conditions(s, r);
}

void suite_crit_representation(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  const SeriesCheck rep = verify_crit_representation(s.spec, c.max_order);
  r.checks["representation"] = upper_bound_check(rep.residual, c.tol("crit-representation"));
  for (const NamedResidual& n : rep.by_order) r.info["representation " + n.name] = format_number(n.value);
  // Without a quadratic part of P the linear coefficient is b C^(*) Q* in
  // both of its forms.
  if (s.spec.p.is_zero() || s.spec.p.low_degree() >= 3) {
    const ActionSpec& a = s.spec;
    const RGData& d = a.rg;
    const SeriesPair bg = fps_background(a, 1);
    const SeriesPair cr = fps_critical(a, bg, 1);
    const Index np = d.h_plus->dim();
    const Operator tail = a.qcheck_minus_adj * a.k.qcheck;
    const CMatrix direct = (a.k.c * a.q_adj).matrix() * d.b;
    const CMatrix direct_star = (a.k.c_adj * a.q_adj).matrix() * d.b;
    const CMatrix split = (a.k.coupling_inv * (a.q_adj * d.b + d.fq * d.q_minus * a.k.scheck * tail)).matrix();
    const CMatrix split_star =
        (a.k.coupling_inv * (a.q_adj * d.b + d.fq * d.q_minus * a.k.scheck_adj * tail)).matrix();
    const CMatrix lin = cr.unstarred.poly.linear_part().rightCols(np);
    const CMatrix lin_star = cr.starred.poly.linear_part().leftCols(np);
    const double res = std::max({relative_residual(direct, split), relative_residual(direct_star, split_star),
                                 relative_residual(direct, lin), relative_residual(direct_star, lin_star)});
    r.checks["linear-coefficient"] = upper_bound_check(res, c.tol("crit-representation"));
  }
  record_conditions(s, r);
}

double field_gap(const FieldVector& a, const FieldVector& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

void suite_newton_vs_fps(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  CounterRng rng(c.seed, "suite.newton-vs-fps");
  const ActionSpec& a = s.spec;
  const RGData& d = a.rg;
  const NewtonOptions opt = newton_options(c);
  const int order = c.max_order;
  const SeriesPair bg = fps_background(a, order);
  const SeriesPair cr = fps_critical(a, bg, order);
  const double scale = c.fields.at("newton");
  const CVector ds = complex_normal(rng, d.h->dim()).normalized(), dv = complex_normal(rng, d.h->dim()).normalized();
  const CVector ts = complex_normal(rng, d.h_plus->dim()).normalized();
  const CVector tv = complex_normal(rng, d.h_plus->dim()).normalized();

  const auto bg_gap = [&](double f) {
    const FieldVector ps(d.h, ds * f), p(d.h, dv * f);
    const FieldPair n = newton_background(a, ps, p, opt);
    const auto [es, e] = bg.evaluate(ps, p);
    return std::max(field_gap(n.star, es), field_gap(n.plain, e));
  };
  const auto cr_gap = [&](double f) {
    const FieldVector t_star(d.h_plus, ts * f), t(d.h_plus, tv * f);
    const CriticalPoint n = newton_critical(a, t_star, t, opt);
    const auto [es, e] = cr.evaluate(t_star, t);
    return std::max(field_gap(n.psi_star, es), field_gap(n.psi, e));
  };
  const double lo = std::pow(2.0, order), hi = std::pow(2.0, order + 2);
  for (const auto& [name, gap] : {std::pair<std::string, std::function<double(double)>>{"background", bg_gap},
                                  std::pair<std::string, std::function<double(double)>>{"critical", cr_gap}}) {
    const double g1 = gap(scale), g2 = gap(2.0 * scale);
    r.checks[name + ".agreement"] = upper_bound_check(g1, c.tol("newton-vs-fps"));
    if (g2 <= 1e-13) {
      r.info[name + ".ratio"] = "series exact to rounding at this order";
    } else {
      r.checks[name + ".ratio"] = range_check(g2 / g1, lo, hi);
    }
  }
  // composition rule at the level of solutions
  const FieldVector t_star(d.h_plus, ts * scale), t(d.h_plus, tv * scale);
  const CriticalPoint cp = newton_critical(a, t_star, t, opt);
  const FieldPair ns = newton_nextscale(a, t_star, t, opt);
  r.checks["nextscale.composition"] = upper_bound_check(
      std::max(field_gap(cp.phi, ns.plain), field_gap(cp.phi_star, ns.star)), c.tol("newton.composition"));
  record_conditions(s, r);
}

void suite_delta_a(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  CounterRng rng(c.seed, "suite.deltaA");
  const ActionSpec& a = s.spec;
  const RGData& d = a.rg;
  const NewtonOptions opt = newton_options(c);
  const ActionSpec free = ActionSpec::make(d, PolynomialP(d.h_minus, 2));
  const double ts_scale = c.fields.at("theta"), dp_scale = c.fields.at("dpsi");
  const auto rel = [](cplx x, cplx y) { return std::abs(x - y) / std::max(1.0, std::abs(x)); };
  double worst = 0.0, quadratic = 0.0, first = 0.0, zero = 0.0;
  for (int k = 0; k < c.draws.at("deltaA"); ++k) {
    const FieldVector ts(d.h_plus, complex_normal(rng, d.h_plus->dim()) * ts_scale);
    const FieldVector t(d.h_plus, complex_normal(rng, d.h_plus->dim()) * ts_scale);
    const FieldVector dps(d.h, complex_normal(rng, d.h->dim()) * dp_scale);
    const FieldVector dp(d.h, complex_normal(rng, d.h->dim()) * dp_scale);
    const CriticalPoint cp = newton_critical(a, ts, t, opt);
    const BackgroundFn bg = newton_background_fn(a, cp, opt);
    const cplx direct = delta_A_direct(a, bg, ts, t, cp.psi_star, cp.psi, dps, dp);
    const cplx formula = delta_A_formula(a, newton_delta_plus_fn(a, cp, opt), dps, dp, 24);
    worst = max_of(worst, rel(direct, formula));

    const CriticalPoint cp0 = newton_critical(free, ts, t, opt);
    const cplx exact = pairing(dps, free.c_inverse * dp);
    const cplx direct0 =
        delta_A_direct(free, newton_background_fn(free, cp0, opt), ts, t, cp0.psi_star, cp0.psi, dps, dp);
    const cplx formula0 = delta_A_formula(free, newton_delta_plus_fn(free, cp0, opt), dps, dp, 24);
    quadratic = max_of(quadratic, std::max(rel(exact, direct0), rel(exact, formula0)));

    if (k < 5) {
      const FieldVector zv = FieldVector::zero(d.h);
      zero = max_of(zero, std::abs(delta_A_direct(a, bg, ts, t, cp.psi_star, cp.psi, zv, zv)));
      const double eps = 1e-4;
      const cplx up = delta_A_direct(a, bg, ts, t, cp.psi_star, cp.psi, dps * eps, dp * eps);
      const cplx down = delta_A_direct(a, bg, ts, t, cp.psi_star, cp.psi, dps * -eps, dp * -eps);
      first = max_of(first, std::abs((up - down) / (2.0 * eps)));
    }
  }
  r.checks["direct-vs-formula"] = upper_bound_check(worst, c.tol("deltaA"));
  r.checks["quadratic-limit"] = upper_bound_check(quadratic, c.tol("deltaA.quadratic"));
  r.checks["first-order"] = upper_bound_check(first, c.tol("deltaA.first-order"));
  r.checks["at-critical"] = upper_bound_check(zero, c.tol("deltaA.quadratic"));
  record_conditions(s, r);
}

void suite_gaussian_detd(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  CounterRng rng(c.seed, "suite.gaussian-detd");
  double worst = 0.0;
  for (int k = 0; k < c.draws.at("gaussian-detd"); ++k) {
    EnsembleOptions o = ensemble_like(c, s, rng);
    o.symmetric_d = true;
    worst = max_of(worst, prop_d_gaussian_check(random_rgdata(rng, o)).residual);
  }
  r.checks["draws"] = upper_bound_check(worst, c.tol("gaussian-detd"));
  try {
    const DeterminantCheck dc = prop_d_gaussian_check(s.spec.rg);
    r.checks["scenario"] = upper_bound_check(dc.residual, c.tol("gaussian-detd"));
    r.info["scenario lhs"] = format_number(dc.lhs.real());
    r.info["scenario rhs"] = format_number(dc.rhs.real());
  } catch (const std::invalid_argument& e) {
    r.info["scenario"] = std::string("skipped: ") + e.what();
  }
  record_conditions(s, r);
}

void suite_gaussian_quadrature(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  const RGData& d = s.spec.rg;
  ActionSpec reduced;
  const ActionSpec* spec = &s.spec;
  FieldFunction e = s.e;
  if (d.h->dim() != 1 || d.h_plus->dim() != 1) {
    RGData one;
    one.h_minus = make_space("H-", 1);
    one.h = make_space("H", 1);
    one.h_plus = make_space("H+", 1);
    const RMatrix unit = RMatrix::Ones(1, 1);
    one.q_minus = Operator::real(one.h_minus, one.h, unit);
    one.q = Operator::real(one.h, one.h_plus, unit);
    one.fq = Operator::real(one.h, one.h, unit);
    one.d = Operator::real(one.h_minus, one.h_minus, unit);
    one.b = 1.0;
    PolynomialP p = c.quadrature_g == 0.0
                        ? PolynomialP(one.h_minus, 3)
                        : PolynomialP::from_entries(one.h_minus, 3, {{{0}, {0, 0}, c.quadrature_g}});
    reduced = ActionSpec::make(std::move(one), std::move(p));
    spec = &reduced;
    e = {};
    r.info["model"] = "scalar reduction with P = g phi* phi^2, g = " + format_number(c.quadrature_g);
  }
  QuadratureConfig q = c.quadrature;
  const int check = q.check_nodes;
  q.check_nodes = 0;
  const NewtonOptions opt = newton_options(c);
  const QuadratureCheck main = prop_d_quadrature_check(*spec, q, e, opt);
  const double tol = c.tol("gaussian-quadrature");
  r.checks["relative-difference"] = upper_bound_check(main.relative_difference, tol);
  r.info["lhs"] = format_number(main.lhs.real()) + " " + format_number(main.lhs.imag());
  r.info["rhs"] = format_number(main.rhs.real()) + " " + format_number(main.rhs.imag());
  r.info["small-field"] = format_number(main.small_field.real());
  r.info["large-field"] = format_number(main.large_field.real());
  r.info["outer radius"] = format_number(main.outer_radius);
  if (check > 0) {
    q.nodes = check;
    const QuadratureCheck fine = prop_d_quadrature_check(*spec, q, e, opt);
    r.checks["self-consistency.lhs"] = upper_bound_check(std::abs(main.lhs - fine.lhs) / std::abs(fine.lhs), tol / 2);
    r.checks["self-consistency.rhs"] = upper_bound_check(std::abs(main.rhs - fine.rhs) / std::abs(fine.rhs), tol / 2);
  }
  for (const auto& [k, v] : spec->k.condition) r.conditions[k] = v;
}

void suite_lattice(const ScenarioConfig& c, const Scenario& s, SuiteResult& r) {
  const TorusLattice lat = s.lattice ? *s.lattice : TorusLattice({4, 4});
  const BlockScheme scheme = c.lattice ? c.lattice->scheme : BlockScheme::uniform({2, 2});
  if (!s.lattice) r.info["lattice"] = "4 x 4 torus with 2 x 2 blocks (the scenario is given by dims)";
  const std::vector<TowerLevel> tower = build_tower(lat, scheme, 2);
  const double tol = c.tol("lattice");
  CounterRng rng(c.seed, "suite.lattice");

  double constant = 0.0, translation = 0.0, adjoint_gap = 0.0, rank_gap = 0.0;
  for (int level = 1; level <= 2; ++level) {
    const Operator& q = tower[level].step;
    const TorusLattice& fine = tower[level - 1].lattice;
    const TorusLattice& coarse = tower[level].lattice;
    const CVector ones = q.matrix() * CVector::Ones(fine.points());
    constant = std::max(constant, (ones - CVector::Ones(ones.size())).cwiseAbs().maxCoeff());
    const CVector psi = complex_normal(rng, fine.points());
    for (int axis = 0; axis < fine.axes(); ++axis) {
      const CVector lhs = q.matrix() * translate(fine, psi, axis, scheme.block[axis]);
      const CVector rhs = translate(coarse, CVector(q.matrix() * psi), axis, 1);
      translation = std::max(translation, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    const FieldVector u(tower[level - 1].space, psi);
    const FieldVector v(tower[level].space, complex_normal(rng, coarse.points()));
    const cplx a = pairing(q * u, v), b = pairing(u, adjoint(q) * v);
    adjoint_gap = std::max(adjoint_gap, std::abs(a - b) / std::max(1.0, std::abs(a)));
    Eigen::FullPivLU<CMatrix> lu(q.matrix());
    rank_gap = std::max(rank_gap, std::abs(static_cast<double>(lu.rank() - coarse.points())));
  }
  r.checks["constant-field"] = upper_bound_check(constant, tol);
  r.checks["translation"] = upper_bound_check(translation, tol);
  r.checks["adjoint"] = upper_bound_check(adjoint_gap, tol);
  r.checks["rank"] = upper_bound_check(rank_gap, 0.0);

  // two steps of averaging = one step with the squared block
  BlockScheme squared = scheme;
  for (int& b : squared.block) b *= b;
  squared.profile.clear();
  if (scheme.profile.empty()) {
    const CMatrix two = compose_averaging(tower[2].step, tower[1].step).matrix();
    const CMatrix one = averaging_operator(lat, squared).matrix();
    r.checks["composition"] = upper_bound_check((two - one).cwiseAbs().maxCoeff(), tol);
  } else {
    r.info["composition"] = "skipped: weighted profile";
  }
}

const std::map<std::string, SuiteFn>& suites() {
  static const std::map<std::string, SuiteFn> m = {
      {"woodbury", suite_woodbury},
      {"qcheck", suite_qcheck},
      {"edA", suite_edA},
      {"preparation", suite_preparation},
      {"fps-composition", suite_fps_composition},
      {"crit-representation", suite_crit_representation},
      {"newton-vs-fps", suite_newton_vs_fps},
      {"deltaA", suite_delta_a},
      {"gaussian-detd", suite_gaussian_detd},
      {"gaussian-quadrature", suite_gaussian_quadrature},
      {"lattice", suite_lattice},
  };
  return m;
}

}  // namespace

Report run_scenario(const ScenarioConfig& config, const std::vector<std::string>& only) {
  const std::vector<std::string>& requested = only.empty() ? config.suites : only;
  std::set<std::string> names;
  for (const std::string& n : requested) {
    if (!suites().contains(n)) throw ConfigError("suite", "unknown suite \"" + n + "\"");
    names.insert(n);
  }
  Report report;
  report.config = config.source;
  // built even without suites so a malformed scenario is always reported
  const Scenario scenario = build_scenario(config);
  for (const std::string& name : names) {
    SuiteResult result;
    const auto start = std::chrono::steady_clock::now();
    try {
      suites().at(name)(config, scenario, result);
    } catch (const std::exception& e) {
      result.error = e.what();
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.suites.emplace(name, std::move(result));
  }
  return report;
}

}  // namespace blockspin
