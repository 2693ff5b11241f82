// blockspin: run verification scenarios and solve field equations pointwise.
//
//   blockspin verify --config F [--suite NAME]... [--format json|text] [--out FILE] [--timings]
//   blockspin solve-background --config F --point P     (P: {"psi_star": [...], "psi": [...]})
//   blockspin solve-critical --config F --point P       (P: {"theta_star": [...], "theta": [...]})
//   blockspin kernels --config F [--dump]
//
// Exit codes: 0 pass, 1 check failure, 2 config or runtime error.

#include "blockspin/newton.hpp"
#include "blockspin/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace blockspin;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

FieldVector read_field(const Json& point, const char* key, const Space& space) {
  if (!point.contains(key)) throw ConfigError(std::string("point.") + key, "missing");
  const CVector v = read_complex_vector(point[key], std::string("point.") + key);
  if (v.size() != space->dim())
    throw ConfigError(std::string("point.") + key, "expected " + std::to_string(space->dim()) + " entries");
  return FieldVector(space, v);
}

void write_output(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

Json kernels_json(const ActionSpec& spec, bool dump) {
  Json j;
  Json cond = Json::object();
  for (const auto& [k, v] : spec.k.condition) cond[k] = format_number(v);
  j["conditions"] = cond;
  j["dims"] = {spec.rg.h_minus->dim(), spec.rg.h->dim(), spec.rg.h_plus->dim()};
  Json sym = Json::object();
  for (const NamedResidual& n : kernel_symmetry(spec.k)) sym[n.name] = format_number(n.value);
  j["symmetry_defects"] = sym;
  if (dump) {
    j["Qcheck"] = matrix_to_json(spec.k.qcheck.matrix());
    j["S"] = matrix_to_json(spec.k.s.matrix());
    j["Scheck"] = matrix_to_json(spec.k.scheck.matrix());
    j["Delta"] = matrix_to_json(spec.k.delta.matrix());
    j["C"] = matrix_to_json(spec.k.c.matrix());
    j["Deltacheck"] = matrix_to_json(delta_check(spec.k).matrix());
    j["P"] = polynomial_to_json(spec.p);
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-spin renormalization step: identities and field equations"};
  app.require_subcommand(1);

  std::string config, out, format = "json", point;
  std::vector<std::string> only;
  bool timings = false, dump = false;

  CLI::App* verify = app.add_subcommand("verify", "Run the verification suites of a scenario");
  verify->add_option("--config", config, "Scenario file")->required();
  verify->add_option("--suite", only, "Run only this suite (repeatable)");
  verify->add_option("--format", format, "json or text");
  verify->add_option("--out", out, "Write the report here instead of stdout");
  verify->add_flag("--timings", timings, "Include per-suite wall times (breaks byte-identity)");

  CLI::App* background = app.add_subcommand("solve-background", "Newton solution of the background equations");
  CLI::App* critical = app.add_subcommand("solve-critical", "Newton solution of the critical field equations");
  for (CLI::App* s : {background, critical}) {
    s->add_option("--config", config, "Scenario file")->required();
    s->add_option("--point", point, "JSON file with the input fields")->required();
    s->add_option("--out", out, "Write the result here instead of stdout");
  }

  CLI::App* kernels = app.add_subcommand("kernels", "Derived kernels and their condition numbers");
  kernels->add_option("--config", config, "Scenario file")->required();
  kernels->add_flag("--dump", dump, "Include the kernel matrices and P");
  kernels->add_option("--out", out, "Write the result here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    const ScenarioConfig cfg = load_scenario(config);
    if (verify->parsed()) {
      const ReportFormat fmt = parse_format(format);
      const Report report = run_scenario(cfg, only);
      write_output(emit_report(report, fmt, timings), out);
      return report.passed() ? 0 : kExitFail;
    }
    const Scenario scenario = build_scenario(cfg);
    const ActionSpec& spec = scenario.spec;
    Json result;
    if (kernels->parsed()) {
      result = kernels_json(spec, dump);
    } else {
      const Json p = load_json_file(point, "point");
      if (background->parsed()) {
        const FieldPair bg =
            newton_background(spec, read_field(p, "psi_star", spec.rg.h), read_field(p, "psi", spec.rg.h));
        result["phi_star"] = vector_to_json(bg.star.values());
        result["phi"] = vector_to_json(bg.plain.values());
        result["iterations"] = bg.iterations;
        result["residual"] = format_number(bg.residual);
      } else {
        const CriticalPoint cp = newton_critical(spec, read_field(p, "theta_star", spec.rg.h_plus),
                                                 read_field(p, "theta", spec.rg.h_plus));
        result["psi_star"] = vector_to_json(cp.psi_star.values());
        result["psi"] = vector_to_json(cp.psi.values());
        result["phi_star"] = vector_to_json(cp.phi_star.values());
        result["phi"] = vector_to_json(cp.phi.values());
        result["iterations"] = cp.iterations;
        result["residual"] = format_number(cp.residual);
      }
    }
    write_output(result.dump(2) + "\n", out);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitError;
}
