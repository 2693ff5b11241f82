#include "blockspin/report.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace blockspin {

bool Check::passed() const {
  if (!note.empty() || !std::isfinite(value)) return false;
  if (min && !(value >= *min)) return false;
  if (max && !(value <= *max)) return false;
  return true;
}

Check upper_bound_check(double value, double max) {
  Check c;
  c.value = value;
  c.max = max;
  return c;
}

Check range_check(double value, double min, double max) {
  Check c = upper_bound_check(value, max);
  c.min = min;
  return c;
}

Check failed_check(std::string why) {
  Check c;
  c.value = std::numeric_limits<double>::quiet_NaN();
  c.note = std::move(why);
  return c;
}

bool SuiteResult::passed() const {
  if (!error.empty()) return false;
  for (const auto& [name, c] : checks)
    if (!c.passed()) return false;
  return true;
}

bool Report::passed() const {
  for (const auto& [name, s] : suites)
    if (!s.passed()) return false;
  return true;
}

std::size_t Report::check_count() const {
  std::size_t n = 0;
  for (const auto& [name, s] : suites) n += s.checks.size();
  return n;
}

std::size_t Report::failed_count() const {
  std::size_t n = 0;
  for (const auto& [name, s] : suites)
    for (const auto& [cn, c] : s.checks) n += c.passed() ? 0 : 1;
  return n;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "text") return ReportFormat::text;
  throw std::invalid_argument("unknown report format \"" + name + "\" (expected json or text)");
}

namespace {

std::string value_text(const Check& c) { return c.note.empty() ? format_number(c.value) : "n/a"; }

}  // namespace

Json report_to_json(const Report& r, bool timings) {
  Json suites = Json::object();
  for (const auto& [name, s] : r.suites) {
    Json checks = Json::object();
    for (const auto& [cn, c] : s.checks) {
      Json j = {{"pass", c.passed()}, {"value", value_text(c)}};
      if (c.min) j["min"] = format_number(*c.min);
      if (c.max) j["max"] = format_number(*c.max);
      if (!c.note.empty()) j["note"] = c.note;
      checks[cn] = std::move(j);
    }
    Json conditions = Json::object();
    for (const auto& [k, v] : s.conditions) conditions[k] = format_number(v);
    Json js = {{"pass", s.passed()}, {"checks", std::move(checks)}, {"conditions", std::move(conditions)}};
    if (!s.info.empty()) js["info"] = s.info;
    if (!s.error.empty()) js["error"] = s.error;
    if (timings) js["seconds"] = format_number(s.seconds);
    suites[name] = std::move(js);
  }
  return {{"artifact", {{"name", "blockspin"}, {"version", kArtifactVersion}}},
          {"config", r.config},
          {"suites", std::move(suites)},
          {"summary",
           {{"pass", r.passed()}, {"suites", r.suites.size()}, {"checks", r.check_count()},
            {"failed", r.failed_count()}}}};
}

std::string emit_report(const Report& r, ReportFormat format, bool timings) {
  if (format == ReportFormat::json) return report_to_json(r, timings).dump(2) + "\n";
  std::ostringstream os;
  os << "blockspin " << kArtifactVersion << "\n";
  os << std::left << std::setw(22) << "suite" << std::setw(34) << "check" << std::setw(26) << "value"
     << std::setw(26) << "bound" << "result\n";
  for (const auto& [name, s] : r.suites) {
    if (!s.error.empty()) os << std::setw(22) << name << std::setw(34) << "(error)" << s.error << "\n";
    for (const auto& [cn, c] : s.checks) {
      std::string bound;
      if (c.min) bound += ">= " + format_number(*c.min);
      if (c.max) bound += (bound.empty() ? "" : ", ") + std::string("<= ") + format_number(*c.max);
      os << std::setw(22) << name << std::setw(34) << cn << std::setw(26) << value_text(c) << std::setw(26)
         << bound << (c.passed() ? "PASS" : "FAIL");
      if (!c.note.empty()) os << "  " << c.note;
      os << "\n";
    }
    if (timings) os << std::setw(22) << name << std::setw(34) << "(seconds)" << format_number(s.seconds) << "\n";
  }
  os << (r.passed() ? "PASS" : "FAIL") << ": " << r.suites.size() << " suites, " << r.check_count() << " checks, "
     << r.failed_count() << " failed\n";
  return os.str();
}

}  // namespace blockspin
