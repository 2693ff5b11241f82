#pragma once

// Verification reports.  Suites and checks are kept in name order, so a
// report depends only on what was computed.

#include "blockspin/io.hpp"

#include <map>
#include <optional>
#include <string>

namespace blockspin {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct Check {
  double value = 0.0;
  std::optional<double> min;  // inclusive bounds
  std::optional<double> max;
  std::string note;           // set when the check could not be evaluated
  bool passed() const;
};

Check upper_bound_check(double value, double max);
Check range_check(double value, double min, double max);
Check failed_check(std::string why);

struct SuiteResult {
  std::map<std::string, Check> checks;
  std::map<std::string, double> conditions;
  std::map<std::string, std::string> info;
  std::string error;  // the suite aborted
  double seconds = 0.0;
  bool passed() const;
};

struct Report {
  Json config;
  std::map<std::string, SuiteResult> suites;
  bool passed() const;
  std::size_t check_count() const;
  std::size_t failed_count() const;
};

enum class ReportFormat { json, text };

ReportFormat parse_format(const std::string& name);
Json report_to_json(const Report& r, bool timings = false);
std::string emit_report(const Report& r, ReportFormat format, bool timings = false);

}  // namespace blockspin
