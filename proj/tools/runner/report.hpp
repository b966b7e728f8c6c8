#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cqlab::runner {

// One numeric check:
//   absolute  |value - reference| <= tolerance
//   relative  |value - reference| <= tolerance * |reference|
//   at_least  value >= reference - tolerance
struct CheckRecord {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  std::string kind = "absolute";
  bool pass = false;
};

CheckRecord absolute_check(std::string name, double value, double reference, double tolerance);
CheckRecord relative_check(std::string name, double value, double reference, double tolerance);
// value <= bound, recorded as |value - 0| <= bound for non-negative residuals.
CheckRecord bound_check(std::string name, double value, double bound);
CheckRecord at_least_check(std::string name, double value, double minimum);

struct Breakdown {
  std::string check;
  std::string message;
};

class Report {
 public:
  Report(std::string experiment, std::string subcommand, nlohmann::json config)
      : experiment_(std::move(experiment)), subcommand_(std::move(subcommand)), config_(std::move(config)) {}

  void add(CheckRecord c) { checks_.push_back(std::move(c)); }
  void add_artifact(std::string file) { artifacts_.push_back(std::move(file)); }
  // Reported diagnostics that do not enter the pass flag.
  void add_metric(std::string name, double value) { metrics_.emplace_back(std::move(name), value); }
  void add_breakdown(std::string check, std::string message) { breakdowns_.push_back({std::move(check), std::move(message)}); }

  const std::vector<CheckRecord>& checks() const { return checks_; }
  bool broke_down() const { return !breakdowns_.empty(); }
  bool passed() const;

  nlohmann::json to_json() const;
  void write(const std::filesystem::path& file) const;

 private:
  std::string experiment_;
  std::string subcommand_;
  nlohmann::json config_;
  std::vector<CheckRecord> checks_;
  std::vector<std::string> artifacts_;
  std::vector<std::pair<std::string, double>> metrics_;
  std::vector<Breakdown> breakdowns_;
};

std::string format_number(double v);

// Plain CSV with a header row; numbers in shortest round-trip form.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header);

  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  template <class T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_convertible_v<T, const char*>) {
      return std::string(v);
    } else if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else {
      return format_number(static_cast<double>(v));
    }
  }

  std::ofstream out_;
};

}  // namespace cqlab::runner
