#include "report.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace cqlab::runner {

namespace {

bool within(double value, double reference, double allowed) {
  return std::isfinite(value) && std::abs(value - reference) <= allowed;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

CheckRecord absolute_check(std::string name, double value, double reference, double tolerance) {
  return {std::move(name), value, reference, tolerance, "absolute", within(value, reference, tolerance)};
}

CheckRecord relative_check(std::string name, double value, double reference, double tolerance) {
  return {std::move(name), value, reference, tolerance, "relative",
          within(value, reference, tolerance * std::abs(reference))};
}

CheckRecord bound_check(std::string name, double value, double bound) {
  return absolute_check(std::move(name), value, 0.0, bound);
}

CheckRecord at_least_check(std::string name, double value, double minimum) {
  return {std::move(name), value, minimum, 0.0, "at_least", std::isfinite(value) && value >= minimum};
}

bool Report::passed() const {
  if (!breakdowns_.empty()) return false;
  for (const CheckRecord& c : checks_)
    if (!c.pass) return false;
  return true;
}

nlohmann::json Report::to_json() const {
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckRecord& c : checks_) {
    checks.push_back({{"name", c.name},
                      {"value", number_or_null(c.value)},
                      {"reference", number_or_null(c.reference)},
                      {"tolerance", number_or_null(c.tolerance)},
                      {"tolerance_kind", c.kind},
                      {"pass", c.pass}});
  }
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& [name, value] : metrics_) metrics.push_back({{"name", name}, {"value", number_or_null(value)}});
  nlohmann::json breakdowns = nlohmann::json::array();
  for (const Breakdown& b : breakdowns_) breakdowns.push_back({{"check", b.check}, {"message", b.message}});
  return {{"experiment", experiment_}, {"subcommand", subcommand_}, {"config", config_},
          {"checks", checks},          {"metrics", metrics},         {"breakdowns", breakdowns},
          {"artifacts", artifacts_},   {"pass", passed()}};
}

void Report::write(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << to_json().dump(2) << '\n';
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header) : out_(file) {
  if (!out_) throw std::runtime_error("cannot write " + file.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

}  // namespace cqlab::runner
