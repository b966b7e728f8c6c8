#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "generators.hpp"
#include "runner/config.hpp"
#include "runner/experiments.hpp"
#include "runner/report.hpp"

using namespace cqlab::runner;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cqlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(CQLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsMatchDocumentation) {
  const ExperimentConfig c = parse_config(json::object());
  EXPECT_EQ(c.grid.n_points, 512u);
  EXPECT_DOUBLE_EQ(c.grid.x_min, -16.0);
  EXPECT_DOUBLE_EQ(c.physics.sigma, 0.5);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.diffusion.n_walkers, 100000u);
  EXPECT_DOUBLE_EQ(c.diffusion_sigma(), 0.5);
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, UnitsAreValidated) {
  EXPECT_NO_THROW(parse_config(json::parse(R"({"physics": {"sigma": {"value": 0.7, "unit": "length"}}})")));
  EXPECT_THROW(parse_config(json::parse(R"({"physics": {"sigma": {"value": 0.7, "unit": "time"}}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"physics": {"sigma": 0.7}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"dynamics": {"dt": {"value": "x", "unit": "time"}}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"potential": {"kind": "linear", "slope": {"value": 1, "unit": "energy"}}})")),
               ConfigError);
}

TEST(Config, UnknownKeysAndKindsAreRejected) {
  EXPECT_THROW(parse_config(json::parse(R"({"grd": {}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"grid": {"points": 10}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"potential": {"kind": "morse"}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(
                   R"({"potential": {"kind": "noisy", "base": {"kind": "noisy", "base": {"kind": "free"}}}})")),
               ConfigError);
}

TEST(Config, ValidationCatchesDomainErrors) {
  ExperimentConfig c;
  c.grid.n_points = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = ExperimentConfig{};
  c.physics.hbar = -1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = ExperimentConfig{};
  c.diffusion.n_walkers = 0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, RoundTripProperty) {
  gen::for_all(30, 101, [](gen::Gen& r, int) {
    ExperimentConfig c;
    c.seed = static_cast<std::uint64_t>(r.integer(0, 1 << 30));
    c.grid.n_points = static_cast<std::size_t>(2 * r.integer(32, 512));
    c.grid.x_max = r.uniform(8.0, 40.0);
    c.grid.x_min = -c.grid.x_max;
    c.physics.sigma = r.uniform(0.2, 1.5);
    c.dynamics.dt = r.uniform(1e-4, 1e-2);
    c.diffusion.n_walkers = static_cast<std::size_t>(r.integer(10000, 200000));
    if (r.coin()) c.diffusion.diffusion_sigma = r.uniform(0.1, 1.0);
    c.potential = r.coin() ? json{{"kind", "free"}}
                           : json{{"kind", "harmonic"},
                                  {"stiffness", {{"value", r.uniform(0.1, 3.0)}, {"unit", "energy/length^2"}}}};
    const json j = to_json(c);
    EXPECT_EQ(to_json(parse_config(j)), j);
  });
}

TEST(Config, BuildsEveryPotentialKind) {
  const char* docs[] = {
      R"({"kind": "free"})",
      R"({"kind": "linear", "slope": {"value": 0.3, "unit": "energy/length"}})",
      R"({"kind": "polynomial", "coefficients": [0, 0, 0.5]})",
      R"({"kind": "noisy", "base": {"kind": "harmonic"}, "force_std": {"value": 0.1, "unit": "energy/length"},
          "step": {"value": 0.01, "unit": "time"}, "stream": 3})"};
  for (const char* d : docs) {
    ExperimentConfig c;
    c.potential = json::parse(d);
    EXPECT_NO_THROW(build_potential(parse_config(to_json(c)))) << d;
  }
  ExperimentConfig t;
  t.grid.n_points = 4;
  t.potential = json{{"kind", "tabulated"}, {"unit", "energy"}, {"values", {0.0, 1.0, 2.0, 3.0}}};
  EXPECT_DOUBLE_EQ(build_potential(t).value(-12.0), 0.5);
  t.potential["values"] = {0.0, 1.0};
  EXPECT_THROW(build_potential(t), ConfigError);
}

TEST(Report, PassFlagIsConjunction) {
  Report r("x", "all", json::object());
  r.add(bound_check("a", 0.5, 1.0));
  r.add(relative_check("b", 1.05, 1.0, 0.1));
  r.add(at_least_check("c", 2.0, 1.0));
  EXPECT_TRUE(r.passed());
  r.add(absolute_check("d", std::nan(""), 0.0, 1.0));
  EXPECT_FALSE(r.passed());
  const json j = r.to_json();
  for (const json& c : j.at("checks"))
    for (const char* key : {"name", "value", "reference", "tolerance", "pass"}) EXPECT_TRUE(c.contains(key)) << key;
  EXPECT_TRUE(j.at("checks")[3].at("value").is_null());
  EXPECT_FALSE(j.at("pass").get<bool>());
}

TEST(Report, BreakdownFailsTheRun) {
  Report r("x", "all", json::object());
  r.add(bound_check("a", 0.5, 1.0));
  r.add_breakdown("solve", "singular");
  EXPECT_FALSE(r.passed());
  EXPECT_TRUE(r.broke_down());
}

TEST(Runner, GeometryReportAndArtifacts) {
  const fs::path out = scratch("geometry");
  std::ostringstream log;
  EXPECT_EQ(run("geometry-identities", ExperimentConfig{}, out, log), kPass) << log.str();
  std::ifstream in(out / "report.json");
  const json j = json::parse(in);
  EXPECT_TRUE(j.at("pass").get<bool>());
  bool found = false;
  for (const json& c : j.at("checks"))
    if (c.at("name") == "overlap_distance.max_deviation") {
      found = true;
      EXPECT_LT(c.at("value").get<double>(), 1e-8);
    }
  EXPECT_TRUE(found);
  for (const json& a : j.at("artifacts")) EXPECT_TRUE(fs::exists(out / a.get<std::string>())) << a;
  EXPECT_TRUE(fs::exists(out / "timing.json"));
}

TEST(Runner, UnknownSubcommandIsAConfigError) {
  std::ostringstream log;
  EXPECT_THROW(run("everything", ExperimentConfig{}, scratch("unknown"), log), ConfigError);
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch("cli");
  EXPECT_EQ(cli("geometry-identities --out " + out.string()), 0);
  EXPECT_EQ(cli("all --grid 0 --out " + out.string()), 2);
  EXPECT_EQ(cli("nonsense --out " + out.string()), 2);
  EXPECT_EQ(cli("geometry-identities --out " + out.string() + " --config /nonexistent.json"), 2);
  {
    std::ofstream bad(out / "bad.json");
    bad << R"({"physics": {"sigma": {"value": 0.5, "unit": "seconds"}}})";
  }
  EXPECT_EQ(cli("geometry-identities --out " + out.string() + " --config " + (out / "bad.json").string()), 2);
  // Too few walkers for the histogram tolerance: an honest check failure.
  EXPECT_EQ(cli("born-diffusion --walkers 200 --out " + out.string() + " --config " + CQLAB_SMALL_CONFIG), 1);
}

TEST(Cli, BornDiffusionIsDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string args = " --seed 42 --walkers 20000 --config " + std::string(CQLAB_SMALL_CONFIG);
  const int first = cli("born-diffusion --out " + a.string() + args);
  ASSERT_TRUE(first == 0 || first == 1);
  ASSERT_EQ(cli("born-diffusion --out " + b.string() + args), first);
  for (const char* f : {"report.json", "born_histograms.csv", "born_components.csv", "pde_density.csv"}) {
    std::ifstream fa(a / f), fb(b / f);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_FALSE(sa.str().empty()) << f;
    EXPECT_EQ(sa.str(), sb.str()) << f;
  }
}
