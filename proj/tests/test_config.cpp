#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "levytree/config.hpp"

using namespace levytree;
using Catch::Approx;

TEST_CASE("experiment kind names round-trip", "[config]") {
  for (const auto kind :
       {ExperimentKind::gen, ExperimentKind::mark, ExperimentKind::cuts,
        ExperimentKind::theorem31, ExperimentKind::corollary32,
        ExperimentKind::rayleigh, ExperimentKind::zmoments,
        ExperimentKind::calibrate}) {
    CHECK(kind_from_name(kind_name(kind)) == kind);
  }
  CHECK_THROWS_AS(kind_from_name("plot"), std::invalid_argument);
}

TEST_CASE("empty config text yields the defaults", "[config]") {
  const ExperimentConfig cfg = ExperimentConfig::from_string("");
  CHECK(cfg.kind == ExperimentKind::rayleigh);
  CHECK(cfg.mechanism.is_brownian());
  CHECK(cfg.offspring.kind() == OffspringLaw::Kind::poisson);
  CHECK(cfg.n == 1000);
  CHECK(cfg.replicas == 200);
  CHECK(cfg.beta == 0.5);  // mirrors the mechanism beta
  CHECK(cfg.thresholds == std::vector<double>{0.1, 0.05, 0.02});
  CHECK(cfg.orders == std::vector<std::int64_t>{1, 2, 3, 4, 5});
  CHECK(cfg.master_seed == 1);
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.edge_scale == 0.0);
  CHECK(cfg.threads == 0);
}

TEST_CASE("full key set parses", "[config]") {
  const char* text = R"(
# comment line
kind = theorem31
n = 4000
replicas = 1000

beta = 0.25
thresholds = 0.2, 0.1, 0.05
orders = 1, 2, 3
master_seed = 77
out = runs/demo
edge_scale = 0.05
node_mass_scale = 0.125
pilot_reps = 300
threads = 4
offspring = geometric
mechanism.beta = 0.5
mechanism.levy = none
)";
  const ExperimentConfig cfg = ExperimentConfig::from_string(text);
  CHECK(cfg.kind == ExperimentKind::theorem31);
  CHECK(cfg.n == 4000);
  CHECK(cfg.replicas == 1000);
  CHECK(cfg.beta == 0.25);
  CHECK(cfg.thresholds == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(cfg.orders == std::vector<std::int64_t>{1, 2, 3});
  CHECK(cfg.master_seed == 77);
  CHECK(cfg.out_dir == "runs/demo");
  CHECK(cfg.edge_scale == 0.05);
  CHECK(cfg.node_mass_scale == 0.125);
  CHECK(cfg.pilot_reps == 300);
  CHECK(cfg.threads == 4);
  CHECK(cfg.offspring.kind() == OffspringLaw::Kind::geometric);
  CHECK(cfg.mechanism.is_brownian());
}

TEST_CASE("mechanism and offspring sections", "[config]") {
  const ExperimentConfig stable = ExperimentConfig::from_string(
      "kind = zmoments\n"
      "mechanism.levy = stable\n"
      "mechanism.c0 = 1.5\n"
      "mechanism.gamma = 1.5\n");
  CHECK(stable.mechanism.levy_kind() == LevyKind::stable);
  CHECK(stable.mechanism.stable_spec().c0 == 1.5);
  CHECK(stable.mechanism.beta() == 0.0);  // beta only applies when given
  CHECK(stable.beta == 0.0);

  const ExperimentConfig atoms = ExperimentConfig::from_string(
      "kind = gen\n"
      "mechanism.levy = atoms\n"
      "mechanism.atoms = 0.5:2, 3:0.25\n"
      "mechanism.beta = 1\n");
  CHECK(atoms.mechanism.levy_kind() == LevyKind::finite_atoms);
  REQUIRE(atoms.mechanism.atoms().size() == 2);
  CHECK(atoms.mechanism.atoms()[1].r == 3.0);
  CHECK(atoms.mechanism.atoms()[1].mass == 0.25);

  const ExperimentConfig heavy = ExperimentConfig::from_string(
      "kind = gen\n"
      "offspring = stable_tail\n"
      "offspring.gamma = 1.5\n"
      "offspring.n_max = 50000\n");
  CHECK(heavy.offspring.kind() == OffspringLaw::Kind::stable_tail);
  CHECK(heavy.offspring.gamma() == 1.5);

  CHECK_THROWS_AS(
      ExperimentConfig::from_string("mechanism.levy = stable\n"),
      std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_string("offspring = stable_tail\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_string("mechanism.levy = cauchy\n"),
                  std::invalid_argument);
}

TEST_CASE("parse errors name the offender", "[config]") {
  CHECK_THROWS_WITH(ExperimentConfig::from_string("unknown_key = 1\n"),
                    Catch::Matchers::ContainsSubstring("unknown_key"));
  CHECK_THROWS_WITH(ExperimentConfig::from_string("n = twelve\n"),
                    Catch::Matchers::ContainsSubstring("'n'"));
  CHECK_THROWS_WITH(ExperimentConfig::from_string("just some text\n"),
                    Catch::Matchers::ContainsSubstring("line 1"));
  CHECK_THROWS_AS(ExperimentConfig::from_string("replicas = 1e3\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_string("master_seed = -2\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_string("threads = 9999\n"),
                  std::invalid_argument);
  // Duplicate keys: the last assignment wins.
  const ExperimentConfig dup =
      ExperimentConfig::from_string("n = 10\nn = 20\n");
  CHECK(dup.n == 20);
}

TEST_CASE("validation rejects inconsistent configs", "[config]") {
  ExperimentConfig cfg;
  cfg.validate();  // defaults are consistent

  ExperimentConfig bad = cfg;
  bad.replicas = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.replicas = 200000000;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.thresholds = {0.05, 0.1};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.thresholds = {};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.orders = {0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.beta = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.out_dir.clear();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.n = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  // rayleigh and corollary32 are Brownian-only comparisons.
  bad = cfg;
  bad.mechanism = BranchingMechanism::stable(1.0, 1.5);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.kind = ExperimentKind::zmoments;
  bad.mechanism = BranchingMechanism::quadratic(0.5, 0.1);  // drift term
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.kind = ExperimentKind::calibrate;
  bad.offspring = OffspringLaw::stable_tail(1.5);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("config JSON echo carries every field", "[config]") {
  const ExperimentConfig cfg = ExperimentConfig::from_string(
      "kind = cuts\n"
      "n = 12\n"
      "replicas = 3\n"
      "tree_json = fixtures/path3.json\n");
  const auto j = nlohmann::json::parse(cfg.to_json_string());
  CHECK(j.at("kind") == "cuts");
  CHECK(j.at("n") == 12);
  CHECK(j.at("replicas") == 3);
  CHECK(j.at("tree_json") == "fixtures/path3.json");
  CHECK(j.at("offspring").at("name") == "poisson");
  CHECK(j.at("mechanism").at("beta") == 0.5);
  CHECK(j.at("thresholds").size() == 3);
  CHECK(j.at("master_seed") == 1);
  CHECK(j.at("out") == "out");
}

TEST_CASE("config file loading", "[config]") {
  namespace fs = std::filesystem;
  const fs::path path =
      fs::temp_directory_path() / "levytree_config_test.cfg";
  {
    std::ofstream out(path);
    out << "kind = zmoments\norders = 1, 2\n";
  }
  const ExperimentConfig cfg = ExperimentConfig::from_file(path.string());
  CHECK(cfg.kind == ExperimentKind::zmoments);
  CHECK(cfg.orders == std::vector<std::int64_t>{1, 2});
  fs::remove(path);
  CHECK_THROWS_AS(ExperimentConfig::from_file(path.string()),
                  std::runtime_error);
}
