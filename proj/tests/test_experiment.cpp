#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cfpower/experiment.hpp"

using namespace cfpower;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& leaf) {
  return fs::temp_directory_path() / leaf;
}

std::vector<nlohmann::json> read_dump_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<nlohmann::json> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    out.push_back(nlohmann::json::parse(in));
  }
  return out;
}

}  // namespace

TEST_CASE("preset configs") {
  const std::vector<std::string> names = preset_names();
  REQUIRE(names.size() == 5);
  for (const auto& n : names) CHECK(is_preset(n));
  CHECK_FALSE(is_preset("example9"));

  const ExperimentConfig e1 = load_config("example1");
  CHECK(e1.marginals.size() == 2);
  CHECK(e1.marginals[0].values == std::vector<double>{1.0, 3.0});
  CHECK(e1.marginals[1].probs == std::vector<double>{0.8, 0.2});
  CHECK(e1.pbar_grid.size() == 130);
  CHECK(e1.pbar_grid.front() == Catch::Approx(0.1).margin(1e-15));
  CHECK(e1.pbar_grid.back() == Catch::Approx(13.0).margin(1e-12));
  CHECK(e1.algorithms == std::vector<std::string>{"A0", "A1", "A2", "A3"});
  CHECK(e1.policy_kind == PolicyKind::symmetric);

  const ExperimentConfig rem = load_config("remark");
  CHECK(rem.policy_kind == PolicyKind::asymmetric);
  CHECK(rem.pbar_grid == std::vector<double>{2.0});
  CHECK(rem.algorithms == std::vector<std::string>{"A3"});

  const ExperimentConfig g = load_config("gaussian");
  CHECK(g.gaussian);
  CHECK(g.policy_kind == PolicyKind::continuous);
  CHECK(g.quad_nodes == 128);
  CHECK(g.pbar_grid.size() == 40);

  const ExperimentConfig e3 = load_config("example3");
  CHECK(e3.marginals[0].values.size() == 10);
  CHECK(e3.algorithms == std::vector<std::string>{"A0", "A1", "A2"});
}

TEST_CASE("policy kind names") {
  CHECK(to_string(PolicyKind::symmetric) == "symmetric");
  CHECK(policy_kind_from_string("asymmetric") == PolicyKind::asymmetric);
  CHECK(policy_kind_from_string("continuous") == PolicyKind::continuous);
  CHECK_THROWS_AS(policy_kind_from_string("diagonal"), argument_error);
}

TEST_CASE("config validation rejects inconsistent setups") {
  const ExperimentConfig base = preset_config("example1");

  auto broken = [&](auto&& tweak) {
    ExperimentConfig cfg = base;
    tweak(cfg);
    return cfg;
  };

  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) { c.algorithms.clear(); })),
                  argument_error);
  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) { c.algorithms = {"A5"}; })),
                  argument_error);
  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) { c.algorithms = {"A1", "A1"}; })),
                  argument_error);
  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) { c.pbar_grid.clear(); })),
                  argument_error);
  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) { c.pbar_grid = {1.0, 1.0}; })),
                  argument_error);
  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) { c.pbar_grid = {0.0, 1.0}; })),
                  argument_error);
  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) { c.a = {1, 1, 1}; })),
                  argument_error);
  CHECK_THROWS_AS(
      validate(broken([](ExperimentConfig& c) { c.policy_kind = PolicyKind::continuous; })),
      argument_error);
  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) {
                    c.policy_kind = PolicyKind::asymmetric;
                    c.algorithms = {"A0"};
                  })),
                  argument_error);
  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) { c.bisection.power_tol = 0.0; })),
                  argument_error);
  CHECK_THROWS_AS(validate(broken([](ExperimentConfig& c) { c.shaping.ordering = 3; })),
                  argument_error);

  // A3 capacity limits: 5x5 = 25 symmetric states, 4x4 = 16 asymmetric.
  const Marginal five{{1, 2, 3, 4, 5}, {0.2, 0.2, 0.2, 0.2, 0.2}};
  CHECK_THROWS_AS(validate(broken([&](ExperimentConfig& c) { c.marginals = {five, five}; })),
                  argument_error);
  const Marginal four{{1, 2, 3, 4}, {0.25, 0.25, 0.25, 0.25}};
  CHECK_THROWS_AS(validate(broken([&](ExperimentConfig& c) {
                    c.marginals = {four, four};
                    c.policy_kind = PolicyKind::asymmetric;
                    c.algorithms = {"A3"};
                  })),
                  argument_error);

  ExperimentConfig g = preset_config("gaussian");
  g.algorithms = {"A2"};
  CHECK_THROWS_AS(validate(g), argument_error);
  g = preset_config("gaussian");
  g.quad_nodes = 8;
  CHECK_THROWS_AS(validate(g), argument_error);
}

TEST_CASE("config round trip through JSON") {
  for (const std::string name : {"example1", "gaussian", "remark"}) {
    ExperimentConfig cfg = preset_config(name);
    cfg.seed = 99;
    cfg.output = "custom.csv";
    const fs::path file = temp_path("cfpower_roundtrip_" + name + ".json");
    write_config(cfg, file.string());
    const ExperimentConfig back = load_config(file.string());
    CHECK(back == cfg);
    fs::remove(file);
  }
}

TEST_CASE("config load errors") {
  CHECK_THROWS_WITH(load_config("/no/such/dir/config.json"),
                    Catch::Matchers::ContainsSubstring("not found"));

  const fs::path bad = temp_path("cfpower_bad.json");
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  CHECK_THROWS_WITH(load_config(bad.string()),
                    Catch::Matchers::ContainsSubstring("parse error"));
  {
    std::ofstream out(bad);
    out << R"({"model": {"type": "discrete"}})";
  }
  CHECK_THROWS_WITH(load_config(bad.string()),
                    Catch::Matchers::ContainsSubstring("config error"));
  fs::remove(bad);
}

TEST_CASE("shipped config files match the presets") {
  const fs::path dir = CFPOWER_CONFIG_DIR;
  for (const std::string& name : preset_names()) {
    const fs::path file = dir / (name + ".json");
    REQUIRE(fs::exists(file));
    CHECK(load_config(file.string()) == preset_config(name));
  }
}

TEST_CASE("sweep on the asymmetric preset") {
  const ExperimentConfig cfg = load_config("remark");
  const std::vector<SweepRow> rows = run_sweep(cfg);
  REQUIRE(rows.size() == 1);
  const SweepRow& r = rows[0];
  CHECK(r.error.empty());
  CHECK(r.pbar == 2.0);
  CHECK(r.algorithm_id == "A3");
  CHECK(r.policy_kind == "asymmetric");
  CHECK(r.expected_rate == Catch::Approx(0.4102).margin(5e-3));
  CHECK((r.active_set == "0101" || r.active_set == "0011"));
  CHECK(r.policy.at("kind") == "asymmetric");
  CHECK(r.policy.at("P").size() == 2);

  const std::vector<SweepRow> again = run_sweep(cfg);
  CHECK(again[0].expected_rate == r.expected_rate);
  CHECK(again[0].policy == r.policy);
}

TEST_CASE("sweep rows come out in grid-major order") {
  ExperimentConfig cfg = preset_config("example1");
  cfg.pbar_grid = {2.2, 3.0, 4.0, 5.0};
  cfg.algorithms = {"A1", "A3"};
  const std::vector<SweepRow> rows = run_sweep(cfg);
  REQUIRE(rows.size() == 8);
  for (std::size_t i = 0; i < 4; ++i) {
    const SweepRow& a1 = rows[2 * i];
    const SweepRow& a3 = rows[2 * i + 1];
    CHECK(a1.pbar == cfg.pbar_grid[i]);
    CHECK(a1.algorithm_id == "A1");
    CHECK(a3.algorithm_id == "A3");
    CHECK(a1.error.empty());
    CHECK(a3.error.empty());
    CHECK(a1.expected_rate == Catch::Approx(a3.expected_rate).margin(1e-6));
  }
}

TEST_CASE("a failing cell reports its error and the sweep continues") {
  ExperimentConfig cfg = preset_config("example1");
  cfg.pbar_grid = {2.0};
  cfg.algorithms = {"A0", "A1"};
  cfg.bisection.max_iter = 1;
  const std::vector<SweepRow> rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].error.empty());
  CHECK(rows[0].expected_rate > 0.0);
  CHECK_FALSE(rows[1].error.empty());
  CHECK(rows[1].expected_rate == 0.0);
  CHECK(rows[1].active_set.empty());
}

TEST_CASE("CSV serialization") {
  ExperimentConfig cfg = preset_config("example1");
  cfg.pbar_grid = {2.2};
  cfg.algorithms = {"A0", "A3"};
  const std::vector<SweepRow> rows = run_sweep(cfg);
  const std::string csv = csv_string(rows);

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "pbar,algorithm_id,policy_kind,expected_rate,active_set,multiplier,iterations,"
        "wall_ms,error");
  int count = 0;
  while (std::getline(in, line)) {
    ++count;
    CHECK(line.rfind("2.2,", 0) == 0);
  }
  CHECK(count == 2);

  SweepRow weird;
  weird.pbar = 1.0;
  weird.algorithm_id = "A0";
  weird.policy_kind = "symmetric";
  weird.error = "bad,\nthing";
  const std::string escaped = csv_string({weird});
  CHECK(escaped.find("bad;;thing") != std::string::npos);

  const fs::path out = temp_path("cfpower_sweep.csv");
  write_csv(rows, out.string());
  std::ifstream back(out);
  std::string header;
  std::getline(back, header);
  CHECK(header ==
        "pbar,algorithm_id,policy_kind,expected_rate,active_set,multiplier,iterations,"
        "wall_ms,error");
  fs::remove(out);
}

TEST_CASE("dumped policies re-evaluate to the reported rate") {
  ExperimentConfig cfg = preset_config("example1");
  cfg.pbar_grid = {0.9, 2.5};
  cfg.algorithms = {"A1", "A3"};
  const std::vector<SweepRow> rows = run_sweep(cfg);
  const fs::path dir = temp_path("cfpower_dump_discrete");
  fs::remove_all(dir);
  dump_policies(rows, dir.string());
  const auto dumps = read_dump_dir(dir);
  REQUIRE(dumps.size() == rows.size());
  for (const auto& d : dumps) {
    const double re = reevaluate_policy(cfg, d);
    CHECK(std::abs(re - d.at("expected_rate").get<double>()) <= 1e-9);
  }
  fs::remove_all(dir);
}

TEST_CASE("dumped asymmetric and continuous policies re-evaluate exactly") {
  {
    const ExperimentConfig cfg = load_config("remark");
    const std::vector<SweepRow> rows = run_sweep(cfg);
    const fs::path dir = temp_path("cfpower_dump_asym");
    fs::remove_all(dir);
    dump_policies(rows, dir.string());
    const auto dumps = read_dump_dir(dir);
    REQUIRE(dumps.size() == 1);
    const double re = reevaluate_policy(cfg, dumps[0]);
    CHECK(std::abs(re - dumps[0].at("expected_rate").get<double>()) <= 1e-9);
    fs::remove_all(dir);
  }
  {
    ExperimentConfig cfg = preset_config("gaussian");
    cfg.quad_nodes = 64;
    cfg.pbar_grid = {1.0};
    const std::vector<SweepRow> rows = run_sweep(cfg);
    REQUIRE(rows.size() == 3);
    const fs::path dir = temp_path("cfpower_dump_cont");
    fs::remove_all(dir);
    dump_policies(rows, dir.string());
    const auto dumps = read_dump_dir(dir);
    REQUIRE(dumps.size() == 3);
    for (const auto& d : dumps) {
      const double re = reevaluate_policy(cfg, d);
      CHECK(std::abs(re - d.at("expected_rate").get<double>()) <= 1e-9);
    }
    fs::remove_all(dir);
  }
}

TEST_CASE("continuous sweep labels") {
  ExperimentConfig cfg = preset_config("gaussian");
  cfg.quad_nodes = 64;
  cfg.pbar_grid = {1.0};
  const std::vector<SweepRow> rows = run_sweep(cfg);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].algorithm_id == "A0");
  CHECK(rows[0].active_set == "DG");
  CHECK(rows[1].active_set == "Ct=0;ord=1");
  CHECK(rows[2].active_set.rfind("Ct=", 0) == 0);
  CHECK(rows[2].expected_rate >= rows[1].expected_rate);
  CHECK(rows[1].expected_rate >= rows[0].expected_rate);
}

TEST_CASE("threshold reporting") {
  const auto table = example_threshold_table();
  REQUIRE(table.size() == 3);
  CHECK(table[0].name == "example1");
  CHECK(table[0].pbar_o == Catch::Approx(2.089209).margin(1e-4));
  CHECK(table[1].pbar_o == Catch::Approx(5.018869).margin(1e-4));
  CHECK(table[2].pbar_o == Catch::Approx(13.054428).margin(1e-4));

  CHECK(config_threshold(load_config("example2")) ==
        Catch::Approx(5.018869).margin(1e-4));
  CHECK_THROWS_AS(config_threshold(load_config("gaussian")), argument_error);
}

TEST_CASE("golden reproduction checks pass") {
  for (const std::string name : {"example1", "example2", "example3", "remark"}) {
    const std::vector<CheckResult> checks = reproduce_preset(name);
    REQUIRE_FALSE(checks.empty());
    for (const auto& c : checks) {
      INFO(name << ": " << c.name << " (" << c.detail << ")");
      CHECK(c.pass);
    }
  }
}
