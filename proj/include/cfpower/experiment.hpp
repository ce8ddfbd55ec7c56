#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cfpower/asymmetric.hpp"
#include "cfpower/continuous.hpp"
#include "cfpower/presets.hpp"
#include "cfpower/symmetric.hpp"

namespace cfpower {

enum class PolicyKind { symmetric, asymmetric, continuous };

inline std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::symmetric: return "symmetric";
    case PolicyKind::asymmetric: return "asymmetric";
    default: return "continuous";
  }
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "symmetric") return PolicyKind::symmetric;
  if (s == "asymmetric") return PolicyKind::asymmetric;
  if (s == "continuous") return PolicyKind::continuous;
  throw argument_error("unknown policy kind '" + s + "'");
}

struct ExperimentConfig {
  std::vector<Marginal> marginals;  // empty iff gaussian
  bool gaussian = false;
  int quad_nodes = 128;
  std::vector<int> a{1, 1};
  std::vector<double> pbar_grid;
  std::vector<std::string> algorithms;
  PolicyKind policy_kind = PolicyKind::symmetric;
  BisectionConfig bisection;
  NlpConfig nlp;
  ShapingConfig shaping;
  std::uint64_t seed = 1234;
  std::string output = "sweep.csv";
};

inline bool operator==(const Marginal& x, const Marginal& y) {
  return x.values == y.values && x.probs == y.probs;
}

// Field-for-field equality over everything that is serialized.
inline bool operator==(const ExperimentConfig& x, const ExperimentConfig& y) {
  return x.marginals == y.marginals && x.gaussian == y.gaussian &&
         x.quad_nodes == y.quad_nodes && x.a == y.a && x.pbar_grid == y.pbar_grid &&
         x.algorithms == y.algorithms && x.policy_kind == y.policy_kind &&
         x.bisection.lambda_lo == y.bisection.lambda_lo &&
         x.bisection.lambda_hi == y.bisection.lambda_hi &&
         x.bisection.power_tol == y.bisection.power_tol &&
         x.bisection.max_iter == y.bisection.max_iter && x.nlp.starts == y.nlp.starts &&
         x.nlp.step_init == y.nlp.step_init && x.nlp.grad_tol == y.nlp.grad_tol &&
         x.nlp.max_iter == y.nlp.max_iter && x.shaping.c_t == y.shaping.c_t &&
         x.shaping.step == y.shaping.step && x.shaping.rate_tol == y.shaping.rate_tol &&
         x.shaping.ordering == y.shaping.ordering && x.seed == y.seed && x.output == y.output;
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.gaussian != (cfg.policy_kind == PolicyKind::continuous))
    throw argument_error("the gaussian model requires the continuous policy kind and vice versa");
  if (cfg.gaussian && cfg.quad_nodes < 16)
    throw argument_error("quad_nodes must be at least 16");
  if (!cfg.gaussian && cfg.marginals.empty())
    throw argument_error("discrete config needs per-user marginals");

  EquationCoefficients a(cfg.a);
  std::size_t state_count = 0;
  if (!cfg.gaussian) {
    DiscreteChannelModel model(cfg.marginals);
    if (model.users() != a.size())
      throw argument_error("coefficient vector length does not match the user count");
    state_count = model.state_count();
  } else if (a.size() != 2) {
    throw argument_error("the built-in gaussian model has two users");
  }

  if (cfg.pbar_grid.empty()) throw argument_error("pbar_grid must be nonempty");
  for (std::size_t i = 0; i < cfg.pbar_grid.size(); ++i) {
    if (cfg.pbar_grid[i] <= 0.0) throw argument_error("pbar_grid entries must be positive");
    if (i > 0 && cfg.pbar_grid[i] <= cfg.pbar_grid[i - 1])
      throw argument_error("pbar_grid must be strictly increasing");
  }

  if (cfg.algorithms.empty()) throw argument_error("algorithm list must be nonempty");
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
    const std::string& alg = cfg.algorithms[i];
    if (alg != "A0" && alg != "A1" && alg != "A2" && alg != "A3")
      throw argument_error("unknown algorithm '" + alg + "'");
    for (std::size_t j = 0; j < i; ++j)
      if (cfg.algorithms[j] == alg) throw argument_error("algorithm list has duplicates");
    if (cfg.policy_kind == PolicyKind::asymmetric && alg == "A0")
      throw argument_error("A0 is only defined for symmetric and continuous policies");
    if (cfg.policy_kind == PolicyKind::continuous && alg == "A2")
      throw argument_error("the continuous solver has no A2; the iterative algorithm is A3");
    if (alg == "A3" && cfg.policy_kind == PolicyKind::symmetric && state_count > 20)
      throw argument_error("A3 needs at most 20 states for the symmetric policy");
    if (alg == "A3" && cfg.policy_kind == PolicyKind::asymmetric && state_count > 12)
      throw argument_error("A3 needs at most 12 states for the asymmetric policy");
  }

  if (cfg.bisection.lambda_lo <= 0.0 || cfg.bisection.lambda_hi <= cfg.bisection.lambda_lo)
    throw argument_error("bisection bracket must satisfy 0 < lambda_lo < lambda_hi");
  if (cfg.bisection.power_tol <= 0.0) throw argument_error("power_tol must be positive");
  if (cfg.bisection.max_iter < 1) throw argument_error("max_iter must be positive");
  if (cfg.nlp.starts < 1) throw argument_error("multi-start count must be at least 1");
  if (cfg.nlp.max_iter < 1) throw argument_error("nlp max_iter must be positive");
  if (cfg.shaping.step <= 0.0) throw argument_error("shaping step must be positive");
  if (cfg.shaping.ordering != 1 && cfg.shaping.ordering != 2)
    throw argument_error("ordering method must be 1 or 2");
}

namespace detail {

inline std::vector<double> budget_grid(double step, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = step * (i + 1);
  return g;
}

}  // namespace detail

inline bool is_preset(const std::string& name) {
  return name == "example1" || name == "example2" || name == "example3" || name == "remark" ||
         name == "gaussian";
}

inline std::vector<std::string> preset_names() {
  return {"example1", "example2", "example3", "remark", "gaussian"};
}

inline ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.output = name + ".csv";
  if (name == "example1") {
    cfg.marginals = presets::example1().marginals();
    cfg.pbar_grid = detail::budget_grid(0.1, 130);
    cfg.algorithms = {"A0", "A1", "A2", "A3"};
  } else if (name == "example2") {
    cfg.marginals = presets::example2().marginals();
    cfg.pbar_grid = detail::budget_grid(0.1, 130);
    cfg.algorithms = {"A0", "A1", "A2", "A3"};
  } else if (name == "example3") {
    cfg.marginals = presets::example3().marginals();
    cfg.pbar_grid = detail::budget_grid(0.1, 130);
    cfg.algorithms = {"A0", "A1", "A2"};
  } else if (name == "remark") {
    cfg.marginals = presets::remark().marginals();
    cfg.policy_kind = PolicyKind::asymmetric;
    cfg.pbar_grid = {2.0};
    cfg.algorithms = {"A3"};
  } else if (name == "gaussian") {
    cfg.gaussian = true;
    cfg.policy_kind = PolicyKind::continuous;
    cfg.pbar_grid = detail::budget_grid(0.1, 40);
    cfg.algorithms = {"A0", "A1", "A3"};
  } else {
    throw argument_error("unknown preset '" + name + "'");
  }
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  if (cfg.gaussian) {
    j["model"] = {{"type", "gaussian"}, {"quad_nodes", cfg.quad_nodes}};
  } else {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : cfg.marginals)
      ms.push_back({{"values", m.values}, {"probs", m.probs}});
    j["model"] = {{"type", "discrete"}, {"marginals", std::move(ms)}};
  }
  j["a"] = cfg.a;
  j["pbar_grid"] = cfg.pbar_grid;
  j["algorithms"] = cfg.algorithms;
  j["policy_kind"] = to_string(cfg.policy_kind);
  j["bisection"] = {{"lambda_lo", cfg.bisection.lambda_lo},
                    {"lambda_hi", cfg.bisection.lambda_hi},
                    {"power_tol", cfg.bisection.power_tol},
                    {"max_iter", cfg.bisection.max_iter}};
  j["nlp"] = {{"starts", cfg.nlp.starts},
              {"step_init", cfg.nlp.step_init},
              {"grad_tol", cfg.nlp.grad_tol},
              {"max_iter", cfg.nlp.max_iter}};
  j["shaping"] = {{"c_t", cfg.shaping.c_t},
                  {"step", cfg.shaping.step},
                  {"rate_tol", cfg.shaping.rate_tol},
                  {"ordering", cfg.shaping.ordering}};
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    const auto& model = j.at("model");
    const std::string type = model.at("type").get<std::string>();
    if (type == "gaussian") {
      cfg.gaussian = true;
      cfg.quad_nodes = model.value("quad_nodes", 128);
    } else if (type == "discrete") {
      for (const auto& m : model.at("marginals")) {
        Marginal marg;
        marg.values = m.at("values").get<std::vector<double>>();
        marg.probs = m.at("probs").get<std::vector<double>>();
        cfg.marginals.push_back(std::move(marg));
      }
    } else {
      throw argument_error("model type must be 'discrete' or 'gaussian'");
    }
    cfg.a = j.at("a").get<std::vector<int>>();
    cfg.pbar_grid = j.at("pbar_grid").get<std::vector<double>>();
    cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    cfg.policy_kind = policy_kind_from_string(j.at("policy_kind").get<std::string>());
    if (j.contains("bisection")) {
      const auto& b = j["bisection"];
      cfg.bisection.lambda_lo = b.value("lambda_lo", cfg.bisection.lambda_lo);
      cfg.bisection.lambda_hi = b.value("lambda_hi", cfg.bisection.lambda_hi);
      cfg.bisection.power_tol = b.value("power_tol", cfg.bisection.power_tol);
      cfg.bisection.max_iter = b.value("max_iter", cfg.bisection.max_iter);
    }
    if (j.contains("nlp")) {
      const auto& n = j["nlp"];
      cfg.nlp.starts = n.value("starts", cfg.nlp.starts);
      cfg.nlp.step_init = n.value("step_init", cfg.nlp.step_init);
      cfg.nlp.grad_tol = n.value("grad_tol", cfg.nlp.grad_tol);
      cfg.nlp.max_iter = n.value("max_iter", cfg.nlp.max_iter);
    }
    if (j.contains("shaping")) {
      const auto& s = j["shaping"];
      cfg.shaping.c_t = s.value("c_t", cfg.shaping.c_t);
      cfg.shaping.step = s.value("step", cfg.shaping.step);
      cfg.shaping.rate_tol = s.value("rate_tol", cfg.shaping.rate_tol);
      cfg.shaping.ordering = s.value("ordering", cfg.shaping.ordering);
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output = j.value("output", cfg.output);
  } catch (const nlohmann::json::exception& e) {
    throw argument_error(std::string("config error: ") + e.what());
  }
  cfg.nlp.seed = cfg.seed;
  validate(cfg);
  return cfg;
}

inline void write_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw argument_error("cannot open config file for writing: " + path);
  out << config_to_json(cfg).dump(2) << "\n";
}

// Named presets resolve without touching the filesystem; anything else is a
// path to a config file.
inline ExperimentConfig load_config(const std::string& path) {
  if (is_preset(path)) {
    ExperimentConfig cfg = preset_config(path);
    cfg.nlp.seed = cfg.seed;
    validate(cfg);
    return cfg;
  }
  std::ifstream in(path);
  if (!in) throw argument_error("config file not found: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw argument_error(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

struct SweepRow {
  double pbar = 0.0;
  std::string algorithm_id;
  std::string policy_kind;
  double expected_rate = 0.0;
  std::string active_set;
  std::optional<double> multiplier;
  int iterations = 0;
  double wall_ms = 0.0;
  std::string error;
  nlohmann::json policy;  // for dump_policies; not a CSV column
};

namespace detail {

inline std::string format_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string active_bitmask(std::size_t state_count, std::span<const int> active) {
  std::string s(state_count, '0');
  for (int m : active) s[static_cast<std::size_t>(m)] = '1';
  return s;
}

inline nlohmann::json policy_to_json(const Policy& policy) {
  if (std::holds_alternative<SymmetricPolicy>(policy))
    return {{"kind", "symmetric"}, {"P", std::get<SymmetricPolicy>(policy).P}};
  const auto& ap = std::get<AsymmetricPolicy>(policy);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t l = 0; l < ap.L; ++l) {
    std::vector<double> row(ap.M);
    for (std::size_t m = 0; m < ap.M; ++m) row[m] = ap.at(l, m);
    rows.push_back(std::move(row));
  }
  return {{"kind", "asymmetric"}, {"P", std::move(rows)}};
}

inline void fill_from_report(SweepRow& row, const DiscreteChannelModel& model,
                             const SolveReport& rep) {
  row.expected_rate = rep.expected_rate;
  row.active_set = active_bitmask(model.state_count(), rep.active_set);
  row.multiplier = rep.multiplier;
  row.iterations = rep.iterations;
  row.policy = policy_to_json(rep.policy);
}

inline SweepRow run_cell(const ExperimentConfig& cfg, const DiscreteChannelModel* model,
                         const ContinuousChannelModel* cmodel, const EquationCoefficients& a,
                         double pbar, const std::string& algo) {
  SweepRow row;
  row.pbar = pbar;
  row.algorithm_id = algo;
  row.policy_kind = to_string(cfg.policy_kind);
  NlpConfig nlp = cfg.nlp;
  nlp.seed = cfg.seed;

  const auto start = std::chrono::steady_clock::now();
  try {
    if (cfg.policy_kind == PolicyKind::symmetric) {
      SolveReport rep;
      if (algo == "A0")
        rep = algo_a0(*model, a, pbar);
      else if (algo == "A1")
        rep = algo_a1(*model, a, pbar, cfg.bisection).refined;
      else if (algo == "A2")
        rep = algo_a2_best(*model, a, pbar, cfg.bisection);
      else
        rep = algo_a3(*model, a, pbar, cfg.bisection);
      fill_from_report(row, *model, rep);
    } else if (cfg.policy_kind == PolicyKind::asymmetric) {
      SolveReport rep;
      if (algo == "A1")
        rep = algo_a1_asym(*model, a, pbar, nlp).refined;
      else if (algo == "A2")
        rep = algo_a2_asym_best(*model, a, pbar, nlp);
      else
        rep = algo_a3_asym(*model, a, pbar, nlp);
      fill_from_report(row, *model, rep);
    } else {
      if (algo == "A0") {
        row.expected_rate = algo_a0_continuous(*cmodel, a, pbar);
        row.active_set = "DG";
        row.policy = {{"kind", "constant_good"}, {"pbar", pbar}};
      } else if (algo == "A1") {
        const DomainPredicate good = shape_domain(*cmodel, a, 0.0, cfg.shaping.ordering);
        const ContinuousSolve sol = solve_cp2(*cmodel, a, good, pbar, cfg.bisection);
        row.expected_rate = sol.expected_rate;
        row.active_set = "Ct=0;ord=" + std::to_string(cfg.shaping.ordering);
        row.multiplier = sol.mu;
        row.iterations = sol.iterations;
        row.policy = {{"kind", "shaped"},
                      {"mu", sol.mu},
                      {"c_t", 0.0},
                      {"ordering", cfg.shaping.ordering}};
      } else {
        const IterativeContinuousReport rep =
            algo_iterative_continuous(*cmodel, a, pbar, cfg.shaping, cfg.bisection);
        row.expected_rate = rep.best_rate;
        row.active_set =
            "Ct=" + format_g6(rep.best_c_t) + ";ord=" + std::to_string(rep.ordering);
        row.multiplier = rep.best_mu;
        row.iterations = rep.solves;
        row.policy = {{"kind", "shaped"},
                      {"mu", rep.best_mu},
                      {"c_t", rep.best_c_t},
                      {"ordering", rep.ordering}};
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.expected_rate = 0.0;
    row.active_set.clear();
    row.multiplier.reset();
    row.policy = nullptr;
  }
  const auto stop = std::chrono::steady_clock::now();
  row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return row;
}

}  // namespace detail

// One row per (pbar, algorithm) cell, in that order. Cells run on a worker
// pool; the output order is fixed by the preallocated row layout, and each
// cell is deterministic under the config seed.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const EquationCoefficients a(cfg.a);
  std::optional<DiscreteChannelModel> dmodel;
  std::optional<ContinuousChannelModel> cmodel;
  if (cfg.gaussian)
    cmodel.emplace(gaussian_model(cfg.quad_nodes));
  else
    dmodel.emplace(cfg.marginals);

  struct Cell {
    double pbar;
    std::string algo;
  };
  std::vector<Cell> cells;
  cells.reserve(cfg.pbar_grid.size() * cfg.algorithms.size());
  for (double pbar : cfg.pbar_grid)
    for (const std::string& algo : cfg.algorithms) cells.push_back({pbar, algo});

  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      rows[i] = detail::run_cell(cfg, dmodel ? &*dmodel : nullptr, cmodel ? &*cmodel : nullptr,
                                 a, cells[i].pbar, cells[i].algo);
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const std::size_t n = std::min<std::size_t>(hw, cells.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

inline std::string csv_string(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "pbar,algorithm_id,policy_kind,expected_rate,active_set,multiplier,iterations,"
         "wall_ms,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    out << detail::format_g6(r.pbar) << ',' << r.algorithm_id << ',' << r.policy_kind << ','
        << detail::format_g6(r.expected_rate) << ',' << r.active_set << ','
        << (r.multiplier ? detail::format_g6(*r.multiplier) : std::string()) << ','
        << r.iterations << ',' << detail::format_g6(r.wall_ms) << ',' << err << '\n';
  }
  return out.str();
}

inline void write_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw argument_error("cannot open output file: " + path);
  out << csv_string(rows);
}

// One JSON file per non-errored row, named by row index.
inline void dump_policies(const std::vector<SweepRow>& rows, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].error.empty()) continue;
    nlohmann::json j = {{"pbar", rows[i].pbar},
                        {"algorithm_id", rows[i].algorithm_id},
                        {"policy_kind", rows[i].policy_kind},
                        {"expected_rate", rows[i].expected_rate},
                        {"policy", rows[i].policy}};
    char name[32];
    std::snprintf(name, sizeof name, "row%04zu.json", i);
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw argument_error("cannot open policy dump file in " + dir);
    out << j.dump(2) << "\n";
  }
}

// Recompute a dumped row's expected rate from its serialized policy alone.
inline double reevaluate_policy(const ExperimentConfig& cfg, const nlohmann::json& dumped) {
  const EquationCoefficients a(cfg.a);
  const nlohmann::json& pol = dumped.at("policy");
  const std::string kind = pol.at("kind").get<std::string>();

  if (kind == "symmetric") {
    DiscreteChannelModel model(cfg.marginals);
    SymmetricPolicy sp{pol.at("P").get<std::vector<double>>()};
    return expected_rate(model, a, sp);
  }
  if (kind == "asymmetric") {
    DiscreteChannelModel model(cfg.marginals);
    const auto rows = pol.at("P").get<std::vector<std::vector<double>>>();
    AsymmetricPolicy ap(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t l = 0; l < ap.L; ++l)
      for (std::size_t m = 0; m < ap.M; ++m) ap.at(l, m) = rows[l][m];
    return expected_rate(model, a, ap);
  }

  ContinuousChannelModel model = gaussian_model(cfg.quad_nodes);
  if (kind == "constant_good")
    return algo_a0_continuous(model, a, pol.at("pbar").get<double>());
  if (kind != "shaped") throw argument_error("unknown policy kind '" + kind + "'");
  const double mu = pol.at("mu").get<double>();
  const DomainPredicate domain =
      shape_domain(model, a, pol.at("c_t").get<double>(), pol.at("ordering").get<int>());
  std::vector<double> terms(model.nodes(), 0.0);
  for (std::size_t k = 0; k < model.nodes(); ++k) {
    const auto h = model.node(k);
    if (detail::norm_sq(h) <= 0.0 || !domain(h)) continue;
    const double p = p_continuous(h, a, mu);
    if (p <= 0.0) continue;
    const double rate = symmetric_rate_unclamped(h, a, p);
    if (rate > 0.0) terms[k] = rate * model.weight(k);
  }
  return detail::pairwise_sum(terms);
}

struct ThresholdRow {
  std::string name;
  double pbar_o = 0.0;
};

inline double config_threshold(const ExperimentConfig& cfg) {
  if (cfg.gaussian)
    throw argument_error("the budget threshold is defined for discrete models only");
  validate(cfg);
  DiscreteChannelModel model(cfg.marginals);
  return threshold_pbar(model, EquationCoefficients(cfg.a));
}

inline std::vector<ThresholdRow> example_threshold_table() {
  const EquationCoefficients a({1, 1});
  std::vector<ThresholdRow> out;
  out.push_back({"example1", threshold_pbar(presets::example1(), a)});
  out.push_back({"example2", threshold_pbar(presets::example2(), a)});
  out.push_back({"example3", threshold_pbar(presets::example3(), a)});
  return out;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline CheckResult near(const std::string& name, double got, double want, double tol) {
  CheckResult c;
  c.name = name;
  c.pass = std::abs(got - want) <= tol;
  c.detail = "got " + format_g6(got) + ", want " + format_g6(want) + " +/- " + format_g6(tol);
  return c;
}

}  // namespace detail

// Golden-value checks behind the `reproduce` verb. Tolerances follow the
// published figures, not machine precision.
inline std::vector<CheckResult> reproduce_preset(const std::string& name) {
  std::vector<CheckResult> out;
  const EquationCoefficients a({1, 1});

  if (name == "example1") {
    const DiscreteChannelModel model = presets::example1();
    out.push_back(detail::near("threshold", threshold_pbar(model, a), 2.09, 0.01));
    for (double pbar : {2.2, 3.0, 4.0, 5.0}) {
      const double first = algo_a1(model, a, pbar).first_pass.expected_rate;
      const double opt = algo_a3(model, a, pbar).expected_rate;
      out.push_back(detail::near("A1 first pass = A3 at pbar " + detail::format_g6(pbar),
                                 first, opt, 1e-6));
    }
    const double a1 = algo_a1(model, a, 0.9).refined.expected_rate;
    const double a3 = algo_a3(model, a, 0.9).expected_rate;
    CheckResult gap;
    gap.name = "A1 falls short of A3 at pbar 0.9";
    gap.pass = a3 - a1 > 1e-3;
    gap.detail = "gap " + detail::format_g6(a3 - a1);
    out.push_back(gap);
  } else if (name == "example2") {
    const DiscreteChannelModel model = presets::example2();
    out.push_back(detail::near("threshold", threshold_pbar(model, a), 5.02, 0.01));
    CheckResult gap;
    gap.name = "A2 falls short of A3 somewhere in pbar [1.25, 2.25]";
    double worst = 0.0;
    for (int i = 0; i <= 8; ++i) {
      const double pbar = 1.25 + 0.125 * i;
      const double a2 = algo_a2_best(model, a, pbar).expected_rate;
      const double a3 = algo_a3(model, a, pbar).expected_rate;
      worst = std::max(worst, a3 - a2);
    }
    gap.pass = worst > 1e-6;
    gap.detail = "largest gap " + detail::format_g6(worst);
    out.push_back(gap);
  } else if (name == "example3") {
    const DiscreteChannelModel model = presets::example3();
    out.push_back(detail::near("threshold", threshold_pbar(model, a), 13.05, 0.05));
  } else if (name == "remark") {
    const DiscreteChannelModel model = presets::remark();
    const SolveReport rep = algo_a3_asym(model, a, 2.0);
    out.push_back(detail::near("per-user rate at pbar 2", rep.expected_rate, 0.4102, 5e-3));
    CheckResult act;
    act.name = "active set is {2,4} or {3,4}";
    act.pass = rep.active_set == std::vector<int>{1, 3} || rep.active_set == std::vector<int>{2, 3};
    std::string shown;
    for (int m : rep.active_set) shown += (shown.empty() ? "" : ",") + std::to_string(m + 1);
    act.detail = "got {" + shown + "}";
    out.push_back(act);
  } else if (name == "gaussian") {
    const ContinuousChannelModel model = gaussian_model();
    for (double pbar : {0.5, 1.0, 2.0, 4.0}) {
      const IterativeContinuousReport rep = algo_iterative_continuous(model, a, pbar);
      CheckResult ord;
      ord.name = "iterative >= water-filling >= constant at pbar " + detail::format_g6(pbar);
      ord.pass = rep.best_rate >= rep.first_rate && rep.first_rate >= rep.constant_rate &&
                 std::isfinite(rep.best_rate);
      ord.detail = detail::format_g6(rep.best_rate) + " / " + detail::format_g6(rep.first_rate) +
                   " / " + detail::format_g6(rep.constant_rate);
      out.push_back(ord);
      const double gain = rep.best_rate - rep.first_rate;
      CheckResult g;
      g.name = "shaping gain within [0, 0.1] at pbar " + detail::format_g6(pbar);
      g.pass = gain >= 0.0 && gain <= 0.1;
      g.detail = "gain " + detail::format_g6(gain);
      out.push_back(g);
    }
  } else {
    throw argument_error("unknown preset '" + name + "'");
  }
  return out;
}

}  // namespace cfpower
