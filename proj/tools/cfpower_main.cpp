#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfpower/experiment.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  std::string dump_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "config file path or preset name")->required();
  cmd->add_option("--out", o.out, "CSV output path (overrides the config)");
  cmd->add_option("--dump-policies", o.dump_dir, "directory for per-row policy files");
  cmd->add_option("--seed", o.seed, "seed override for the multi-start solver");
  cmd->add_flag("--quiet", o.quiet, "suppress the stdout report");
}

cfpower::ExperimentConfig load(const CommonOpts& o) {
  cfpower::ExperimentConfig cfg = cfpower::load_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.nlp.seed = *o.seed;
  }
  if (!o.out.empty()) cfg.output = o.out;
  return cfg;
}

std::string display_active(const cfpower::SweepRow& row) {
  if (row.policy_kind != "symmetric" && row.policy_kind != "asymmetric") return row.active_set;
  std::string out = "{";
  for (std::size_t i = 0; i < row.active_set.size(); ++i) {
    if (row.active_set[i] != '1') continue;
    if (out.size() > 1) out += ",";
    out += std::to_string(i + 1);
  }
  return out + "}";
}

void print_rows(const std::vector<cfpower::SweepRow>& rows) {
  std::printf("%8s  %-4s  %12s  %-18s  %12s  %6s\n", "pbar", "alg", "rate", "active", "mult",
              "iters");
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      std::printf("%8.4g  %-4s  error: %s\n", r.pbar, r.algorithm_id.c_str(), r.error.c_str());
      continue;
    }
    std::printf("%8.4g  %-4s  %12.6f  %-18s  %12s  %6d\n", r.pbar, r.algorithm_id.c_str(),
                r.expected_rate, display_active(r).c_str(),
                r.multiplier ? cfpower::detail::format_g6(*r.multiplier).c_str() : "-",
                r.iterations);
  }
}

int finish(const cfpower::ExperimentConfig&, const CommonOpts& o,
           const std::vector<cfpower::SweepRow>& rows, bool write_file,
           const std::string& out_path) {
  if (write_file) cfpower::write_csv(rows, out_path);
  if (!o.dump_dir.empty()) cfpower::dump_policies(rows, o.dump_dir);
  int errors = 0;
  for (const auto& r : rows)
    if (!r.error.empty()) ++errors;
  if (!o.quiet) {
    if (write_file)
      std::printf("%zu cells, %d errored, wrote %s\n", rows.size(), errors, out_path.c_str());
    if (errors > 0)
      for (const auto& r : rows)
        if (!r.error.empty())
          std::printf("  pbar %.6g %s: %s\n", r.pbar, r.algorithm_id.c_str(), r.error.c_str());
  }
  return errors > 0 ? 3 : 0;
}

int run_solve(const CommonOpts& o, std::optional<double> pbar) {
  cfpower::ExperimentConfig cfg = load(o);
  cfpower::validate(cfg);
  cfg.pbar_grid = {pbar ? *pbar : cfg.pbar_grid.front()};
  const auto rows = cfpower::run_sweep(cfg);
  if (!o.quiet) print_rows(rows);
  return finish(cfg, o, rows, !o.out.empty(), cfg.output);
}

int run_sweep_cmd(const CommonOpts& o) {
  cfpower::ExperimentConfig cfg = load(o);
  const auto rows = cfpower::run_sweep(cfg);
  return finish(cfg, o, rows, true, cfg.output);
}

int run_thresholds(const std::string& config, bool quiet) {
  std::vector<cfpower::ThresholdRow> table;
  if (config.empty()) {
    table = cfpower::example_threshold_table();
  } else {
    cfpower::ExperimentConfig cfg = cfpower::load_config(config);
    table.push_back({config, cfpower::config_threshold(cfg)});
  }
  if (!quiet)
    for (const auto& row : table)
      std::printf("%-10s  budget threshold %.6f\n", row.name.c_str(), row.pbar_o);
  return 0;
}

int run_reproduce(const std::string& preset, bool quiet) {
  std::vector<std::string> names;
  if (preset.empty() || preset == "all")
    names = cfpower::preset_names();
  else
    names = {preset};

  bool all_pass = true;
  for (const auto& name : names) {
    const auto checks = cfpower::reproduce_preset(name);
    for (const auto& c : checks) {
      all_pass = all_pass && c.pass;
      if (!quiet)
        std::printf("[%s] %s: %s (%s)\n", c.pass ? "PASS" : "FAIL", name.c_str(),
                    c.name.c_str(), c.detail.c_str());
    }
  }
  return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compute-and-forward power allocation experiments"};
  app.require_subcommand(1);

  CommonOpts solve_opts;
  std::optional<double> solve_pbar;
  CLI::App* solve = app.add_subcommand("solve", "run every configured algorithm at one budget");
  add_common(solve, solve_opts);
  solve->add_option("--pbar", solve_pbar, "power budget (default: first grid entry)");

  CommonOpts sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "run the full budget/algorithm grid to CSV");
  add_common(sweep, sweep_opts);

  std::string thresholds_config;
  bool thresholds_quiet = false;
  CLI::App* thresholds =
      app.add_subcommand("thresholds", "report the all-good-states budget threshold");
  thresholds->add_option("--config", thresholds_config,
                         "config file path or preset name (default: built-in examples)");
  thresholds->add_flag("--quiet", thresholds_quiet, "suppress the stdout report");

  std::string reproduce_preset;
  bool reproduce_quiet = false;
  CLI::App* reproduce =
      app.add_subcommand("reproduce", "check preset results against published values");
  reproduce->add_option("preset", reproduce_preset, "preset name or 'all'");
  reproduce->add_flag("--quiet", reproduce_quiet, "suppress the stdout report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve->parsed()) return run_solve(solve_opts, solve_pbar);
    if (sweep->parsed()) return run_sweep_cmd(sweep_opts);
    if (thresholds->parsed()) return run_thresholds(thresholds_config, thresholds_quiet);
    return run_reproduce(reproduce_preset, reproduce_quiet);
  } catch (const cfpower::argument_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
