// Command-line front end: solve, reference, compare, sweep.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "lpinn/lpinn.hpp"

namespace {

using namespace lpinn;

constexpr int kExitConfig = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitRuntime = 3;

/// Registers one string flag per RunConfig key (underscores become dashes)
/// and applies the given ones over the config file.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;
  bool smooth = false;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "key=value configuration file; flags override it");
    for (const auto& key : RunConfig::keys()) {
      if (key == "smooth_lambda") continue;
      std::string flag = key;
      for (auto& c : flag)
        if (c == '_') c = '-';
      app->add_option("--" + flag, values[key], "override '" + key + "'");
    }
    app->add_flag("--smooth-lambda", smooth, "exponential moving average of lambda across iterations");
  }

  RunConfig resolve(CLI::App* app) const {
    RunConfig cfg = file.empty() ? RunConfig{} : RunConfig::load(file);
    for (const auto& [key, value] : values) {
      std::string flag = "--" + key;
      for (auto& c : flag)
        if (c == '_') c = '-';
      if (app->count(flag) > 0) cfg.set(key, value);
    }
    if (smooth) cfg.smooth_lambda = true;
    cfg.validate();
    return cfg;
  }
};

RunRecord run(const RunConfig& cfg) {
  const TrainConfig t = cfg.train_config();
  if (cfg.problem == "lorenz") return train(cfg.lorenz(), t);
  return train(cfg.burgers(), t);
}

SweepResult run_sweep(const RunConfig& cfg, std::size_t n, unsigned workers) {
  const TrainConfig t = cfg.train_config();
  if (cfg.problem == "lorenz") return seed_sweep(cfg.lorenz(), t, n, workers);
  return seed_sweep(cfg.burgers(), t, n, workers);
}

int cmd_solve(const RunConfig& cfg) {
  const RunRecord r = run(cfg);
  write_run(cfg.out, cfg, r);
  std::printf("loss %s -> %s, final-time error %s, %.2f s\n", fmt17(r.loss.front()).c_str(),
              fmt17(r.loss.back()).c_str(), fmt17(r.snapshots.back().final_error).c_str(), r.wall_seconds);
  return 0;
}

int cmd_reference(const RunConfig& cfg, std::size_t fd_nx, std::size_t fd_nt) {
  std::string bytes;
  if (cfg.problem == "lorenz") {
    const LorenzProblem p = cfg.lorenz();
    p.validate();
    const std::string key = "lorenz|" + fmt17(p.sigma) + "|" + fmt17(p.rho) + "|" + fmt17(p.beta) + "|" +
                            fmt17(p.T) + "|" + std::to_string(p.n_t);
    bytes = cached("lorenz", key, [&] { return lorenz_reference_csv(p); });
  } else {
    const BurgersProblem p = cfg.burgers();
    p.validate();
    const FdConfig fd{fd_nx, fd_nt};
    const std::string key = "burgers|" + fmt17(p.nu) + "|" + fmt17(p.T) + "|" + std::to_string(fd.nx) + "|" +
                            std::to_string(fd.nt);
    const BurgersField field = solve_burgers_fd(p, fd);
    bytes = cached("burgers", key, [&] { return burgers_reference_csv(field); });
    const double d = fd_analytic_discrepancy(p, field, gauss_hermite(50));
    std::printf("fd_analytic_max_abs_diff=%s\n", fmt17(d).c_str());
  }
  atomic_write(cfg.out, bytes);
  std::printf("wrote %s\n", cfg.out.c_str());
  return 0;
}

struct SchemeSpec {
  std::string label;
  RunConfig cfg;
};

/// "name" or "exponential:<rate>".
SchemeSpec parse_spec(const RunConfig& base, const std::string& spec) {
  SchemeSpec s{spec, base};
  const auto colon = spec.find(':');
  s.cfg.set("scheme", spec.substr(0, colon));
  if (colon != std::string::npos) s.cfg.set("lambda", spec.substr(colon + 1));
  s.cfg.validate();
  return s;
}

int cmd_compare(const RunConfig& base, const std::vector<std::string>& specs) {
  std::vector<SchemeSpec> runs;
  for (const auto& s : specs) runs.push_back(parse_spec(base, s));
  if (runs.empty()) runs.push_back({base.scheme, base});
  std::vector<RunRecord> records;
  for (auto& r : runs) {
    r.cfg.out = (fs::path(base.out) / r.label).string();
    records.push_back(run(r.cfg));
    write_run(r.cfg.out, r.cfg, records.back());
  }
  std::vector<std::string> header{"iteration"};
  for (const auto& r : runs) header.push_back("loss_" + r.label);
  for (const auto& r : runs) header.push_back("final_error_" + r.label);
  CsvBuilder csv(header);
  std::size_t n = 0;
  for (const auto& rec : records) n = std::max(n, rec.loss.size());
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::string> row{std::to_string(k)};
    for (const auto& rec : records) row.push_back(k < rec.loss.size() ? fmt17(rec.loss[k]) : "");
    for (const auto& rec : records) {
      std::string cell;
      for (const auto& s : rec.snapshots)
        if (s.iteration == k) cell = fmt17(s.final_error);
      row.push_back(cell);
    }
    csv.row_strings(row);
  }
  atomic_write(fs::path(base.out) / "comparison.csv", csv.str());
  for (std::size_t i = 0; i < runs.size(); ++i)
    std::printf("%-20s final loss %s  final-time error %s\n", runs[i].label.c_str(),
                fmt17(records[i].loss.back()).c_str(), fmt17(records[i].snapshots.back().final_error).c_str());
  return 0;
}

int cmd_sweep(const RunConfig& cfg, std::size_t n_seeds, unsigned workers) {
  const SweepResult s = run_sweep(cfg, n_seeds, workers);
  CsvBuilder loss({"iteration", "loss_q025", "loss_median", "loss_q975"});
  for (std::size_t k = 0; k < s.loss.median.size(); ++k)
    loss.row(k, s.loss.lower[k], s.loss.median[k], s.loss.upper[k]);
  CsvBuilder err({"iteration", "final_error_q025", "final_error_median", "final_error_q975"});
  const auto& snaps = s.runs.front().snapshots;
  for (std::size_t k = 0; k < s.final_error.median.size(); ++k)
    err.row(snaps[k].iteration, s.final_error.lower[k], s.final_error.median[k], s.final_error.upper[k]);
  const fs::path dir = cfg.out;
  atomic_write(dir / "sweep_loss_quantiles.csv", loss.str());
  atomic_write(dir / "sweep_final_error_quantiles.csv", err.str());
  atomic_write(dir / "manifest.txt", manifest(cfg, {{"n_seeds", std::to_string(n_seeds)}}));
  std::printf("median loss %s -> %s over %zu seeds\n", fmt17(s.loss.median.front()).c_str(),
              fmt17(s.loss.median.back()).c_str(), n_seeds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed network training with time-weighted residual losses"};
  app.require_subcommand(1);

  ConfigFlags solve_flags, ref_flags, cmp_flags, sweep_flags;
  auto* solve = app.add_subcommand("solve", "train one network and write run CSVs");
  solve_flags.attach(solve);

  auto* reference = app.add_subcommand("reference", "write the reference solution as CSV");
  ref_flags.attach(reference);
  std::size_t fd_nx = FdConfig{}.nx, fd_nt = FdConfig{}.nt;
  reference->add_option("--fd-nx", fd_nx, "finite-difference points including both ends");
  reference->add_option("--fd-nt", fd_nt, "finite-difference time steps");

  auto* compare = app.add_subcommand("compare", "train several schemes from the same seed");
  cmp_flags.attach(compare);
  std::vector<std::string> specs;
  compare->add_option("--run", specs, "scheme spec, e.g. lyapunov or exponential:13.8 (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "quantile bands over consecutive seeds");
  sweep_flags.attach(sweep);
  std::size_t n_seeds = 10;
  unsigned workers = 0;
  sweep->add_option("--n-seeds", n_seeds, "number of seeds starting at --seed");
  sweep->add_option("--workers", workers, "parallel runs (0: hardware threads)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(solve_flags.resolve(solve));
    if (*reference) return cmd_reference(ref_flags.resolve(reference), fd_nx, fd_nt);
    if (*compare) return cmd_compare(cmp_flags.resolve(compare), specs);
    if (*sweep) return cmd_sweep(sweep_flags.resolve(sweep), n_seeds, workers);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
