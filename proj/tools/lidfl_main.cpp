// Command-line driver: run experiment grids, export reports, check theory.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lidfl/analysis.hpp"
#include "lidfl/config.hpp"
#include "lidfl/experiment.hpp"

namespace fs = std::filesystem;
using namespace lidfl;

namespace {

struct CommonOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> eval_every;
};

std::vector<RunConfig> load_grid(const std::string& path, const CommonOverrides& ov) {
  ExperimentFile file = read_experiment_file(path);
  apply_env_overrides(file, process_env());
  if (ov.seed) file.set(ConfigEntry{"seed", {std::to_string(*ov.seed)}, false, 0});
  if (ov.eval_every) file.set(ConfigEntry{"eval.every", {std::to_string(*ov.eval_every)}, false, 0});
  return expand(file);
}

int cmd_run(const std::string& config, std::size_t parallelism, const std::string& out,
            const CommonOverrides& ov) {
  const auto grid = load_grid(config, ov);
  std::printf("%zu run(s), parallelism %zu, output %s\n", grid.size(), parallelism, out.c_str());
  const ExperimentSummary summary = run_experiments(grid, parallelism, out);
  for (const auto& r : summary.runs) {
    if (r.ok) {
      std::printf("%s %-14s attack=%-5s gamma=%g q=%zu seed=%llu acc=%.4f%s%s\n", r.run_id.c_str(),
                  method_label(r.config).c_str(), to_string(r.config.attack.kind).c_str(), r.config.gamma,
                  r.config.list_size(), static_cast<unsigned long long>(r.config.seed), r.final_best_test_acc,
                  r.resumed ? " (cached)" : "", r.regime_warning ? " [regime warning]" : "");
    } else {
      std::printf("%s FAILED: %s\n", r.run_id.c_str(), r.error.c_str());
    }
  }
  return summary.failures() == 0 ? 0 : 1;
}

int cmd_report(const std::string& out, bool svg) {
  const PlotExport exp = export_plots(out, svg);
  for (const auto& f : exp.files) std::printf("wrote %s\n", f.string().c_str());
  std::ifstream worst(fs::path(out) / "worst.csv");
  std::cout << worst.rdbuf();
  return 0;
}

int cmd_check_theory(const std::string& config, const CommonOverrides& ov, std::size_t trials, double mc_p,
                     double slack, std::size_t profile_trials) {
  const auto grid = load_grid(config, ov);
  const RunConfig& first = grid.front();
  for (const auto& c : grid) {
    if (emit_config([&] {
          RunConfig a = c;
          a.seed = first.seed;
          return a;
        }()) != emit_config(first)) {
      throw ConfigError("check-theory expects a grid that differs only in seed");
    }
  }

  const Federation fed = build_federation(first);
  const Dataset pool = fed.honest_pool();
  const LossProfile profile = estimate_loss_profile(fed.spec, pool, profile_trials, RngStream(first.seed, "profile"));
  std::printf("loss profile: alpha=%.6g beta=%.6g (%zu pairs, %s)\n", profile.alpha, profile.beta, profile.samples,
              profile.convex ? "convex" : "non-convex");
  if (!profile.convex) std::printf("note: the envelope only applies to convex models\n");

  const double eta = first.oracle.mode == OracleMode::synthetic_noisy ? first.oracle.eta : 0.0;
  const EnvelopeParams params = envelope_from_profile(profile, first.gamma, first.list_size(), 0.0, eta);
  const FStarEstimate fs_est = estimate_f_star(fed.spec, fed.honest_train_sets(), profile.beta);
  std::printf("f* = %.10g after %zu steps (grad norm %.3g, %s)\n", fs_est.f_star, fs_est.steps, fs_est.grad_norm,
              fs_est.converged ? "converged" : "not converged");

  std::vector<RunResult> results;
  for (const auto& c : grid) results.push_back(run(c));
  const EnvelopeReport rep = check_envelope(results, params, fs_est.f_star, slack);
  std::printf("envelope: rho=%.6g floor=%.6g violations=%zu/%zu (%.2f%%) -> %s%s%s\n", rep.rho, rep.floor,
              rep.violations, rep.averaged_excess.size(), 100.0 * rep.violation_fraction,
              to_string(rep.verdict).c_str(), rep.diagnostic.empty() ? "" : ": ", rep.diagnostic.c_str());

  FailureTrialConfig mc;
  mc.m = first.m;
  mc.k = first.honest_count();
  mc.q = first.list_size();
  mc.p = first.oracle.mode == OracleMode::synthetic_noisy && first.oracle.p < 1.0 ? first.oracle.p : mc_p;
  mc.eta = eta;
  mc.gap = std::max(2.0 * eta, 1.0);
  mc.H = first.oracle.H;
  mc.trials = trials;
  if (mc.precondition_holds()) {
    const FailureEstimate f = simulate_failure_rate(mc, RngStream(first.seed, "failure-mc"));
    std::printf("vote failure: m=%zu k=%zu q=%zu p=%g rate=%.6f bound=%.6f -> %s\n", mc.m, mc.k, mc.q, mc.p, f.rate,
                f.bound, f.rate <= f.bound ? "within bound" : "EXCEEDS bound");
  } else {
    std::printf("vote failure: p^(q+1) <= 1/((q+1) gamma) for p=%g; bound does not apply\n", mc.p);
  }
  return rep.verdict == EnvelopeVerdict::fail ? 1 : 0;
}

int cmd_keys() {
  for (const auto& k : config_keys()) {
    std::printf("%-24s %s%s\n", k.name.c_str(), k.help.c_str(), k.sweepable ? " [sweep]" : "");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"List-decodable federated learning simulator"};
  app.require_subcommand(1);

  CommonOverrides ov;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;

  std::string config;
  std::size_t parallelism = 1;
  std::string out = "out";
  auto* run_cmd = app.add_subcommand("run", "Run every cell of an experiment grid");
  run_cmd->add_option("config", config, "Experiment file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--parallelism,-j", parallelism, "Concurrent runs")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out,-o", out, "Output directory");
  auto* run_seed = run_cmd->add_option("--seed", seed, "Override the master seed");
  auto* run_eval = run_cmd->add_option("--eval-every", eval_every, "Override eval.every")->check(CLI::PositiveNumber);

  std::string report_dir;
  bool no_svg = false;
  auto* report_cmd = app.add_subcommand("report", "Export plot data and tables from a finished run directory");
  report_cmd->add_option("out-dir", report_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_flag("--no-svg", no_svg, "Skip SVG charts");

  std::string theory_config;
  std::size_t trials = 100000;
  double mc_p = 0.95;
  double slack = 0.05;
  std::size_t profile_trials = 200;
  auto* theory_cmd = app.add_subcommand("check-theory", "Envelope and vote-failure checks for one setting");
  theory_cmd->add_option("config", theory_config, "Experiment file")->required()->check(CLI::ExistingFile);
  theory_cmd->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  theory_cmd->add_option("--p", mc_p, "Oracle accuracy for the Monte Carlo when the run's oracle is exact");
  theory_cmd->add_option("--slack", slack, "Allowed fraction of envelope violations");
  theory_cmd->add_option("--profile-trials", profile_trials, "Point pairs for the loss profile");
  auto* theory_seed = theory_cmd->add_option("--seed", seed, "Override the master seed");
  auto* theory_eval = theory_cmd->add_option("--eval-every", eval_every, "Override eval.every");

  auto* keys_cmd = app.add_subcommand("keys", "List configuration keys");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_seed || *theory_seed) ov.seed = seed;
    if (*run_eval || *theory_eval) ov.eval_every = eval_every;
    if (*run_cmd) return cmd_run(config, parallelism, out, ov);
    if (*report_cmd) return cmd_report(report_dir, !no_svg);
    if (*theory_cmd) return cmd_check_theory(theory_config, ov, trials, mc_p, slack, profile_trials);
    if (*keys_cmd) return cmd_keys();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
