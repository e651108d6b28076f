#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lidfl/analysis.hpp"
#include "lidfl/engine.hpp"

namespace lidfl {

inline constexpr const char* kRoundsSchema = "lidfl-rounds/1";
inline constexpr const char* kSummarySchema = "lidfl-summary/1";
inline constexpr const char* kPlotSchema = "lidfl-plot/1";

/// Row 1 is `# schema=<kRoundsSchema>`, row 2 the column header. Reals use
/// the shortest round-trip form; rounds without a test evaluation leave
/// best_test_acc empty, and rounds without a sampled client leave it empty.
void write_rounds_csv(std::ostream& out, const RunResult& result);

/// Series label used in reports: the method, plus the aggregator for
/// baseline and lidfl_agg runs and the list size for list methods.
std::string method_label(const RunConfig& cfg);

struct RunOutcome {
  std::string run_id;
  RunConfig config;
  bool ok = false;
  bool resumed = false;
  std::string error;
  double final_best_test_acc = 0.0;
  double final_best_global_loss = 0.0;
  bool regime_warning = false;
};

struct ExperimentSummary {
  std::vector<RunOutcome> runs;
  SweepSummary sweep;

  [[nodiscard]] std::size_t failures() const;
};

/// Runs every config not already completed in `out_dir` with up to
/// `parallelism` concurrent runs, writes rounds_<id>.csv and run_<id>.json
/// per run, then summary.json. A failing run is recorded and the grid
/// continues.
ExperimentSummary run_experiments(const std::vector<RunConfig>& configs, std::size_t parallelism,
                                  const std::filesystem::path& out_dir);

struct PlotExport {
  std::vector<std::filesystem::path> files;
};

/// Reads summary.json and the rounds files of the successful runs. Writes one
/// plot_gamma<g>.csv per gamma (round, method, attack, mean_acc, std_acc),
/// table.csv and worst.csv from the sweep summary, and with `svg` a line
/// chart per figure.
PlotExport export_plots(const std::filesystem::path& out_dir, bool svg = true);

}  // namespace lidfl
