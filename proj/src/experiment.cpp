#include "lidfl/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lidfl/config.hpp"

namespace lidfl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json outcome_json(const RunOutcome& o) {
  json j;
  j["run_id"] = o.run_id;
  j["method"] = to_string(o.config.method);
  j["label"] = method_label(o.config);
  j["attack"] = to_string(o.config.attack.kind);
  j["agg"] = to_string(o.config.agg.kind);
  j["vote"] = to_string(o.config.vote);
  j["gamma"] = o.config.gamma;
  j["q"] = o.config.list_size();
  j["seed"] = o.config.seed;
  j["status"] = o.ok ? "ok" : "failed";
  j["regime_warning"] = o.regime_warning;
  if (o.ok) {
    j["final_best_test_acc"] = o.final_best_test_acc;
    j["final_best_global_loss"] = o.final_best_global_loss;
  } else {
    j["error"] = o.error;
  }
  j["config"] = emit_config(o.config);
  return j;
}

RunOutcome outcome_from_json(const json& j) {
  RunOutcome o;
  o.run_id = j.at("run_id").get<std::string>();
  o.config = expand(parse_experiment_text(j.at("config").get<std::string>(), "run_" + o.run_id)).at(0);
  o.ok = j.at("status").get<std::string>() == "ok";
  o.regime_warning = j.at("regime_warning").get<bool>();
  if (o.ok) {
    o.final_best_test_acc = j.at("final_best_test_acc").get<double>();
    o.final_best_global_loss = j.at("final_best_global_loss").get<double>();
  } else {
    o.error = j.value("error", "");
  }
  return o;
}

RunOutcome execute(const RunConfig& cfg, ExecPolicy policy, const std::string& id, const fs::path& out_dir) {
  RunOutcome o;
  o.run_id = id;
  o.config = cfg;
  try {
    RunConfig effective = cfg;
    effective.policy = policy;
    const RunResult result = run(effective);
    std::ostringstream csv;
    write_rounds_csv(csv, result);
    write_atomic(out_dir / ("rounds_" + id + ".csv"), csv.str());
    o.ok = true;
    o.final_best_test_acc = result.final_best_test_acc();
    o.final_best_global_loss = result.final_best_global_loss;
    o.regime_warning = result.regime_warning;
  } catch (const std::exception& e) {
    o.ok = false;
    o.error = e.what();
    o.regime_warning = !cfg.regime_ok();
  }
  // Failed runs are not cached, so a rerun retries them.
  if (o.ok) write_atomic(out_dir / ("run_" + id + ".json"), outcome_json(o).dump(2) + "\n");
  return o;
}

std::vector<SweepRun> sweep_runs(const std::vector<RunOutcome>& runs) {
  std::vector<SweepRun> out;
  for (const auto& o : runs) {
    if (!o.ok) continue;
    out.push_back(SweepRun{method_label(o.config), to_string(o.config.attack.kind), o.config.list_size(),
                           o.config.gamma, o.config.seed, o.final_best_test_acc});
  }
  return out;
}

json sweep_json(const SweepSummary& s) {
  json cells = json::array();
  for (const auto& c : s.cells) {
    cells.push_back({{"method", c.method},
                     {"attack", c.attack},
                     {"q", c.q},
                     {"gamma", c.gamma},
                     {"runs", c.runs},
                     {"mean", c.mean},
                     {"std", c.std}});
  }
  json worst = json::array();
  for (const auto& w : s.worst) {
    worst.push_back({{"method", w.method}, {"q", w.q}, {"gamma", w.gamma}, {"attack", w.attack}, {"mean", w.mean}});
  }
  return {{"cells", cells}, {"worst", worst}};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

/// (round, accuracy) pairs of the evaluated rounds.
std::vector<std::pair<std::size_t, double>> read_accuracy_series(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<std::pair<std::size_t, double>> out;
  std::size_t acc_col = std::string::npos;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split_csv_line(line);
    if (acc_col == std::string::npos) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] == "best_test_acc") acc_col = i;
      }
      if (acc_col == std::string::npos) throw DataError(path.string() + ": missing best_test_acc column");
      continue;
    }
    if (cols.size() <= acc_col || cols[acc_col].empty()) continue;
    out.emplace_back(static_cast<std::size_t>(std::stoull(cols[0])), std::stod(cols[acc_col]));
  }
  return out;
}

struct SeriesPoint {
  std::vector<double> accs;
};

void write_svg(const fs::path& path, const std::string& title,
               const std::map<std::pair<std::string, std::string>, std::map<std::size_t, SeriesPoint>>& series) {
  constexpr double W = 720, H = 420, L = 60, R = 220, Tm = 40, B = 50;
  std::size_t max_round = 1;
  for (const auto& [key, pts] : series) {
    if (!pts.empty()) max_round = std::max(max_round, pts.rbegin()->first);
  }
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  const double pw = W - L - R;
  const double ph = H - Tm - B;
  svg << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = Tm + ph * (1.0 - i / 4.0);
    svg << "<text x=\"" << L - 8 << "\" y=\"" << y + 4
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << real(i / 4.0) << "</text>\n";
  }
  svg << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 12
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">round (max " << max_round
      << ")</text>\n";
  std::size_t idx = 0;
  for (const auto& [key, pts] : series) {
    const char* color = colors[idx % 10];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [round, p] : pts) {
      double mean = 0.0;
      for (double a : p.accs) mean += a;
      mean /= static_cast<double>(p.accs.size());
      const double x = L + pw * static_cast<double>(round) / static_cast<double>(max_round);
      const double y = Tm + ph * (1.0 - std::clamp(mean, 0.0, 1.0));
      svg << x << "," << y << " ";
    }
    svg << "\"/>\n";
    const double ly = Tm + 14.0 * static_cast<double>(idx) + 10.0;
    svg << "<text x=\"" << L + pw + 10 << "\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << color << "\">" << key.first << " / " << key.second << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";
  write_atomic(path, svg.str());
}

}  // namespace

void write_rounds_csv(std::ostream& out, const RunResult& result) {
  out << "# schema=" << kRoundsSchema << "\n";
  out << "round,sampled_client,byzantine,model_added_loss,pruned_index,best_val_loss,best_test_acc\n";
  for (const auto& r : result.rounds) {
    out << r.round << ',';
    if (r.sampled_client != kNoIndex) out << r.sampled_client;
    out << ',' << (r.byzantine ? 1 : 0) << ',' << real(r.model_added_loss) << ',';
    if (r.pruned != kNoIndex) out << r.pruned;
    out << ',' << real(r.best_val_loss) << ',';
    if (!std::isnan(r.best_test_acc)) out << real(r.best_test_acc);
    out << '\n';
  }
}

std::string method_label(const RunConfig& cfg) {
  switch (cfg.method) {
    case Method::lidfl: return "lidfl";
    case Method::lidfl_agg: return "lidfl+" + to_string(cfg.agg.kind);
    case Method::baseline: return to_string(cfg.agg.kind);
  }
  return "lidfl";
}

std::size_t ExperimentSummary::failures() const {
  std::size_t n = 0;
  for (const auto& r : runs) n += r.ok ? 0 : 1;
  return n;
}

ExperimentSummary run_experiments(const std::vector<RunConfig>& configs, std::size_t parallelism,
                                  const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::string> ids;
  std::vector<std::size_t> todo;
  std::set<std::string> seen;
  ExperimentSummary summary;
  for (const auto& cfg : configs) {
    const std::string id = run_id(cfg);
    if (!seen.insert(id).second) continue;
    RunOutcome o;
    o.run_id = id;
    o.config = cfg;
    const fs::path meta = out_dir / ("run_" + id + ".json");
    if (fs::exists(meta) && fs::exists(out_dir / ("rounds_" + id + ".csv"))) {
      o = outcome_from_json(json::parse(read_file(meta)));
      o.config.policy = cfg.policy;
      o.resumed = true;
    } else {
      todo.push_back(summary.runs.size());
    }
    summary.runs.push_back(std::move(o));
  }

  const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, todo.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      RunOutcome& slot = summary.runs[todo[i]];
      // Concurrent runs each keep to one thread; results do not depend on it.
      const ExecPolicy policy = workers > 1 ? ExecPolicy::serial : slot.config.policy;
      slot = execute(slot.config, policy, slot.run_id, out_dir);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const auto runs = sweep_runs(summary.runs);
  summary.sweep = summarize_sweep(runs);
  json j;
  j["schema"] = kSummarySchema;
  j["runs"] = json::array();
  for (const auto& o : summary.runs) j["runs"].push_back(outcome_json(o));
  j["sweep"] = sweep_json(summary.sweep);
  write_atomic(out_dir / "summary.json", j.dump(2) + "\n");
  return summary;
}

PlotExport export_plots(const fs::path& out_dir, bool svg) {
  const fs::path summary_path = out_dir / "summary.json";
  if (!fs::exists(summary_path)) throw DataError("missing '" + summary_path.string() + "'");
  const json summary = json::parse(read_file(summary_path));

  std::vector<RunOutcome> runs;
  for (const auto& j : summary.at("runs")) runs.push_back(outcome_from_json(j));

  // gamma -> (label, attack) -> round -> accuracies across seeds.
  using Series = std::map<std::pair<std::string, std::string>, std::map<std::size_t, SeriesPoint>>;
  std::map<double, Series> figures;
  for (const auto& o : runs) {
    if (!o.ok) continue;
    const fs::path csv = out_dir / ("rounds_" + o.run_id + ".csv");
    if (!fs::exists(csv)) throw DataError("missing '" + csv.string() + "'");
    std::string label = method_label(o.config);
    if (o.config.method != Method::baseline) label += "(q=" + std::to_string(o.config.list_size()) + ")";
    auto& series = figures[o.config.gamma][{label, to_string(o.config.attack.kind)}];
    for (const auto& [round, acc] : read_accuracy_series(csv)) series[round].accs.push_back(acc);
  }

  PlotExport out;
  for (const auto& [gamma, series] : figures) {
    std::ostringstream csv;
    csv << "# schema=" << kPlotSchema << "\n";
    csv << "round,method,attack,mean_acc,std_acc\n";
    for (const auto& [key, pts] : series) {
      for (const auto& [round, p] : pts) {
        const double n = static_cast<double>(p.accs.size());
        double mean = 0.0;
        for (double a : p.accs) mean += a;
        mean /= n;
        double sd = 0.0;
        if (p.accs.size() > 1) {
          for (double a : p.accs) sd += (a - mean) * (a - mean);
          sd = std::sqrt(sd / (n - 1.0));
        }
        csv << round << ',' << key.first << ',' << key.second << ',' << real(mean) << ',' << real(sd) << '\n';
      }
    }
    const std::string stem = "plot_gamma" + real(gamma);
    const fs::path path = out_dir / (stem + ".csv");
    write_atomic(path, csv.str());
    out.files.push_back(path);
    if (svg) {
      const fs::path svg_path = out_dir / (stem + ".svg");
      write_svg(svg_path, "test accuracy, honest fraction " + real(gamma), series);
      out.files.push_back(svg_path);
    }
  }

  const SweepSummary sweep = summarize_sweep(sweep_runs(runs));
  std::ostringstream table;
  table << "method,attack,q,gamma,runs,mean_acc,std_acc\n";
  for (const auto& c : sweep.cells) {
    table << c.method << ',' << c.attack << ',' << c.q << ',' << real(c.gamma) << ',' << c.runs << ','
          << real(c.mean) << ',' << real(c.std) << '\n';
  }
  write_atomic(out_dir / "table.csv", table.str());
  out.files.push_back(out_dir / "table.csv");
  std::ostringstream worst;
  worst << "method,q,gamma,worst_attack,mean_acc\n";
  for (const auto& w : sweep.worst) {
    worst << w.method << ',' << w.q << ',' << real(w.gamma) << ',' << w.attack << ',' << real(w.mean) << '\n';
  }
  write_atomic(out_dir / "worst.csv", worst.str());
  out.files.push_back(out_dir / "worst.csv");
  return out;
}

}  // namespace lidfl
