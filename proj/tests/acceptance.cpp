// Acceptance checks: one PASS/FAIL line per criterion, detail lines indented.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "lidfl/aggregators.hpp"
#include "lidfl/analysis.hpp"
#include "lidfl/attacks.hpp"
#include "lidfl/config.hpp"
#include "lidfl/engine.hpp"
#include "lidfl/experiment.hpp"
#include "lidfl/voting.hpp"
#include "oracles.hpp"

using namespace lidfl;
using testing_helpers::random_dataset;
using testing_helpers::random_vector;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      details.push_back("violated: " + what);
    }
  }
  template <typename... Args>
  void note(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    details.emplace_back(buf);
  }
};

int g_failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out.pass = false;
    out.details.push_back(std::string("exception: ") + e.what());
  }
  std::printf("%s %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, title, seconds_since(start));
  for (const auto& d : out.details) std::printf("    %s\n", d.c_str());
  std::fflush(stdout);
  if (!out.pass) ++g_failures;
}

std::string csv_of(const RunResult& r) {
  std::ostringstream out;
  write_rounds_csv(out, r);
  return out.str();
}

// Experiment runs, memoized by run id so criteria can share cells.
std::map<std::string, double> g_final_acc;

double final_accuracy(const RunConfig& cfg) {
  const std::string id = run_id(cfg);
  const auto it = g_final_acc.find(id);
  if (it != g_final_acc.end()) return it->second;
  const double acc = run(cfg).final_best_test_acc();
  g_final_acc.emplace(id, acc);
  return acc;
}

struct CellStats {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> accs;
};

constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

CellStats over_seeds(RunConfig cfg) {
  CellStats s;
  for (std::uint64_t seed : kSeeds) {
    cfg.seed = seed;
    s.accs.push_back(final_accuracy(cfg));
  }
  s.mean = mean_std(s.accs).mean;
  s.std = sample_std(s.accs);
  return s;
}

// The desk-scale setting: 35 clients, 10-class Gaussian mixture, softmax
// regression, 1500 rounds, the default local-training hyperparameters.
RunConfig desk(Method method, double gamma, AttackKind attack) {
  RunConfig cfg;
  cfg.method = method;
  cfg.m = 35;
  cfg.gamma = gamma;
  cfg.rounds = 1500;
  cfg.eval_every = 1500;
  cfg.attack.kind = attack;
  cfg.vote = ByzantineVoteStrategy::worst;
  return cfg;
}

RunConfig clean_reference() {
  RunConfig cfg = desk(Method::lidfl, 1.0, AttackKind::none);
  cfg.q = 1;
  return cfg;
}

RunConfig lidfl_cell(AttackKind attack, std::size_t q = 2) {
  RunConfig cfg = desk(Method::lidfl, 0.4, attack);
  cfg.q = q;
  return cfg;
}

RunConfig baseline_cell(AggregatorKind agg, AttackKind attack) {
  RunConfig cfg = desk(Method::baseline, 0.4, attack);
  cfg.agg.kind = agg;
  return cfg;
}

std::string stats_text(const CellStats& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f +- %.4f", s.mean, s.std);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome ac1_gradients() {
  Outcome out;
  RngStream rng(101, "ac1");
  std::size_t coords = 0;
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const bool mlp = pair % 2 == 1;
    const std::size_t p = 2 + rng.below(4);
    const std::size_t classes = 2 + rng.below(4);
    const ModelSpec spec{mlp ? ModelKind::mlp : ModelKind::softmax_regression, p, classes, mlp ? 2 + rng.below(4) : 0,
                         rng.uniform(0.0, 0.1)};
    const Dataset data = random_dataset(p, classes, 1 + rng.below(20), rng);
    const ParamVector w = random_vector(spec.param_dim(), 0.7, rng);
    const ParamVector g = gradient(spec, w, data);
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double fd = oracle::fd_partial(spec, w, data, c, 1e-5);
      const double err = std::abs(fd - g[c]) / std::max(1.0, std::abs(g[c]));
      worst = std::max(worst, err);
      ++coords;
    }
  }
  out.note("%zu coordinates over 100 pairs, worst relative error %.3g", coords, worst);
  out.require(worst <= 1e-5, "finite-difference agreement <= 1e-5");
  return out;
}

Outcome ac2_convexity() {
  Outcome out;
  RngStream rng(102, "ac2");
  double worst_sc = -INFINITY;
  double worst_smooth = -INFINITY;
  double worst_lip = -INFINITY;
  for (int triple = 0; triple < 1000; ++triple) {
    const std::size_t p = 1 + rng.below(5);
    const std::size_t classes = 2 + rng.below(4);
    const ModelSpec spec{ModelKind::softmax_regression, p, classes, 0, 0.01};
    const Dataset data = random_dataset(p, classes, 1 + rng.below(30), rng);
    const ParamVector w = random_vector(spec.param_dim(), 2.0, rng);
    const ParamVector v = random_vector(spec.param_dim(), 2.0, rng);
    const double b = rng.uniform();
    const double dist2 = squared_distance(w, v);
    const double beta = smoothness_upper_bound(spec, data);

    // b f(w) + (1 - b) f(v) >= f(b w + (1 - b) v) + l2 b (1 - b) / 2 |w - v|^2
    const ParamVector mix = vec_add(vec_scale(b, w), vec_scale(1.0 - b, v));
    const double sc = loss(spec, mix, data) + spec.l2 * b * (1.0 - b) / 2.0 * dist2 -
                      (b * loss(spec, w, data) + (1.0 - b) * loss(spec, v, data));
    worst_sc = std::max(worst_sc, sc);

    // f(v) <= f(w) + <grad f(w), v - w> + beta / 2 |v - w|^2
    const ParamVector gw = gradient(spec, w, data);
    const double smooth = loss(spec, v, data) -
                          (loss(spec, w, data) + dot(gw, vec_sub(v, w)) + beta / 2.0 * dist2);
    worst_smooth = std::max(worst_smooth, smooth);
    const double lip = l2_distance(gradient(spec, v, data), gw) - beta * std::sqrt(dist2);
    worst_lip = std::max(worst_lip, lip);
  }
  out.note("max strong-convexity gap %.3g, smoothness gap %.3g, gradient-Lipschitz gap %.3g", worst_sc, worst_smooth,
           worst_lip);
  out.require(worst_sc <= 1e-9, "strong convexity within 1e-9");
  out.require(worst_smooth <= 1e-9, "smoothness upper bound within 1e-9");
  out.require(worst_lip <= 1e-9, "gradient Lipschitz bound within 1e-9");
  return out;
}

Outcome ac3_attacks() {
  Outcome out;
  RngStream rng(103, "ac3");
  double omn_err = 0.0;
  double epr_err = 0.0;
  bool sf_ok = true;
  bool lie_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.below(20);
    const std::size_t m = k + 1 + rng.below(20);
    const std::size_t d = 1 + rng.below(8);
    std::vector<ParamVector> honest;
    for (std::size_t i = 0; i < k; ++i) honest.push_back(random_vector(d, 3.0, rng));
    const OmniscientView view = make_omniscient_view(honest);

    const ParamVector target = omn_default_target(view, rng.uniform(0.5, 2.0));
    const ParamVector adv = craft_omn(view, k, m, target);
    ParamVector sum = ParamVector::zeros(d);
    for (const auto& u : honest) axpy_inplace(1.0, u, sum);
    axpy_inplace(static_cast<double>(m - k), adv, sum);
    omn_err = std::max(omn_err, l2_distance(vec_scale(1.0 / static_cast<double>(m), sum), target));

    const double mult = -1.1 * static_cast<double>(k) / static_cast<double>(m - k);
    const ParamVector epr = craft_epr(view, k, m);
    for (std::size_t c = 0; c < d; ++c) {
      epr_err = std::max(epr_err, std::abs(epr[c] - mult * view.mean[c]) / std::max(1.0, std::abs(mult * view.mean[c])));
    }

    sf_ok = sf_ok && craft_sf(craft_sf(honest.front())) == honest.front();
    lie_ok = lie_ok && craft_lie(view, 0.0) == view.mean;
  }
  out.note("OMN mean error %.3g, EPR multiplier relative error %.3g", omn_err, epr_err);
  out.require(omn_err <= 1e-9, "OMN mean reconstruction <= 1e-9");
  out.require(epr_err <= 1e-15, "EPR multiplier -1.1k/(m-k)");
  out.require(sf_ok, "SF involution exact");
  out.require(lie_ok, "LIE z=0 equals the honest mean exactly");
  return out;
}

// Multisets of size 1..max_size drawn from `alphabet`, each in a shuffled order.
void for_each_multiset(const std::vector<ParamVector>& alphabet, std::size_t max_size, RngStream& rng,
                       const std::function<void(const std::vector<ParamVector>&)>& fn) {
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (!pick.empty()) {
      std::vector<ParamVector> pts;
      for (std::size_t i : pick) pts.push_back(alphabet[i]);
      rng.shuffle(pts);
      fn(pts);
    }
    if (pick.size() == max_size) return;
    for (std::size_t i = from; i < alphabet.size(); ++i) {
      pick.push_back(i);
      rec(i);
      pick.pop_back();
    }
  };
  rec(0);
}

void for_each_sequence(const std::vector<double>& alphabet, std::size_t len,
                       const std::function<void(const std::vector<ParamVector>&)>& fn) {
  std::vector<std::size_t> digits(len, 0);
  while (true) {
    std::vector<ParamVector> pts;
    for (std::size_t d : digits) pts.push_back(ParamVector{alphabet[d]});
    fn(pts);
    std::size_t i = 0;
    while (i < len && ++digits[i] == alphabet.size()) digits[i++] = 0;
    if (i == len) return;
  }
}

struct GroupingTally {
  std::size_t sets = 0;
  std::size_t rknn_runs = 0;
  std::size_t mismatches = 0;
};

void compare_groupings(const std::vector<ParamVector>& pts, GroupingTally& t) {
  ++t.sets;
  for (std::size_t k = 1; k <= pts.size(); ++k) {
    for (const auto& expected : oracle::rknn_all(pts, k)) {
      ++t.rknn_runs;
      std::size_t next = 0;
      bool bad = false;
      const GroupedAggregate got = rknn_groups(pts, k, [&](std::size_t remaining) {
        if (next >= expected.starts.size() || expected.starts[next] >= remaining) {
          bad = true;
          return std::size_t{0};
        }
        return expected.starts[next++];
      });
      if (bad || next != expected.starts.size() || got.groups != expected.groups) ++t.mismatches;
    }
    if (meb_groups(pts, k, true, ExecPolicy::serial).groups != oracle::meb_groups(pts, k)) ++t.mismatches;
  }
}

Outcome ac4_aggregators() {
  Outcome out;
  RngStream rng(104, "ac4");

  std::size_t cwm_sets = 0;
  std::size_t cwm_bad = 0;
  auto cwm_check = [&](const std::vector<ParamVector>& u) {
    ++cwm_sets;
    if (agg_cwm(u, ExecPolicy::serial) != oracle::cwm_by_sort(u)) ++cwm_bad;
  };
  std::vector<ParamVector> line;
  for (double x : {-2.0, 0.0, 0.5, 1.0, 3.0}) line.push_back(ParamVector{x});
  std::vector<ParamVector> plane;
  for (double x : {0.0, 1.0, 2.5}) {
    for (double y : {-1.0, 0.0, 2.0}) plane.push_back(ParamVector{x, y});
  }
  std::vector<ParamVector> cube;
  for (double x : {0.0, 1.0}) {
    for (double y : {0.0, 2.0}) {
      for (double z : {-1.0, 1.5}) cube.push_back(ParamVector{x, y, z});
    }
  }
  for_each_multiset(line, 7, rng, cwm_check);
  for_each_multiset(plane, 7, rng, cwm_check);
  for_each_multiset(cube, 7, rng, cwm_check);
  out.note("CWM: %zu multisets (dim 1-3, size <= 7), %zu mismatches", cwm_sets, cwm_bad);
  out.require(cwm_bad == 0, "CWM equals the sorting oracle");

  GroupingTally t;
  for (std::size_t len = 1; len <= 6; ++len) {
    for_each_sequence({0.0, 1.0, 2.0, 4.0}, len, [&](const std::vector<ParamVector>& pts) { compare_groupings(pts, t); });
  }
  for (unsigned mask = 1; mask < (1u << 9); ++mask) {
    if (__builtin_popcount(mask) > 6) continue;
    std::vector<ParamVector> pts;
    for (unsigned b = 0; b < 9; ++b) {
      if (mask & (1u << b)) pts.push_back(ParamVector{static_cast<double>(b % 3), static_cast<double>(b / 3)});
    }
    compare_groupings(pts, t);
  }
  out.note("RKNN/MEB: %zu point sets, %zu scripted RKNN start sequences, %zu mismatches", t.sets, t.rknn_runs,
           t.mismatches);
  out.require(t.mismatches == 0, "RKNN/MEB groups equal the brute-force oracle");

  double max_norm = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ParamVector> u;
    for (std::size_t i = 0, n = 1 + rng.below(35); i < n; ++i) u.push_back(random_vector(8, rng.uniform(0.0, 2.0), rng));
    max_norm = std::max(max_norm, l2_norm(agg_norm(u, 0.215771)));
  }
  out.note("Norm: max output norm %.9f over 1000 inputs", max_norm);
  out.require(max_norm <= 0.215771 * (1.0 + 1e-12), "Norm output <= 0.215771");
  return out;
}

Outcome ac5_voting() {
  Outcome out;
  const auto start = Clock::now();
  std::size_t profiles = 0;
  std::size_t pruned = 0;
  for (std::size_t m = 1; m <= 12; ++m) {
    for (std::size_t k = 1; k <= m; ++k) {
      const double gamma = static_cast<double>(k) / static_cast<double>(m);
      const std::size_t q_min = minimal_list_size(gamma);
      for (std::size_t q = q_min; q <= q_min + 2; ++q) {
        for (std::size_t best = 0; best <= q; ++best) {
          oracle::for_each_composition(m - k, q + 1, [&](const std::vector<std::size_t>& byz) {
            VoteTally t{byz};
            t.counts[best] += k;
            ++profiles;
            if (prune_index(t) == best) ++pruned;
          });
        }
      }
    }
  }
  const double secs = seconds_since(start);
  out.note("%zu vote profiles (m <= 12, q in [floor(1/gamma), floor(1/gamma)+2]), honest choice pruned %zu times",
           profiles, pruned);
  out.require(pruned == 0, "the unanimous honest choice is never pruned");
  out.require(secs < 60.0, "runtime < 60 s");
  return out;
}

Outcome ac6_failure_bound() {
  Outcome out;
  RngStream rng(106, "ac6");
  double worst_ratio = 0.0;
  for (int i = 0; i < 20; ++i) {
    FailureTrialConfig cfg;
    do {
      cfg.m = 4 + rng.below(47);
      cfg.k = 1 + rng.below(cfg.m);
      cfg.q = 1 + rng.below(4);
      cfg.p = rng.uniform(0.8, 1.0);
      cfg.eta = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, 0.5);
    } while (!cfg.precondition_holds());
    cfg.gap = 2.0 * cfg.eta + rng.uniform(0.05, 1.0);
    cfg.H = 10.0;
    cfg.trials = 100000;
    const FailureEstimate f = simulate_failure_rate(cfg, rng.derive(static_cast<std::uint64_t>(i)));
    out.note("m=%2zu k=%2zu q=%zu p=%.4f eta=%.3f gap=%.3f: rate %.5f bound %.5f", cfg.m, cfg.k, cfg.q, cfg.p, cfg.eta,
             cfg.gap, f.rate, f.bound);
    out.require(f.rate <= f.bound, "rate <= bound for configuration " + std::to_string(i));
    if (f.bound > 0.0) worst_ratio = std::max(worst_ratio, f.rate / f.bound);
  }
  out.note("largest rate/bound ratio %.4f", worst_ratio);
  return out;
}

Outcome ac7_determinism() {
  Outcome out;
  std::size_t runs = 0;
  for (Method method : {Method::lidfl, Method::lidfl_agg, Method::baseline}) {
    for (AttackKind attack : {AttackKind::none, AttackKind::gauss, AttackKind::lf, AttackKind::lie, AttackKind::omn}) {
      RunConfig cfg = desk(method, 0.4, attack);
      cfg.rounds = 60;
      cfg.eval_every = 10;
      cfg.agg.kind = method == Method::baseline ? AggregatorKind::gm : AggregatorKind::rknn;
      cfg.seed = 77;
      const std::string a = csv_of(run(cfg));
      const std::string b = csv_of(run(cfg));
      cfg.policy = ExecPolicy::serial;
      const std::string c = csv_of(run(cfg));
      runs += 3;
      out.require(a == b && a == c, method_label(cfg) + "/" + to_string(attack) + " byte-identical");
    }
  }
  out.note("%zu runs compared (repeat and serial vs parallel)", runs);
  return out;
}

Outcome ac8_robustness() {
  Outcome out;
  const auto start = Clock::now();
  const CellStats clean = over_seeds(clean_reference());
  out.note("clean (gamma=1, q=1): %s", stats_text(clean).c_str());
  double max_std = clean.std;
  for (AttackKind attack : {AttackKind::epr, AttackKind::lf, AttackKind::lie, AttackKind::omn, AttackKind::sf}) {
    const CellStats s = over_seeds(lidfl_cell(attack));
    out.note("lidfl q=2 %-4s: %s (ratio %.3f)", to_string(attack).c_str(), stats_text(s).c_str(), s.mean / clean.mean);
    out.require(s.mean >= 0.9 * clean.mean, "lidfl under " + to_string(attack) + " >= 0.9 x clean");
    max_std = std::max(max_std, s.std);
  }
  const double chance = 1.0 / 10.0;
  for (AggregatorKind agg : {AggregatorKind::fedavg, AggregatorKind::cwm}) {
    for (AttackKind attack : {AttackKind::omn, AttackKind::sf}) {
      const CellStats s = over_seeds(baseline_cell(agg, attack));
      out.note("%-6s %-4s: %s", to_string(agg).c_str(), to_string(attack).c_str(), stats_text(s).c_str());
      out.require(s.mean <= chance + 0.05, to_string(agg) + " under " + to_string(attack) + " <= chance + 0.05");
      max_std = std::max(max_std, s.std);
    }
  }
  const double secs = seconds_since(start);
  out.note("largest per-cell seed std %.4f", max_std);
  out.require(max_std <= 0.05, "per-seed accuracy std <= 0.05");
  out.require(secs < 15.0 * 60.0, "runtime < 15 min");
  return out;
}

Outcome ac9_gauss() {
  Outcome out;
  const CellStats clean = over_seeds(clean_reference());
  const CellStats gauss = over_seeds(lidfl_cell(AttackKind::gauss));
  const CellStats norm = over_seeds(baseline_cell(AggregatorKind::norm, AttackKind::gauss));
  out.note("clean %s, lidfl under gauss %s", stats_text(clean).c_str(), stats_text(gauss).c_str());
  out.note("norm baseline under gauss (informational) %s", stats_text(norm).c_str());
  out.require(std::abs(gauss.mean - clean.mean) <= 0.1, "lidfl under gauss within 0.1 of clean");
  return out;
}

Outcome ac10_list_size() {
  Outcome out;
  std::vector<CellStats> cells;
  for (std::size_t q = 2; q <= 5; ++q) {
    cells.push_back(over_seeds(lidfl_cell(AttackKind::sf, q)));
    out.note("q=%zu: %s", q, stats_text(cells.back()).c_str());
  }
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& c : cells) {
    lo = std::min(lo, c.mean);
    hi = std::max(hi, c.mean);
  }
  double diff = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i) diff += cells[i].std - cells[i - 1].std;
  diff /= static_cast<double>(cells.size() - 1);
  out.note("mean spread %.4f, average successive std change %.5f", hi - lo, diff);
  out.require(hi - lo <= 0.03, "means within 0.03 of each other");
  out.require(diff <= 0.0, "std non-increasing in q on average");
  return out;
}

Outcome ac11_envelope() {
  Outcome out;
  const auto start = Clock::now();
  for (const bool adversarial : {false, true}) {
    RunConfig cfg = desk(Method::lidfl, adversarial ? 0.4 : 1.0, adversarial ? AttackKind::sf : AttackKind::none);
    cfg.q = adversarial ? 2 : 1;
    cfg.rounds = 1500;
    cfg.oracle = ValidationOracle{OracleMode::synthetic_noisy, 0.0, 1.0, 10.0};

    const Federation fed0 = build_federation(cfg);
    const LossProfile profile = estimate_loss_profile(fed0.spec, fed0.honest_pool(), 200, RngStream(cfg.seed, "profile"));
    cfg.train = LocalTrainConfig{1, 1u << 20, 1.0 / profile.beta, 0.0, std::nullopt};
    const FStarEstimate fs = estimate_f_star(fed0.spec, fed0.honest_train_sets(), profile.beta);
    const EnvelopeParams params = envelope_from_profile(profile, cfg.gamma, cfg.list_size());

    // Each seed draws its own federation; losses are shifted so the excess is
    // relative to that seed's optimum.
    std::vector<RunResult> runs;
    for (std::uint64_t seed : kSeeds) {
      RunConfig c = cfg;
      c.seed = seed;
      const Federation fed = build_federation(c);
      const FStarEstimate fs_seed = seed == cfg.seed ? fs : estimate_f_star(fed.spec, fed.honest_train_sets(), profile.beta);
      RunResult r = run_lidfl(c, fed);
      const double shift = fs.f_star - fs_seed.f_star;
      r.initial_global_loss += shift;
      for (auto& rec : r.rounds) rec.best_global_loss += shift;
      runs.push_back(std::move(r));
    }
    const EnvelopeReport rep = check_envelope(runs, params, fs.f_star, 0.05);
    out.note("%s: alpha=%.4g beta=%.4g rho=%.6f f*=%.6f initial excess %.4f final excess %.4f bound %.4f",
             adversarial ? "gamma=0.4 q=2 sf" : "gamma=1 q=1 clean", profile.alpha, profile.beta, rep.rho, fs.f_star,
             rep.initial_excess, rep.averaged_excess.back(), rep.bound.back());
    out.note("    violations %zu/%zu (%.2f%%), verdict %s", rep.violations, rep.averaged_excess.size(),
             100.0 * rep.violation_fraction, to_string(rep.verdict).c_str());
    out.require(rep.passed(), std::string(adversarial ? "adversarial" : "control") + " run within the envelope");
    out.require(fs.converged, "f* optimizer converged");
  }
  out.require(seconds_since(start) < 300.0, "runtime < 5 min");
  return out;
}

Outcome ac12_lidfl_agg() {
  Outcome out;
  const CellStats plain = over_seeds(lidfl_cell(AttackKind::sf));
  RunConfig agg = desk(Method::lidfl_agg, 0.4, AttackKind::sf);
  agg.q = 2;
  agg.agg.kind = AggregatorKind::rknn;
  const CellStats rknn = over_seeds(agg);
  out.note("lidfl %s, lidfl+rknn %s", stats_text(plain).c_str(), stats_text(rknn).c_str());
  out.require(rknn.mean >= plain.mean - 0.02, "lidfl+rknn >= lidfl - 0.02");
  return out;
}

}  // namespace

int main() {
  std::printf("lidfl acceptance, %d hardware thread(s)\n", hardware_threads());
  report("AC1", "gradient finite differences", ac1_gradients);
  report("AC2", "strong convexity and smoothness", ac2_convexity);
  report("AC3", "attack algebra", ac3_attacks);
  report("AC4", "aggregator oracles", ac4_aggregators);
  report("AC5", "voting survival", ac5_voting);
  report("AC6", "vote failure Monte Carlo vs bound", ac6_failure_bound);
  report("AC7", "determinism", ac7_determinism);
  report("AC8", "robustness without an honest majority", ac8_robustness);
  report("AC9", "gauss attack", ac9_gauss);
  report("AC10", "list-size stability", ac10_list_size);
  report("AC11", "convergence envelope", ac11_envelope);
  report("AC12", "list protocol with rknn", ac12_lidfl_agg);
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
