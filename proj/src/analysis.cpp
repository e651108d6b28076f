#include "lidfl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "lidfl/voting.hpp"

namespace lidfl {

void EnvelopeParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("envelope: alpha must be >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("envelope: beta must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("envelope: gamma must be in (0, 1]");
  if (q == 0) throw ConfigError("envelope: q must be >= 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ConfigError("envelope: delta must be in [0, 1]");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("envelope: eta must be >= 0");
}

EnvelopeParams envelope_from_profile(const LossProfile& profile, double gamma, std::size_t q, double delta,
                                     double eta) {
  EnvelopeParams p;
  p.alpha = profile.alpha;
  p.beta = profile.beta;
  p.gamma = gamma;
  p.q = q;
  p.delta = delta;
  p.eta = eta;
  return p;
}

double contraction_factor(const EnvelopeParams& params) {
  params.validate();
  const double rho =
      1.0 - params.alpha * params.gamma * (1.0 - params.delta) / (params.beta * static_cast<double>(params.q));
  if (!(rho > 0.0)) {
    throw ConfigError("contraction factor " + std::to_string(rho) + " <= 0: alpha/beta is outside the analyzed regime");
  }
  return rho;
}

double envelope_floor(const EnvelopeParams& params) {
  params.validate();
  if (params.eta == 0.0) return 0.0;
  const double denom = params.alpha * params.gamma * (1.0 - params.delta);
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return 2.0 * params.eta * params.beta * static_cast<double>(params.q) / denom;
}

double eta_for_epsilon(const EnvelopeParams& params, double epsilon) {
  params.validate();
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  return epsilon * params.alpha * params.gamma /
         (2.0 * params.beta * static_cast<double>(params.q) * (1.0 - params.delta));
}

std::string to_string(EnvelopeVerdict verdict) {
  switch (verdict) {
    case EnvelopeVerdict::pass: return "pass";
    case EnvelopeVerdict::fail: return "fail";
    case EnvelopeVerdict::regime_violation: return "regime_violation";
  }
  return "fail";
}

EnvelopeReport check_envelope(std::span<const RunResult> runs, const EnvelopeParams& params,
                              std::optional<double> f_star, double slack) {
  if (!f_star) throw ConfigError("check_envelope: f_star is required");
  if (runs.empty()) throw std::invalid_argument("check_envelope: no runs");
  if (!(slack >= 0.0 && slack <= 1.0)) throw ConfigError("check_envelope: slack must be in [0, 1]");
  params.validate();
  const std::size_t rounds = runs.front().rounds.size();
  for (const auto& r : runs) {
    if (r.rounds.size() != rounds) throw std::invalid_argument("check_envelope: runs differ in round count");
  }

  EnvelopeReport rep;
  rep.slack = slack;
  const double n = static_cast<double>(runs.size());
  for (const auto& r : runs) rep.initial_excess += r.initial_global_loss - *f_star;
  rep.initial_excess /= n;

  rep.averaged_excess.assign(rounds, 0.0);
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < rounds; ++t) rep.averaged_excess[t] += r.rounds[t].best_global_loss - *f_star;
  }
  for (double& v : rep.averaged_excess) v /= n;

  bool regime = params.q >= minimal_list_size(params.gamma);
  try {
    rep.rho = contraction_factor(params);
  } catch (const ConfigError& e) {
    rep.verdict = EnvelopeVerdict::regime_violation;
    rep.diagnostic = e.what();
    return rep;
  }
  rep.floor = envelope_floor(params);

  rep.bound.resize(rounds);
  double decay = 1.0;
  for (std::size_t t = 0; t < rounds; ++t) {
    decay *= rep.rho;
    rep.bound[t] = decay * rep.initial_excess + rep.floor;
    // Absolute slack for round-off in losses that are already at the optimum.
    if (rep.averaged_excess[t] > rep.bound[t] + 1e-12) ++rep.violations;
  }
  rep.violation_fraction = rounds == 0 ? 0.0 : static_cast<double>(rep.violations) / static_cast<double>(rounds);

  if (!regime) {
    rep.verdict = EnvelopeVerdict::regime_violation;
    rep.diagnostic = "q = " + std::to_string(params.q) + " < floor(1/gamma) = " +
                     std::to_string(minimal_list_size(params.gamma));
  } else {
    rep.verdict = rep.violation_fraction <= slack ? EnvelopeVerdict::pass : EnvelopeVerdict::fail;
  }
  return rep;
}

namespace {

LossGradient mean_objective(const ModelSpec& spec, const ParamVector& w, std::span<const Dataset> sets) {
  LossGradient total{0.0, ParamVector::zeros(w.size())};
  for (const auto& s : sets) {
    const LossGradient lg = loss_and_gradient(spec, w, s);
    total.loss += lg.loss;
    axpy_inplace(1.0, lg.gradient, total.gradient);
  }
  const double inv = 1.0 / static_cast<double>(sets.size());
  total.loss *= inv;
  for (double& v : total.gradient) v *= inv;
  return total;
}

}  // namespace

FStarEstimate estimate_f_star(const ModelSpec& spec, std::span<const Dataset> client_sets, double beta,
                              std::size_t max_steps, double grad_tol) {
  if (client_sets.empty()) throw DataError("estimate_f_star: no client data");
  for (const auto& s : client_sets) {
    if (s.empty()) throw DataError("estimate_f_star: empty client data");
  }
  if (!(beta > 0.0)) throw ConfigError("estimate_f_star: beta must be > 0");

  FStarEstimate out;
  out.w = initial_parameters(spec, RngStream(0, "f-star"));
  double lr = 1.0 / beta;
  LossGradient cur = mean_objective(spec, out.w, client_sets);
  while (out.steps < max_steps) {
    out.grad_norm = l2_norm(cur.gradient);
    if (out.grad_norm <= grad_tol) {
      out.converged = true;
      break;
    }
    ParamVector next = vec_axpy(-lr, cur.gradient, out.w);
    LossGradient trial = mean_objective(spec, next, client_sets);
    ++out.steps;
    // Increases at round-off level are noise once the iterate is near the optimum.
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(cur.loss));
    if (trial.loss > cur.loss + noise) {
      lr *= 0.5;
      continue;
    }
    out.w = std::move(next);
    cur = std::move(trial);
  }
  if (!out.converged) out.grad_norm = l2_norm(cur.gradient);
  out.converged = out.converged || out.grad_norm <= grad_tol;
  out.f_star = cur.loss;
  return out;
}

void FailureTrialConfig::validate() const {
  if (m == 0) throw ConfigError("failure trial: m must be >= 1");
  if (k > m) throw ConfigError("failure trial: k must be <= m");
  if (q == 0) throw ConfigError("failure trial: q must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("failure trial: p must be in (0, 1]");
  if (!(eta >= 0.0)) throw ConfigError("failure trial: eta must be >= 0");
  if (!(gap > 0.0) || gap < 2.0 * eta) throw ConfigError("failure trial: gap must be positive and >= 2 eta");
  if (!(H > 0.0)) throw ConfigError("failure trial: H must be > 0");
  if (trials == 0) throw ConfigError("failure trial: trials must be >= 1");
}

bool FailureTrialConfig::precondition_holds() const {
  if (k == 0) return false;
  const double gamma = static_cast<double>(k) / static_cast<double>(m);
  return std::pow(p, static_cast<double>(q + 1)) > 1.0 / (static_cast<double>(q + 1) * gamma);
}

double failure_bound(std::size_t m, std::size_t k, std::size_t q, double p) {
  if (k == 0 || m == 0) return 1.0;
  const double gamma = static_cast<double>(k) / static_cast<double>(m);
  const double s = std::pow(p, static_cast<double>(q + 1)) - 1.0 / (static_cast<double>(q + 1) * gamma);
  if (!(s > 0.0)) return 1.0;
  return std::exp(-2.0 * s * s * static_cast<double>(k));
}

bool adversary_can_prune(std::size_t best_count, std::span<const std::size_t> other_counts,
                         std::size_t byzantine_votes) {
  std::size_t needed = 0;
  for (std::size_t c : other_counts) {
    if (c < best_count) needed += best_count - c;
    if (needed > byzantine_votes) return false;
  }
  return true;
}

FailureEstimate simulate_failure_rate(const FailureTrialConfig& cfg, const RngStream& rng, ExecPolicy policy) {
  cfg.validate();
  FailureEstimate out;
  out.precondition = cfg.precondition_holds();
  if (cfg.require_regime && !out.precondition) {
    const double gamma = static_cast<double>(cfg.k) / static_cast<double>(cfg.m);
    throw ConfigError("failure trial outside its regime: p^(q+1) = " +
                      std::to_string(std::pow(cfg.p, static_cast<double>(cfg.q + 1))) +
                      " must exceed 1/((q+1) gamma) = " +
                      std::to_string(1.0 / (static_cast<double>(cfg.q + 1) * gamma)));
  }
  out.bound = failure_bound(cfg.m, cfg.k, cfg.q, cfg.p);
  out.trials = cfg.trials;

  const ValidationOracle oracle{OracleMode::synthetic_noisy, cfg.eta, cfg.p, cfg.H};
  const std::size_t n_cand = cfg.q + 1;
  const std::size_t byz = cfg.m - cfg.k;
  constexpr std::size_t kChunk = 2048;
  const std::size_t chunks = (cfg.trials + kChunk - 1) / kChunk;
  std::vector<std::size_t> chunk_failures(chunks, 0);

  parallel_for(chunks, policy, [&](std::size_t c) {
    std::vector<std::size_t> counts(n_cand);
    std::vector<double> est(n_cand);
    const std::size_t end = std::min(cfg.trials, (c + 1) * kChunk);
    for (std::size_t trial = c * kChunk; trial < end; ++trial) {
      RngStream r = rng.derive(static_cast<std::uint64_t>(trial));
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t voter = 0; voter < cfg.k; ++voter) {
        for (std::size_t i = 0; i < n_cand; ++i) {
          const double truth = i == cfg.q ? 0.0 : cfg.gap;
          est[i] = perturb_loss(oracle, truth, r);
        }
        ++counts[argmin_index(est)];
      }
      const std::span<const std::size_t> others(counts.data(), cfg.q);
      if (adversary_can_prune(counts[cfg.q], others, byz)) ++chunk_failures[c];
    }
  });

  for (std::size_t f : chunk_failures) out.failures += f;
  out.rate = static_cast<double>(out.failures) / static_cast<double>(out.trials);
  return out;
}

SweepSummary summarize_sweep(std::span<const SweepRun> runs) {
  using Key = std::tuple<std::string, std::string, std::size_t, double>;
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : runs) groups[{r.method, r.attack, r.q, r.gamma}].push_back(r.final_acc);

  SweepSummary out;
  for (auto& [key, accs] : groups) {
    // Sorting fixes the summation order, so the result ignores run order.
    std::sort(accs.begin(), accs.end());
    SweepCell cell;
    std::tie(cell.method, cell.attack, cell.q, cell.gamma) = key;
    cell.runs = accs.size();
    for (double a : accs) cell.mean += a;
    cell.mean /= static_cast<double>(accs.size());
    if (accs.size() > 1) {
      double ss = 0.0;
      for (double a : accs) ss += (a - cell.mean) * (a - cell.mean);
      cell.std = std::sqrt(ss / static_cast<double>(accs.size() - 1));
    }
    out.cells.push_back(std::move(cell));
  }

  // Worst over attack columns; the clean column counts only when alone.
  using RowKey = std::tuple<std::string, std::size_t, double>;
  std::map<RowKey, WorstEntry> worst;
  std::map<RowKey, bool> has_attack;
  for (const auto& c : out.cells) has_attack[{c.method, c.q, c.gamma}] |= c.attack != "none";
  for (const auto& c : out.cells) {
    const RowKey row{c.method, c.q, c.gamma};
    if (has_attack[row] && c.attack == "none") continue;
    auto it = worst.find(row);
    if (it == worst.end() || c.mean < it->second.mean) {
      worst[row] = WorstEntry{c.method, c.q, c.gamma, c.attack, c.mean};
    }
  }
  for (auto& [row, entry] : worst) out.worst.push_back(std::move(entry));
  return out;
}

}  // namespace lidfl
