#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lidfl/core.hpp"
#include "lidfl/engine.hpp"
#include "lidfl/model.hpp"
#include "lidfl/parallel.hpp"

namespace lidfl {

/// Constants of the convergence envelope.
struct EnvelopeParams {
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 1.0;
  std::size_t q = 1;
  /// Probability that a good round's vote fails.
  double delta = 0.0;
  /// Oracle accuracy radius.
  double eta = 0.0;
  double epsilon = 0.0;
  std::size_t T = 0;

  void validate() const;
};

EnvelopeParams envelope_from_profile(const LossProfile& profile, double gamma, std::size_t q, double delta = 0.0,
                                     double eta = 0.0);

/// rho = 1 - alpha * gamma * (1 - delta) / (beta * q). Throws ConfigError when
/// rho <= 0, which means the step constants are outside the analyzed regime.
double contraction_factor(const EnvelopeParams& params);

/// Additive floor 2 eta beta q / (alpha gamma (1 - delta)); 0 when eta is 0 and
/// infinite when the denominator vanishes.
double envelope_floor(const EnvelopeParams& params);

/// Oracle radius that yields target accuracy epsilon:
/// eta = epsilon alpha gamma / (2 beta q (1 - delta)).
double eta_for_epsilon(const EnvelopeParams& params, double epsilon);

enum class EnvelopeVerdict { pass, fail, regime_violation };

std::string to_string(EnvelopeVerdict verdict);

struct EnvelopeReport {
  EnvelopeVerdict verdict = EnvelopeVerdict::fail;
  double rho = 1.0;
  double floor = 0.0;
  double initial_excess = 0.0;
  /// Per round t (0-based, after t + 1 updates): seed-averaged excess and bound.
  std::vector<double> averaged_excess;
  std::vector<double> bound;
  std::size_t violations = 0;
  double violation_fraction = 0.0;
  double slack = 0.05;
  std::string diagnostic;

  [[nodiscard]] bool passed() const { return verdict == EnvelopeVerdict::pass; }
};

/// Compares the seed-averaged best-model excess loss of `runs` against
/// rho^(t+1) * initial excess + floor. params.q < floor(1/gamma) yields a
/// regime_violation verdict instead of pass/fail. Throws without f_star.
EnvelopeReport check_envelope(std::span<const RunResult> runs, const EnvelopeParams& params,
                              std::optional<double> f_star, double slack = 0.05);

struct FStarEstimate {
  double f_star = 0.0;
  ParamVector w;
  std::size_t steps = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

/// Full-batch gradient descent on the mean of the per-client losses, with
/// step 1/beta (halved whenever a step fails to decrease the loss).
FStarEstimate estimate_f_star(const ModelSpec& spec, std::span<const Dataset> client_sets, double beta,
                              std::size_t max_steps = 50000, double grad_tol = 1e-8);

/// Voting-failure experiment: q + 1 candidates, the best one at loss 0 and
/// the others at `gap`. The best sits in the last slot, so it loses every
/// pruning tie.
struct FailureTrialConfig {
  std::size_t m = 35;
  std::size_t k = 21;
  std::size_t q = 2;
  double p = 0.95;
  double eta = 0.0;
  /// Loss gap between the best candidate and every other; must be >= 2 eta.
  double gap = 1.0;
  /// Noise radius of inaccurate oracle draws.
  double H = 10.0;
  std::size_t trials = 100000;
  /// Refuse configurations outside p^(q+1) > 1/((q+1) gamma).
  bool require_regime = true;

  void validate() const;
  [[nodiscard]] bool precondition_holds() const;
};

struct FailureEstimate {
  double rate = 0.0;
  /// exp(-2 (p^(q+1) - 1/((q+1) gamma))^2 k); 1 outside the precondition.
  double bound = 1.0;
  std::size_t failures = 0;
  std::size_t trials = 0;
  bool precondition = false;
};

double failure_bound(std::size_t m, std::size_t k, std::size_t q, double p);

/// Honest voters draw oracle estimates per candidate and vote argmin. The
/// m - k Byzantine votes are placed optimally: a trial fails when they can
/// lift every other candidate's count to at least the best's honest count.
FailureEstimate simulate_failure_rate(const FailureTrialConfig& cfg, const RngStream& rng,
                                      ExecPolicy policy = ExecPolicy::parallel);

/// Enough Byzantine votes to prune the candidate with `best_count` honest
/// votes, given the other candidates' honest counts.
bool adversary_can_prune(std::size_t best_count, std::span<const std::size_t> other_counts,
                         std::size_t byzantine_votes);

struct SweepRun {
  std::string method;
  std::string attack;
  std::size_t q = 0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  double final_acc = 0.0;
};

struct SweepCell {
  std::string method;
  std::string attack;
  std::size_t q = 0;
  double gamma = 0.0;
  std::size_t runs = 0;
  double mean = 0.0;
  /// Sample standard deviation; 0 for a single run.
  double std = 0.0;
};

struct WorstEntry {
  std::string method;
  std::size_t q = 0;
  double gamma = 0.0;
  std::string attack;
  double mean = 0.0;
};

struct SweepSummary {
  std::vector<SweepCell> cells;
  /// Per (method, q, gamma): the attack with the lowest mean accuracy.
  std::vector<WorstEntry> worst;
};

/// Groups by (method, attack, q, gamma). Output is sorted by key and does
/// not depend on the order of `runs`.
SweepSummary summarize_sweep(std::span<const SweepRun> runs);

}  // namespace lidfl
