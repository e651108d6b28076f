#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidfl/aggregators.hpp"
#include "lidfl/attacks.hpp"
#include "lidfl/core.hpp"
#include "lidfl/data.hpp"
#include "lidfl/model.hpp"
#include "lidfl/parallel.hpp"
#include "lidfl/trainer.hpp"
#include "lidfl/voting.hpp"

namespace lidfl {

enum class Method { lidfl, lidfl_agg, baseline };

std::string to_string(Method method);
Method parse_method(std::string_view text);

/// Every protocol and hyperparameter knob of one run.
struct RunConfig {
  Method method = Method::lidfl;
  std::size_t m = 35;
  /// Honest fraction; gamma * m must be an integer.
  double gamma = 0.4;
  /// List size; floor(1/gamma) when unset.
  std::optional<std::size_t> q;
  std::size_t rounds = 1500;

  ModelSpec model{ModelKind::softmax_regression, 10, 10, 0, 0.01};
  DatasetConfig data{GeneratorKind::gaussian_mixture, 4200, 10, 10, 3.0, 1.0, {}};
  RoleRatios ratios{};
  BalanceMode balance = BalanceMode::balanced;
  LocalTrainConfig train{};
  /// Keep each client's momentum across selections instead of resetting it.
  bool persist_momentum = false;

  AttackParams attack{};
  ByzantineVoteStrategy vote = ByzantineVoteStrategy::worst;
  ValidationOracle oracle{};
  AggregatorParams agg{};

  std::uint64_t seed = 1;
  std::size_t repeat = 1;
  std::size_t eval_every = 10;
  ExecPolicy policy = ExecPolicy::parallel;

  [[nodiscard]] std::size_t honest_count() const;
  [[nodiscard]] std::size_t list_size() const;
  /// q >= floor(1/gamma) (the list size needed for the voting guarantee).
  [[nodiscard]] bool regime_ok() const;
  /// Throws ConfigError on invalid settings.
  void validate() const;
};

std::size_t minimal_list_size(double gamma);

struct ClientSpec {
  ClientId id = 0;
  bool honest = true;
  ClientSplit split;
};

/// Materialized data for one run: per-client role datasets (Byzantine
/// training data label-flipped under the lf attack) and the honest set.
struct Federation {
  ModelSpec spec;
  std::vector<ClientSpec> clients;
  std::vector<Dataset> train;
  std::vector<Dataset> validation;
  std::vector<Dataset> test;
  std::vector<ClientId> honest_ids;
  std::vector<ClientId> byzantine_ids;

  [[nodiscard]] std::size_t size() const { return clients.size(); }
  [[nodiscard]] bool is_honest(ClientId j) const { return clients.at(j).honest; }
  [[nodiscard]] std::vector<std::span<const LabeledExample>> honest_train() const;
  /// Copies of the honest training sets, in honest_ids order.
  [[nodiscard]] std::vector<Dataset> honest_train_sets() const;
  /// Union of the honest training sets.
  [[nodiscard]] Dataset honest_pool() const;
};

Federation build_federation(const RunConfig& cfg);

/// Mean over honest clients of their local training loss.
double global_loss(const Federation& fed, const ParamVector& w);

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct RoundRecord {
  std::size_t round = 0;
  /// kNoIndex when the round has no single sampled client.
  std::size_t sampled_client = kNoIndex;
  std::size_t sampled_model = 0;
  bool byzantine = false;
  /// Mean honest validation estimate per candidate (q + 1 entries).
  std::vector<double> candidate_losses;
  std::vector<std::size_t> tally;
  std::size_t pruned = kNoIndex;
  std::size_t best_index = 0;
  double best_global_loss = 0.0;
  double best_val_loss = 0.0;
  double model_added_loss = 0.0;
  /// NaN on rounds without a test evaluation.
  double best_test_acc = std::numeric_limits<double>::quiet_NaN();
};

struct ListEvaluation {
  std::vector<double> accuracies;
  std::size_t best = 0;
};

/// Mean test accuracy of every model over the clients' test splits; the
/// best index breaks ties toward the lowest slot.
ListEvaluation evaluate_list(const ModelSpec& spec, std::span<const ParamVector> list, std::span<const Dataset> tests,
                             ExecPolicy policy = ExecPolicy::parallel);

struct RunResult {
  std::vector<RoundRecord> rounds;
  std::vector<ParamVector> final_list;
  ListEvaluation final_evaluation;
  double initial_global_loss = 0.0;
  double final_best_global_loss = 0.0;
  bool regime_warning = false;

  [[nodiscard]] double final_best_test_acc() const;
};

/// The list protocol with one sampled client per round.
RunResult run_lidfl(const RunConfig& cfg);
RunResult run_lidfl(const RunConfig& cfg, const Federation& fed);

/// The list protocol with an rknn/meb aggregate of all m updates per round.
RunResult run_lidfl_agg(const RunConfig& cfg);
RunResult run_lidfl_agg(const RunConfig& cfg, const Federation& fed);

/// Single-model robust aggregation baseline.
RunResult run_baseline(const RunConfig& cfg);
RunResult run_baseline(const RunConfig& cfg, const Federation& fed);

RunResult run(const RunConfig& cfg);

}  // namespace lidfl
