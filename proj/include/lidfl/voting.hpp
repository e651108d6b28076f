#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidfl/core.hpp"
#include "lidfl/model.hpp"

namespace lidfl {

enum class OracleMode { local_split, synthetic_noisy };

std::string to_string(OracleMode mode);
OracleMode parse_oracle_mode(std::string_view text);

/// Loss estimator used by voters.
///
/// local_split: mean loss over the supplied validation rows.
/// synthetic_noisy: exact loss over the supplied reference rows, plus
/// U[-eta, eta] noise with probability p and U[-H, H] otherwise. The second
/// branch models the oracle's failure to be eta-accurate.
struct ValidationOracle {
  OracleMode mode = OracleMode::local_split;
  double eta = 0.0;
  double p = 1.0;
  double H = 10.0;

  void validate() const;
};

/// Applies the synthetic-noisy perturbation to a known loss value.
double perturb_loss(const ValidationOracle& oracle, double true_loss, RngStream& rng);

double estimate_loss(const ValidationOracle& oracle, const ModelSpec& spec, const ParamVector& w,
                     const Batch& data, RngStream& rng);

std::vector<double> estimate_losses(const ValidationOracle& oracle, const ModelSpec& spec,
                                    std::span<const ParamVector> candidates, const Batch& data, RngStream& rng);

/// Index of the smallest loss, ties toward the lowest index.
ModelIndex argmin_index(std::span<const double> losses);
/// Index of the largest loss, ties toward the lowest index.
ModelIndex argmax_index(std::span<const double> losses);

ModelIndex honest_vote(const ValidationOracle& oracle, const ModelSpec& spec, std::span<const ParamVector> candidates,
                       const Batch& data, RngStream& rng);

enum class ByzantineVoteStrategy { worst, random };

std::string to_string(ByzantineVoteStrategy s);
ByzantineVoteStrategy parse_vote_strategy(std::string_view text);

/// worst: the highest estimated loss. random: uniform over every candidate
/// except the lowest-loss one. `losses` must hold q + 1 entries.
ModelIndex byzantine_vote(ByzantineVoteStrategy strategy, std::span<const double> losses, std::size_t q,
                          RngStream& rng);

struct VoteTally {
  std::vector<std::size_t> counts;

  [[nodiscard]] std::size_t total() const;
};

VoteTally tally_votes(std::span<const ModelIndex> votes, std::size_t candidates);

/// The slot to discard: the minimum count, ties toward the highest index.
ModelIndex prune_index(const VoteTally& tally);

struct PruneResult {
  std::vector<ParamVector> survivors;
  ModelIndex removed = 0;
  VoteTally tally;
};

/// Drops the least-voted candidate; survivor order is preserved.
PruneResult tally_and_prune(std::vector<ParamVector> candidates, std::span<const ModelIndex> votes);

}  // namespace lidfl
