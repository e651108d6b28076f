#include "lidfl/voting.hpp"

#include <cmath>

namespace lidfl {

std::string to_string(OracleMode mode) {
  return mode == OracleMode::local_split ? "local-split" : "synthetic-noisy";
}

OracleMode parse_oracle_mode(std::string_view text) {
  if (text == "local-split" || text == "local_split") return OracleMode::local_split;
  if (text == "synthetic-noisy" || text == "synthetic_noisy") return OracleMode::synthetic_noisy;
  throw ConfigError("unknown oracle mode '" + std::string(text) + "'");
}

void ValidationOracle::validate() const {
  if (mode == OracleMode::local_split) return;
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("oracle.eta must be >= 0");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("oracle.p must be in (0, 1]");
  if (!(H > 0.0) || !std::isfinite(H)) throw ConfigError("oracle.H must be > 0");
}

double perturb_loss(const ValidationOracle& oracle, double true_loss, RngStream& rng) {
  if (oracle.p >= 1.0) {
    return oracle.eta == 0.0 ? true_loss : true_loss + rng.uniform(-oracle.eta, oracle.eta);
  }
  const bool accurate = rng.bernoulli(oracle.p);
  const double width = accurate ? oracle.eta : oracle.H;
  return true_loss + rng.uniform(-width, width);
}

double estimate_loss(const ValidationOracle& oracle, const ModelSpec& spec, const ParamVector& w,
                     const Batch& data, RngStream& rng) {
  if (data.empty()) throw DataError("estimate_loss: empty validation data");
  const double value = loss(spec, w, data);
  if (oracle.mode == OracleMode::local_split) return value;
  return perturb_loss(oracle, value, rng);
}

std::vector<double> estimate_losses(const ValidationOracle& oracle, const ModelSpec& spec,
                                    std::span<const ParamVector> candidates, const Batch& data, RngStream& rng) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& w : candidates) out.push_back(estimate_loss(oracle, spec, w, data, rng));
  return out;
}

ModelIndex argmin_index(std::span<const double> losses) {
  if (losses.empty()) throw std::invalid_argument("argmin_index: no candidates");
  ModelIndex best = 0;
  for (ModelIndex i = 1; i < losses.size(); ++i) {
    if (losses[i] < losses[best]) best = i;
  }
  return best;
}

ModelIndex argmax_index(std::span<const double> losses) {
  if (losses.empty()) throw std::invalid_argument("argmax_index: no candidates");
  ModelIndex best = 0;
  for (ModelIndex i = 1; i < losses.size(); ++i) {
    if (losses[i] > losses[best]) best = i;
  }
  return best;
}

ModelIndex honest_vote(const ValidationOracle& oracle, const ModelSpec& spec, std::span<const ParamVector> candidates,
                       const Batch& data, RngStream& rng) {
  if (candidates.empty()) throw std::invalid_argument("honest_vote: no candidates");
  const auto losses = estimate_losses(oracle, spec, candidates, data, rng);
  return argmin_index(losses);
}

std::string to_string(ByzantineVoteStrategy s) { return s == ByzantineVoteStrategy::worst ? "worst" : "random"; }

ByzantineVoteStrategy parse_vote_strategy(std::string_view text) {
  if (text == "worst") return ByzantineVoteStrategy::worst;
  if (text == "random") return ByzantineVoteStrategy::random;
  throw ConfigError("unknown Byzantine vote strategy '" + std::string(text) + "'");
}

ModelIndex byzantine_vote(ByzantineVoteStrategy strategy, std::span<const double> losses, std::size_t q,
                          RngStream& rng) {
  if (losses.size() != q + 1) {
    throw DimensionError("byzantine_vote: expected " + std::to_string(q + 1) + " losses, got " +
                         std::to_string(losses.size()));
  }
  if (strategy == ByzantineVoteStrategy::worst) return argmax_index(losses);
  const ModelIndex best = argmin_index(losses);
  if (losses.size() == 1) return best;
  ModelIndex pick = rng.below(losses.size() - 1);
  return pick >= best ? pick + 1 : pick;
}

std::size_t VoteTally::total() const {
  std::size_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

VoteTally tally_votes(std::span<const ModelIndex> votes, std::size_t candidates) {
  VoteTally tally{std::vector<std::size_t>(candidates, 0)};
  for (ModelIndex v : votes) {
    if (v >= candidates) {
      throw DimensionError("tally_votes: vote " + std::to_string(v) + " out of range for " +
                           std::to_string(candidates) + " candidates");
    }
    ++tally.counts[v];
  }
  return tally;
}

ModelIndex prune_index(const VoteTally& tally) {
  if (tally.counts.empty()) throw std::invalid_argument("prune_index: empty tally");
  ModelIndex worst = 0;
  for (ModelIndex i = 1; i < tally.counts.size(); ++i) {
    if (tally.counts[i] <= tally.counts[worst]) worst = i;
  }
  return worst;
}

PruneResult tally_and_prune(std::vector<ParamVector> candidates, std::span<const ModelIndex> votes) {
  if (candidates.size() < 2) throw DimensionError("tally_and_prune: need q + 1 >= 2 candidates");
  PruneResult out;
  out.tally = tally_votes(votes, candidates.size());
  out.removed = prune_index(out.tally);
  candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(out.removed));
  out.survivors = std::move(candidates);
  return out;
}

}  // namespace lidfl
