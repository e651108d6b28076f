#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lidfl/core.hpp"
#include "lidfl/model.hpp"

namespace lidfl {

struct LocalTrainConfig {
  std::size_t tau = 25;
  std::size_t batch = 32;
  double lr = 0.01;
  double momentum = 0.9;
  /// Starting momentum; zeros when unset.
  std::optional<ParamVector> initial_momentum;

  void validate() const;
};

/// Without-replacement mini-batches: walks a shuffled permutation of
/// [0, n) and reshuffles once it is exhausted. The final batch of an epoch
/// may be short. When batch >= n every batch is the whole set in natural
/// order and no randomness is consumed.
class EpochSampler {
 public:
  EpochSampler(std::size_t n, std::size_t batch, RngStream rng);

  std::span<const std::size_t> next();
  [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }

 private:
  void reshuffle();

  std::size_t batch_;
  RngStream rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
  bool full_batch_;
};

/// Gradient of the objective at w over the given training rows.
using BatchGradient = std::function<ParamVector(const ParamVector& w, std::span<const std::size_t> rows)>;

struct LocalTrainResult {
  ParamVector update;
  ParamVector momentum;
};

/// tau steps of v <- mu*v + g, w <- w - lr*v starting from w0; reports
/// u = w_tau - w0 and the final momentum.
LocalTrainResult momentum_sgd(const BatchGradient& grad, std::size_t n_rows, const ParamVector& w0,
                              const LocalTrainConfig& cfg, const RngStream& rng,
                              const ParamVector* momentum = nullptr);

LocalTrainResult local_train(const ModelSpec& spec, const ParamVector& w0, std::span<const LabeledExample> train,
                             const LocalTrainConfig& cfg, const RngStream& rng,
                             const ParamVector* momentum = nullptr);

/// An honest client's model update for one selection.
ParamVector local_update(const ModelSpec& spec, const ParamVector& w0, std::span<const LabeledExample> train,
                         const LocalTrainConfig& cfg, const RngStream& rng);

}  // namespace lidfl
