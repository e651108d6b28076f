#include "lidfl/trainer.hpp"

#include <cmath>
#include <numeric>

namespace lidfl {

void LocalTrainConfig::validate() const {
  if (tau == 0) throw ConfigError("train: tau must be >= 1");
  if (batch == 0) throw ConfigError("train: batch size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train: learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must be in [0, 1)");
}

EpochSampler::EpochSampler(std::size_t n, std::size_t batch, RngStream rng)
    : batch_(batch), rng_(rng), order_(n), full_batch_(batch >= n) {
  if (n == 0) throw DataError("EpochSampler: empty training data");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!full_batch_) reshuffle();
}

void EpochSampler::reshuffle() {
  rng_.shuffle(order_);
  cursor_ = 0;
}

std::span<const std::size_t> EpochSampler::next() {
  if (full_batch_) {
    ++epoch_;
    return order_;
  }
  if (cursor_ >= order_.size()) {
    reshuffle();
    ++epoch_;
  }
  const std::size_t count = std::min(batch_, order_.size() - cursor_);
  std::span<const std::size_t> out(order_.data() + cursor_, count);
  cursor_ += count;
  return out;
}

LocalTrainResult momentum_sgd(const BatchGradient& grad, std::size_t n_rows, const ParamVector& w0,
                              const LocalTrainConfig& cfg, const RngStream& rng, const ParamVector* momentum) {
  cfg.validate();
  if (n_rows == 0) throw DataError("local training: empty training data");

  ParamVector v;
  if (momentum != nullptr) {
    v = *momentum;
  } else if (cfg.initial_momentum) {
    v = *cfg.initial_momentum;
  } else {
    v = ParamVector::zeros(w0.size());
  }
  require_same_dim(v, w0, "local training momentum");

  ParamVector w = w0;
  EpochSampler sampler(n_rows, cfg.batch, rng.derive("batches"));
  for (std::size_t r = 0; r < cfg.tau; ++r) {
    const ParamVector g = grad(w, sampler.next());
    require_same_dim(g, w, "local training gradient");
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = cfg.momentum * v[i] + g[i];
      w[i] -= cfg.lr * v[i];
    }
  }
  return {vec_sub(w, w0), std::move(v)};
}

LocalTrainResult local_train(const ModelSpec& spec, const ParamVector& w0, std::span<const LabeledExample> train,
                             const LocalTrainConfig& cfg, const RngStream& rng, const ParamVector* momentum) {
  if (train.empty()) throw DataError("local_update: empty training data");
  if (w0.size() != spec.param_dim()) throw DimensionError("local_update: parameter length mismatch");
  BatchGradient grad = [&](const ParamVector& w, std::span<const std::size_t> rows) {
    return gradient(spec, w, Batch(train, rows));
  };
  return momentum_sgd(grad, train.size(), w0, cfg, rng, momentum);
}

ParamVector local_update(const ModelSpec& spec, const ParamVector& w0, std::span<const LabeledExample> train,
                         const LocalTrainConfig& cfg, const RngStream& rng) {
  return local_train(spec, w0, train, cfg, rng).update;
}

}  // namespace lidfl
