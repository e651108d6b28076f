#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidfl/core.hpp"

namespace lidfl {

struct LabeledExample {
  std::vector<double> features;
  std::size_t label = 0;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

using Dataset = std::vector<LabeledExample>;

enum class ModelKind { softmax_regression, mlp };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Model family plus its L2 coefficient.
///
/// softmax_regression: logits = W x + b with W (classes x input_dim).
/// mlp: logits = W2 tanh(W1 x + b1) + b2 with `hidden` tanh units.
/// Parameters are laid out as [W, b] or [W1, b1, W2, b2], row-major.
/// The penalty (l2/2)*|w|^2 covers every coordinate, biases included, so the
/// softmax objective is exactly l2-strongly convex.
struct ModelSpec {
  ModelKind kind = ModelKind::softmax_regression;
  std::size_t input_dim = 0;
  std::size_t classes = 2;
  std::size_t hidden = 0;
  double l2 = 0.0;

  [[nodiscard]] std::size_t param_dim() const;
  void validate() const;
};

/// Rows of a dataset used for one loss evaluation: either the whole pool or
/// the rows selected by `rows`. Non-owning.
class Batch {
 public:
  Batch(std::span<const LabeledExample> pool) : pool_(pool) {}  // NOLINT(google-explicit-constructor)
  Batch(const Dataset& pool) : pool_(pool) {}                   // NOLINT(google-explicit-constructor)
  Batch(std::span<const LabeledExample> pool, std::span<const std::size_t> rows)
      : pool_(pool), rows_(rows), indexed_(true) {}

  [[nodiscard]] std::size_t size() const noexcept { return indexed_ ? rows_.size() : pool_.size(); }
  [[nodiscard]] bool empty() const noexcept { return size() == 0; }
  const LabeledExample& operator[](std::size_t i) const noexcept {
    return indexed_ ? pool_[rows_[i]] : pool_[i];
  }

 private:
  std::span<const LabeledExample> pool_;
  std::span<const std::size_t> rows_;
  bool indexed_ = false;
};

double loss(const ModelSpec& spec, const ParamVector& w, const Batch& batch);
ParamVector gradient(const ModelSpec& spec, const ParamVector& w, const Batch& batch);

struct LossGradient {
  double loss = 0.0;
  ParamVector gradient;
};
LossGradient loss_and_gradient(const ModelSpec& spec, const ParamVector& w, const Batch& batch);

/// Argmax prediction, ties toward the lowest class index.
std::size_t predict(const ModelSpec& spec, const ParamVector& w, std::span<const double> features);
double accuracy(const ModelSpec& spec, const ParamVector& w, const Batch& batch);

struct LossProfile {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t samples = 0;
  bool convex = true;
};

/// alpha: the analytic strong-convexity constant (l2 for softmax regression,
/// 0 with convex=false for the MLP). beta: max gradient-difference ratio over
/// `trials` sampled parameter pairs. Pair i is drawn from rng.derive(i), so a
/// larger trial count evaluates a superset of pairs.
LossProfile estimate_loss_profile(const ModelSpec& spec, const Batch& data, std::size_t trials,
                                  const RngStream& rng);

/// Analytic smoothness bound l2 + max_i |(x_i, 1)|^2 / 2 for softmax
/// regression (the softmax Jacobian has spectral norm at most 1/2).
double smoothness_upper_bound(const ModelSpec& spec, const Batch& data);

/// Starting parameters: zeros for softmax regression, small Gaussian weights
/// for the MLP (whose zero point is a stationary saddle).
ParamVector initial_parameters(const ModelSpec& spec, RngStream rng);

}  // namespace lidfl
