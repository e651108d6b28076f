#include "lidfl/model.hpp"

#include <algorithm>
#include <cmath>

namespace lidfl {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::softmax_regression ? "softmax" : "mlp";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "softmax" || text == "softmax-regression" || text == "lr") return ModelKind::softmax_regression;
  if (text == "mlp") return ModelKind::mlp;
  throw ConfigError("unknown model kind '" + std::string(text) + "'");
}

std::size_t ModelSpec::param_dim() const {
  if (kind == ModelKind::softmax_regression) return classes * (input_dim + 1);
  return hidden * (input_dim + 1) + classes * (hidden + 1);
}

void ModelSpec::validate() const {
  if (input_dim == 0) throw ConfigError("model: input_dim must be positive");
  if (classes < 2) throw ConfigError("model: need at least 2 classes");
  if (kind == ModelKind::mlp && hidden == 0) throw ConfigError("model: mlp needs hidden > 0");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("model: l2 must be finite and >= 0");
}

namespace {

void check_inputs(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  if (w.size() != spec.param_dim()) {
    throw DimensionError("model: parameter length " + std::to_string(w.size()) + " != " +
                         std::to_string(spec.param_dim()));
  }
  if (batch.empty()) throw DataError("model: empty batch");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& ex = batch[i];
    if (ex.features.size() != spec.input_dim) throw DimensionError("model: feature length mismatch");
    if (ex.label >= spec.classes) throw DataError("model: label out of range");
  }
}

// Fills `logits` (and `hidden_out` for the MLP) for one example.
void forward(const ModelSpec& spec, const double* w, const std::vector<double>& x, std::vector<double>& hidden_out,
             std::vector<double>& logits) {
  const std::size_t p = spec.input_dim;
  const std::size_t c = spec.classes;
  if (spec.kind == ModelKind::softmax_regression) {
    const double* bias = w + c * p;
    for (std::size_t k = 0; k < c; ++k) {
      const double* row = w + k * p;
      double z = bias[k];
      for (std::size_t j = 0; j < p; ++j) z += row[j] * x[j];
      logits[k] = z;
    }
    return;
  }
  const std::size_t h = spec.hidden;
  const double* w1 = w;
  const double* b1 = w1 + h * p;
  const double* w2 = b1 + h;
  const double* b2 = w2 + c * h;
  for (std::size_t u = 0; u < h; ++u) {
    const double* row = w1 + u * p;
    double a = b1[u];
    for (std::size_t j = 0; j < p; ++j) a += row[j] * x[j];
    hidden_out[u] = std::tanh(a);
  }
  for (std::size_t k = 0; k < c; ++k) {
    const double* row = w2 + k * h;
    double z = b2[k];
    for (std::size_t u = 0; u < h; ++u) z += row[u] * hidden_out[u];
    logits[k] = z;
  }
}

// Converts logits into softmax probabilities in place; returns log-sum-exp.
double softmax_inplace(std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    total += z;
  }
  for (double& z : logits) z /= total;
  return top + std::log(total);
}

double penalty(const ModelSpec& spec, const ParamVector& w) {
  if (spec.l2 == 0.0) return 0.0;
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return 0.5 * spec.l2 * sq;
}

}  // namespace

double loss(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  check_inputs(spec, w, batch);
  std::vector<double> hidden(spec.hidden);
  std::vector<double> logits(spec.classes);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& ex = batch[i];
    forward(spec, w.span().data(), ex.features, hidden, logits);
    const double z_true = logits[ex.label];
    const double lse = softmax_inplace(logits);
    total += lse - z_true;
  }
  return total / static_cast<double>(batch.size()) + penalty(spec, w);
}

LossGradient loss_and_gradient(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  check_inputs(spec, w, batch);
  const std::size_t p = spec.input_dim;
  const std::size_t c = spec.classes;
  const std::size_t h = spec.hidden;
  const double* wp = w.span().data();

  LossGradient out{0.0, ParamVector::zeros(w.size())};
  double* g = out.gradient.span().data();
  std::vector<double> hidden(h);
  std::vector<double> logits(c);
  std::vector<double> dhidden(h);
  double total = 0.0;

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& ex = batch[i];
    const auto& x = ex.features;
    forward(spec, wp, x, hidden, logits);
    const double z_true = logits[ex.label];
    const double lse = softmax_inplace(logits);
    total += lse - z_true;
    logits[ex.label] -= 1.0;  // dL/dz

    if (spec.kind == ModelKind::softmax_regression) {
      double* gb = g + c * p;
      for (std::size_t k = 0; k < c; ++k) {
        const double dz = logits[k];
        double* row = g + k * p;
        for (std::size_t j = 0; j < p; ++j) row[j] += dz * x[j];
        gb[k] += dz;
      }
      continue;
    }

    const double* w2 = wp + h * p + h;
    double* gw1 = g;
    double* gb1 = gw1 + h * p;
    double* gw2 = gb1 + h;
    double* gb2 = gw2 + c * h;
    std::fill(dhidden.begin(), dhidden.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      const double dz = logits[k];
      double* grow = gw2 + k * h;
      const double* wrow = w2 + k * h;
      for (std::size_t u = 0; u < h; ++u) {
        grow[u] += dz * hidden[u];
        dhidden[u] += dz * wrow[u];
      }
      gb2[k] += dz;
    }
    for (std::size_t u = 0; u < h; ++u) {
      const double da = dhidden[u] * (1.0 - hidden[u] * hidden[u]);
      double* grow = gw1 + u * p;
      for (std::size_t j = 0; j < p; ++j) grow[j] += da * x[j];
      gb1[u] += da;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < w.size(); ++i) g[i] = g[i] * inv_n + spec.l2 * wp[i];
  out.loss = total * inv_n + penalty(spec, w);
  return out;
}

ParamVector gradient(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  return loss_and_gradient(spec, w, batch).gradient;
}

std::size_t predict(const ModelSpec& spec, const ParamVector& w, std::span<const double> features) {
  if (w.size() != spec.param_dim()) throw DimensionError("predict: parameter length mismatch");
  if (features.size() != spec.input_dim) throw DimensionError("predict: feature length mismatch");
  std::vector<double> hidden(spec.hidden);
  std::vector<double> logits(spec.classes);
  std::vector<double> x(features.begin(), features.end());
  forward(spec, w.span().data(), x, hidden, logits);
  std::size_t best = 0;
  for (std::size_t k = 1; k < logits.size(); ++k) {
    if (logits[k] > logits[best]) best = k;
  }
  return best;
}

double accuracy(const ModelSpec& spec, const ParamVector& w, const Batch& batch) {
  check_inputs(spec, w, batch);
  std::vector<double> hidden(spec.hidden);
  std::vector<double> logits(spec.classes);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& ex = batch[i];
    forward(spec, w.span().data(), ex.features, hidden, logits);
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k) {
      if (logits[k] > logits[best]) best = k;
    }
    if (best == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

LossProfile estimate_loss_profile(const ModelSpec& spec, const Batch& data, std::size_t trials,
                                  const RngStream& rng) {
  spec.validate();
  LossProfile profile;
  profile.convex = spec.kind == ModelKind::softmax_regression;
  if (profile.convex && spec.l2 <= 0.0) {
    throw ConfigError("estimate_loss_profile: softmax regression needs l2 > 0 for a strong-convexity constant");
  }
  profile.alpha = profile.convex ? spec.l2 : 0.0;

  const std::size_t d = spec.param_dim();
  double beta = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    RngStream pair_rng = rng.derive(t);
    // Alternate the sampling scale so both the near-uniform region around
    // zero and confident regions are probed.
    const double scale = (t % 3 == 0) ? 0.05 : (t % 3 == 1 ? 0.5 : 2.0);
    ParamVector a(d), b(d);
    for (std::size_t i = 0; i < d; ++i) a[i] = scale * pair_rng.normal();
    for (std::size_t i = 0; i < d; ++i) b[i] = a[i] + 0.1 * scale * pair_rng.normal();
    const double dist = l2_distance(a, b);
    if (dist == 0.0) continue;
    const double ratio = l2_distance(gradient(spec, a, data), gradient(spec, b, data)) / dist;
    beta = std::max(beta, ratio);
  }
  profile.beta = std::max(beta, profile.alpha);
  profile.samples = trials;
  return profile;
}

double smoothness_upper_bound(const ModelSpec& spec, const Batch& data) {
  if (spec.kind != ModelKind::softmax_regression) {
    throw ConfigError("smoothness_upper_bound: only available for softmax regression");
  }
  if (data.empty()) throw DataError("smoothness_upper_bound: empty data");
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double sq = 1.0;
    for (double v : data[i].features) sq += v * v;
    worst = std::max(worst, sq);
  }
  return spec.l2 + 0.5 * worst;
}

ParamVector initial_parameters(const ModelSpec& spec, RngStream rng) {
  spec.validate();
  ParamVector w = ParamVector::zeros(spec.param_dim());
  if (spec.kind == ModelKind::softmax_regression) return w;
  const std::size_t p = spec.input_dim;
  const std::size_t h = spec.hidden;
  const std::size_t c = spec.classes;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(p));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (std::size_t i = 0; i < h * p; ++i) w[i] = s1 * rng.normal();
  const std::size_t w2_begin = h * p + h;
  for (std::size_t i = 0; i < c * h; ++i) w[w2_begin + i] = s2 * rng.normal();
  return w;
}

}  // namespace lidfl
