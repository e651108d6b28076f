#include "lidfl/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lidfl {

std::string to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::fedavg: return "fedavg";
    case AggregatorKind::cwm: return "cwm";
    case AggregatorKind::gm: return "gm";
    case AggregatorKind::norm: return "norm";
    case AggregatorKind::rknn: return "rknn";
    case AggregatorKind::meb: return "meb";
  }
  return "fedavg";
}

AggregatorKind parse_aggregator_kind(std::string_view text) {
  for (AggregatorKind k : {AggregatorKind::fedavg, AggregatorKind::cwm, AggregatorKind::gm, AggregatorKind::norm,
                           AggregatorKind::rknn, AggregatorKind::meb}) {
    if (text == to_string(k)) return k;
  }
  if (text == "mean") return AggregatorKind::fedavg;
  throw ConfigError("unknown aggregator '" + std::string(text) + "'");
}

void AggregatorParams::validate() const {
  if (gm_iters == 0) throw ConfigError("agg.gm_iters must be >= 1");
  if (!(norm_tau > 0.0) || !std::isfinite(norm_tau)) throw ConfigError("agg.norm_tau must be > 0");
}

namespace {

void check_nonempty(std::span<const ParamVector> updates, const char* what) {
  if (updates.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
  for (const auto& u : updates) require_same_dim(u, updates.front(), what);
}

ParamVector mean_of(std::span<const ParamVector> updates, std::span<const std::size_t> rows) {
  ParamVector out = ParamVector::zeros(updates[rows.front()].size());
  for (std::size_t r : rows) {
    const auto& u = updates[r];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += u[i];
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& v : out) v *= inv;
  return out;
}

void remove_rows(std::vector<std::size_t>& remaining, std::span<const std::size_t> group) {
  std::erase_if(remaining, [&](std::size_t r) { return std::find(group.begin(), group.end(), r) != group.end(); });
}

void finish_candidates(GroupedAggregate& out, std::span<const ParamVector> updates) {
  out.candidates.clear();
  for (const auto& g : out.groups) out.candidates.push_back(mean_of(updates, g));
}

}  // namespace

ParamVector agg_mean(std::span<const ParamVector> updates) {
  check_nonempty(updates, "agg_mean");
  std::vector<std::size_t> rows(updates.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return mean_of(updates, rows);
}

ParamVector agg_cwm(std::span<const ParamVector> updates, ExecPolicy policy) {
  check_nonempty(updates, "agg_cwm");
  const std::size_t d = updates.front().size();
  const std::size_t n = updates.size();
  ParamVector out(d);
  parallel_for(d, policy, [&](std::size_t c) {
    std::vector<double> column(n);
    for (std::size_t i = 0; i < n; ++i) column[i] = updates[i][c];
    const std::size_t mid = n / 2;
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
    const double upper = column[mid];
    if (n % 2 == 1) {
      out[c] = upper;
    } else {
      const double lower = *std::max_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid));
      out[c] = 0.5 * (lower + upper);
    }
  });
  return out;
}

double sum_of_distances(std::span<const ParamVector> updates, const ParamVector& x) {
  double total = 0.0;
  for (const auto& u : updates) total += l2_distance(u, x);
  return total;
}

ParamVector agg_gm(std::span<const ParamVector> updates, std::size_t iters) {
  check_nonempty(updates, "agg_gm");
  if (iters == 0) throw std::invalid_argument("agg_gm: iters must be >= 1");
  ParamVector x = agg_mean(updates);
  for (std::size_t it = 0; it < iters; ++it) {
    ParamVector numer = ParamVector::zeros(x.size());
    double denom = 0.0;
    bool on_point = false;
    for (const auto& u : updates) {
      const double dist = l2_distance(u, x);
      if (dist <= 1e-12) {
        on_point = true;
        break;
      }
      const double weight = 1.0 / dist;
      axpy_inplace(weight, u, numer);
      denom += weight;
    }
    if (on_point) break;  // later steps would repeat the same decision
    x = vec_scale(1.0 / denom, numer);
  }
  return x;
}

ParamVector agg_norm(std::span<const ParamVector> updates, double tau) {
  check_nonempty(updates, "agg_norm");
  if (!(tau > 0.0)) throw std::invalid_argument("agg_norm: tau must be > 0");
  ParamVector out = ParamVector::zeros(updates.front().size());
  for (const auto& u : updates) {
    const double norm = l2_norm(u);
    const double scale = norm > tau ? tau / norm : 1.0;
    axpy_inplace(scale, u, out);
  }
  const double inv = 1.0 / static_cast<double>(updates.size());
  for (double& v : out) v *= inv;
  return out;
}

std::vector<std::size_t> nearest_group(std::span<const ParamVector> updates, std::span<const std::size_t> remaining,
                                       std::size_t center, std::size_t k, bool include_center) {
  std::vector<std::pair<double, std::size_t>> others;
  others.reserve(remaining.size());
  for (std::size_t r : remaining) {
    if (r == center) continue;
    others.emplace_back(squared_distance(updates[r], updates[center]), r);
  }
  std::sort(others.begin(), others.end());
  std::vector<std::size_t> group;
  if (include_center) group.push_back(center);
  for (const auto& [dist, r] : others) {
    if (group.size() >= k) break;
    group.push_back(r);
  }
  return group;
}

GroupedAggregate rknn_groups(std::span<const ParamVector> updates, std::size_t k, const StartPicker& pick_start,
                             bool include_center) {
  check_nonempty(updates, "rknn");
  if (k == 0 || k > updates.size()) throw std::invalid_argument("rknn: need 1 <= k <= |U|");
  GroupedAggregate out;
  std::vector<std::size_t> remaining(updates.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  while (!remaining.empty()) {
    std::vector<std::size_t> group;
    if (remaining.size() <= k) {
      group = remaining;
    } else {
      const std::size_t pos = pick_start(remaining.size());
      if (pos >= remaining.size()) throw std::out_of_range("rknn: start position out of range");
      group = nearest_group(updates, remaining, remaining[pos], k, include_center);
    }
    remove_rows(remaining, group);
    out.groups.push_back(std::move(group));
  }
  finish_candidates(out, updates);
  out.output = out.candidates.front();
  return out;
}

GroupedAggregate agg_rknn(std::span<const ParamVector> updates, std::size_t k, RngStream& rng, bool include_center) {
  GroupedAggregate out =
      rknn_groups(updates, k, [&](std::size_t remaining) { return rng.below(remaining); }, include_center);
  out.chosen = rng.below(out.candidates.size());
  out.output = out.candidates[out.chosen];
  return out;
}

GroupedAggregate meb_groups(std::span<const ParamVector> updates, std::size_t k, bool include_center,
                            ExecPolicy policy) {
  check_nonempty(updates, "meb");
  if (k == 0 || k > updates.size()) throw std::invalid_argument("meb: need 1 <= k <= |U|");
  GroupedAggregate out;
  std::vector<std::size_t> remaining(updates.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  while (!remaining.empty()) {
    if (remaining.size() <= k) {
      out.groups.push_back(remaining);
      break;
    }
    std::vector<std::vector<std::size_t>> balls(remaining.size());
    std::vector<double> radius(remaining.size());
    parallel_for(remaining.size(), policy, [&](std::size_t i) {
      const std::size_t center = remaining[i];
      balls[i] = nearest_group(updates, remaining, center, k, include_center);
      double r = 0.0;
      for (std::size_t member : balls[i]) r = std::max(r, squared_distance(updates[member], updates[center]));
      radius[i] = r;
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < remaining.size(); ++i) {
      if (radius[i] < radius[best]) best = i;
    }
    remove_rows(remaining, balls[best]);
    out.groups.push_back(std::move(balls[best]));
  }
  finish_candidates(out, updates);
  out.output = out.candidates.front();
  return out;
}

GroupedAggregate agg_meb(std::span<const ParamVector> updates, std::size_t k, RngStream& rng, bool include_center,
                         ExecPolicy policy) {
  GroupedAggregate out = meb_groups(updates, k, include_center, policy);
  out.chosen = rng.below(out.candidates.size());
  out.output = out.candidates[out.chosen];
  return out;
}

ParamVector aggregate(const AggregatorParams& params, std::span<const ParamVector> updates, std::size_t honest_count,
                      RngStream& rng, ExecPolicy policy) {
  params.validate();
  const std::size_t k = params.k == 0 ? honest_count : params.k;
  switch (params.kind) {
    case AggregatorKind::fedavg: return agg_mean(updates);
    case AggregatorKind::cwm: return agg_cwm(updates, policy);
    case AggregatorKind::gm: return agg_gm(updates, params.gm_iters);
    case AggregatorKind::norm: return agg_norm(updates, params.norm_tau);
    case AggregatorKind::rknn: return agg_rknn(updates, k, rng, params.include_center).output;
    case AggregatorKind::meb: return agg_meb(updates, k, rng, params.include_center, policy).output;
  }
  throw ConfigError("aggregate: unknown kind");
}

}  // namespace lidfl
