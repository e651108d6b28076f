#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidfl/core.hpp"
#include "lidfl/parallel.hpp"

namespace lidfl {

enum class AggregatorKind { fedavg, cwm, gm, norm, rknn, meb };

std::string to_string(AggregatorKind kind);
AggregatorKind parse_aggregator_kind(std::string_view text);

struct AggregatorParams {
  AggregatorKind kind = AggregatorKind::fedavg;
  std::size_t gm_iters = 1;
  double norm_tau = 0.215771;
  /// Group size for rknn/meb; 0 means "the honest client count".
  std::size_t k = 0;
  /// Whether a point counts among its own k nearest neighbors.
  bool include_center = true;

  void validate() const;
};

ParamVector agg_mean(std::span<const ParamVector> updates);

/// Coordinate-wise median; even counts average the two middle values.
ParamVector agg_cwm(std::span<const ParamVector> updates, ExecPolicy policy = ExecPolicy::parallel);

/// Weiszfeld iterations from the mean. A step taken while the iterate sits on
/// an input point (within 1e-12) leaves it unchanged.
ParamVector agg_gm(std::span<const ParamVector> updates, std::size_t iters);
double sum_of_distances(std::span<const ParamVector> updates, const ParamVector& x);

/// Mean of the updates after clipping each to norm at most tau.
ParamVector agg_norm(std::span<const ParamVector> updates, double tau);

/// Result of the grouping aggregators: groups[i] lists the input indices
/// averaged into candidates[i]; output = candidates[chosen].
struct GroupedAggregate {
  ParamVector output;
  std::vector<ParamVector> candidates;
  std::vector<std::vector<std::size_t>> groups;
  std::size_t chosen = 0;
};

/// Chooses a start among the `remaining` points (returns a position in
/// [0, remaining)). Points stay in input order as they are removed.
using StartPicker = std::function<std::size_t(std::size_t remaining)>;

/// Neighbourhood of `center` among `remaining` (input indices): the center
/// first when included, then the others by distance with ties toward the
/// lowest input index; at most k points.
std::vector<std::size_t> nearest_group(std::span<const ParamVector> updates, std::span<const std::size_t> remaining,
                                       std::size_t center, std::size_t k, bool include_center);

/// Random k-nearest-neighbour grouping with scripted starts.
GroupedAggregate rknn_groups(std::span<const ParamVector> updates, std::size_t k, const StartPicker& pick_start,
                             bool include_center = true);
GroupedAggregate agg_rknn(std::span<const ParamVector> updates, std::size_t k, RngStream& rng,
                          bool include_center = true);

/// Minimum-radius grouping. Radius ties go to the lowest input index.
GroupedAggregate meb_groups(std::span<const ParamVector> updates, std::size_t k, bool include_center = true,
                            ExecPolicy policy = ExecPolicy::parallel);
GroupedAggregate agg_meb(std::span<const ParamVector> updates, std::size_t k, RngStream& rng,
                         bool include_center = true, ExecPolicy policy = ExecPolicy::parallel);

/// Dispatches by kind. `honest_count` resolves params.k == 0.
ParamVector aggregate(const AggregatorParams& params, std::span<const ParamVector> updates, std::size_t honest_count,
                      RngStream& rng, ExecPolicy policy = ExecPolicy::parallel);

}  // namespace lidfl
