#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidfl/core.hpp"
#include "lidfl/model.hpp"
#include "lidfl/parallel.hpp"
#include "lidfl/trainer.hpp"

namespace lidfl {

enum class AttackKind { none, epr, gauss, lf, lie, omn, sf };

std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view text);

struct AttackParams {
  AttackKind kind = AttackKind::none;
  /// LIE perturbation width in standard deviations.
  double z = 1.5;
  /// OMN drives the all-client mean to -omn_scale * (honest mean).
  double omn_scale = 1.0;

  void validate() const;
};

/// EPR, LIE and OMN craft from the honest update statistics.
bool needs_omniscient_view(AttackKind kind);

/// Honest updates as simulated by an omniscient attacker, with their
/// coordinate-wise mean and population standard deviation.
struct OmniscientView {
  std::vector<ParamVector> updates;
  ParamVector mean;
  ParamVector std;
};

OmniscientView make_omniscient_view(std::vector<ParamVector> honest_updates);

/// Runs local training for every honest client from the broadcast model.
/// Client i uses rng.derive(i), so the simulation never touches the honest
/// clients' own streams.
OmniscientView build_omniscient_view(const ModelSpec& spec, const ParamVector& broadcast,
                                     std::span<const std::span<const LabeledExample>> honest_train,
                                     const LocalTrainConfig& cfg, const RngStream& rng,
                                     ExecPolicy policy = ExecPolicy::parallel);

/// (-1.1 k / (m - k)) * honest mean, with k honest clients out of m.
ParamVector craft_epr(const OmniscientView& view, std::size_t k, std::size_t m);

struct GaussCraft {
  ParamVector update;
  /// Set for d = 1, where |u| stands in for the coordinate std.
  bool degenerate_sigma = false;
};
/// N(0, sigma^2 I) with sigma the population std of the coordinates of u.
GaussCraft craft_gauss(const ParamVector& true_update, RngStream& rng);

/// mean - z * std, coordinate-wise.
ParamVector craft_lie(const OmniscientView& view, double z);

/// (m * target - sum of honest updates) / (m - k): the naive mean over the
/// honest updates plus m - k copies of the result equals `target`.
ParamVector craft_omn(const OmniscientView& view, std::size_t k, std::size_t m, const ParamVector& target);
ParamVector omn_default_target(const OmniscientView& view, double scale);

ParamVector craft_sf(const ParamVector& true_update);

}  // namespace lidfl
