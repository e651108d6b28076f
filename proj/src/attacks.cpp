#include "lidfl/attacks.hpp"

#include <cmath>

namespace lidfl {

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::none: return "none";
    case AttackKind::epr: return "epr";
    case AttackKind::gauss: return "gauss";
    case AttackKind::lf: return "lf";
    case AttackKind::lie: return "lie";
    case AttackKind::omn: return "omn";
    case AttackKind::sf: return "sf";
  }
  return "none";
}

AttackKind parse_attack_kind(std::string_view text) {
  for (AttackKind k : {AttackKind::none, AttackKind::epr, AttackKind::gauss, AttackKind::lf, AttackKind::lie,
                       AttackKind::omn, AttackKind::sf}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown attack kind '" + std::string(text) + "'");
}

void AttackParams::validate() const {
  if (!std::isfinite(z)) throw ConfigError("attack.z must be finite");
  if (!std::isfinite(omn_scale)) throw ConfigError("attack.omn_scale must be finite");
}

bool needs_omniscient_view(AttackKind kind) {
  return kind == AttackKind::epr || kind == AttackKind::lie || kind == AttackKind::omn;
}

OmniscientView make_omniscient_view(std::vector<ParamVector> honest_updates) {
  if (honest_updates.empty()) throw ConfigError("omniscient view: no honest clients");
  const std::size_t d = honest_updates.front().size();
  for (const auto& u : honest_updates) require_same_dim(u, honest_updates.front(), "omniscient view");

  OmniscientView view;
  view.mean = ParamVector::zeros(d);
  view.std = ParamVector::zeros(d);
  const double n = static_cast<double>(honest_updates.size());
  for (const auto& u : honest_updates) {
    for (std::size_t i = 0; i < d; ++i) view.mean[i] += u[i];
  }
  for (std::size_t i = 0; i < d; ++i) view.mean[i] /= n;
  for (const auto& u : honest_updates) {
    for (std::size_t i = 0; i < d; ++i) {
      const double dev = u[i] - view.mean[i];
      view.std[i] += dev * dev;
    }
  }
  for (std::size_t i = 0; i < d; ++i) view.std[i] = std::sqrt(view.std[i] / n);
  view.updates = std::move(honest_updates);
  return view;
}

OmniscientView build_omniscient_view(const ModelSpec& spec, const ParamVector& broadcast,
                                     std::span<const std::span<const LabeledExample>> honest_train,
                                     const LocalTrainConfig& cfg, const RngStream& rng, ExecPolicy policy) {
  if (honest_train.empty()) throw ConfigError("omniscient view: no honest clients");
  std::vector<ParamVector> updates(honest_train.size());
  parallel_for(honest_train.size(), policy, [&](std::size_t i) {
    updates[i] = local_update(spec, broadcast, honest_train[i], cfg, rng.derive(i));
  });
  return make_omniscient_view(std::move(updates));
}

ParamVector craft_epr(const OmniscientView& view, std::size_t k, std::size_t m) {
  if (k == 0 || m <= k) throw ConfigError("craft_epr: need m > k >= 1");
  const double factor = -1.1 * static_cast<double>(k) / static_cast<double>(m - k);
  return vec_scale(factor, view.mean);
}

GaussCraft craft_gauss(const ParamVector& true_update, RngStream& rng) {
  if (!true_update.all_finite()) throw std::invalid_argument("craft_gauss: non-finite update");
  GaussCraft out;
  double sigma = 0.0;
  if (true_update.size() == 1) {
    sigma = std::fabs(true_update[0]);
    out.degenerate_sigma = true;
  } else {
    sigma = mean_std(true_update.span()).std;
  }
  out.update = ParamVector(true_update.size());
  for (double& v : out.update) v = sigma * rng.normal();
  return out;
}

ParamVector craft_lie(const OmniscientView& view, double z) {
  require_same_dim(view.mean, view.std, "craft_lie");
  ParamVector out(view.mean.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = view.mean[i] - z * view.std[i];
  return out;
}

ParamVector craft_omn(const OmniscientView& view, std::size_t k, std::size_t m, const ParamVector& target) {
  if (m <= k) throw ConfigError("craft_omn: need m > k");
  if (view.updates.size() != k) throw ConfigError("craft_omn: view must hold exactly k honest updates");
  if (!target.all_finite()) throw std::invalid_argument("craft_omn: non-finite target");
  require_same_dim(target, view.mean, "craft_omn");
  ParamVector out = vec_scale(static_cast<double>(m), target);
  for (const auto& u : view.updates) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= u[i];
  }
  const double inv = 1.0 / static_cast<double>(m - k);
  for (double& v : out) v *= inv;
  return out;
}

ParamVector omn_default_target(const OmniscientView& view, double scale) { return vec_scale(-scale, view.mean); }

ParamVector craft_sf(const ParamVector& true_update) { return vec_scale(-1.0, true_update); }

}  // namespace lidfl
