#include "lidfl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lidfl {

std::string to_string(Method method) {
  switch (method) {
    case Method::lidfl: return "lidfl";
    case Method::lidfl_agg: return "lidfl_agg";
    case Method::baseline: return "baseline";
  }
  return "lidfl";
}

Method parse_method(std::string_view text) {
  if (text == "lidfl") return Method::lidfl;
  if (text == "lidfl_agg" || text == "lidfl-agg") return Method::lidfl_agg;
  if (text == "baseline") return Method::baseline;
  throw ConfigError("unknown method '" + std::string(text) + "'");
}

std::size_t minimal_list_size(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  // Guard floor() against 1/gamma landing a hair below an integer.
  return static_cast<std::size_t>(std::floor(1.0 / gamma + 1e-9));
}

std::size_t RunConfig::honest_count() const {
  const double exact = gamma * static_cast<double>(m);
  return static_cast<std::size_t>(std::llround(exact));
}

std::size_t RunConfig::list_size() const { return q.value_or(minimal_list_size(gamma)); }

bool RunConfig::regime_ok() const { return list_size() >= minimal_list_size(gamma); }

void RunConfig::validate() const {
  if (m == 0) throw ConfigError("m must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  const double exact = gamma * static_cast<double>(m);
  if (std::fabs(exact - std::round(exact)) > 1e-9) {
    throw ConfigError("gamma * m must be an integer (gamma=" + std::to_string(gamma) + ", m=" + std::to_string(m) +
                      ")");
  }
  if (q && *q == 0) throw ConfigError("q must be >= 1");
  model.validate();
  if (data.generator == GeneratorKind::gaussian_mixture) {
    data.validate();
    if (data.dim != model.input_dim) throw ConfigError("data.p must equal the model input dimension");
    if (data.classes != model.classes) throw ConfigError("data.classes must equal the model class count");
    if (data.n < m) throw ConfigError("data.n must be >= m");
  }
  train.validate();
  attack.validate();
  oracle.validate();
  agg.validate();
  if (eval_every == 0) throw ConfigError("eval.every must be >= 1");
  if (repeat == 0) throw ConfigError("repeat must be >= 1");
  if (method == Method::lidfl_agg && agg.kind != AggregatorKind::rknn && agg.kind != AggregatorKind::meb) {
    throw ConfigError("lidfl_agg needs agg.kind rknn or meb");
  }
  if (method == Method::baseline && (agg.kind == AggregatorKind::rknn || agg.kind == AggregatorKind::meb)) {
    throw ConfigError("baseline needs agg.kind fedavg, cwm, gm or norm");
  }
  if (agg.k > m) throw ConfigError("agg.k must be <= m");
}

std::vector<std::span<const LabeledExample>> Federation::honest_train() const {
  std::vector<std::span<const LabeledExample>> out;
  out.reserve(honest_ids.size());
  for (ClientId j : honest_ids) out.emplace_back(train[j]);
  return out;
}

std::vector<Dataset> Federation::honest_train_sets() const {
  std::vector<Dataset> out;
  out.reserve(honest_ids.size());
  for (ClientId j : honest_ids) out.push_back(train[j]);
  return out;
}

Dataset Federation::honest_pool() const {
  Dataset out;
  for (ClientId j : honest_ids) out.insert(out.end(), train[j].begin(), train[j].end());
  return out;
}

Federation build_federation(const RunConfig& cfg) {
  cfg.validate();
  const RngStream base(cfg.seed, "federation");
  const Dataset examples = generate(cfg.data, base.derive("data"));
  for (const auto& ex : examples) {
    if (ex.features.size() != cfg.model.input_dim) throw DataError("dataset feature width != model input dimension");
    if (ex.label >= cfg.model.classes) throw DataError("dataset label >= model class count");
  }
  const Partition parts = partition(examples.size(), cfg.m, cfg.ratios, cfg.balance, base.derive("partition"));

  std::vector<ClientId> order(cfg.m);
  std::iota(order.begin(), order.end(), ClientId{0});
  RngStream role_rng = base.derive("roles");
  role_rng.shuffle(order);
  std::vector<bool> honest(cfg.m, false);
  for (std::size_t i = 0; i < cfg.honest_count(); ++i) honest[order[i]] = true;

  Federation fed;
  fed.spec = cfg.model;
  fed.clients.resize(cfg.m);
  fed.train.resize(cfg.m);
  fed.validation.resize(cfg.m);
  fed.test.resize(cfg.m);
  for (ClientId j = 0; j < cfg.m; ++j) {
    auto& client = fed.clients[j];
    client.id = j;
    client.honest = honest[j];
    client.split = parts.clients[j];
    fed.train[j] = gather(examples, client.split.train);
    if (!client.honest && cfg.attack.kind == AttackKind::lf) {
      fed.train[j] = flip_labels(fed.train[j], cfg.model.classes);
    }
    fed.validation[j] = gather(examples, client.split.validation);
    fed.test[j] = gather(examples, client.split.test);
    (client.honest ? fed.honest_ids : fed.byzantine_ids).push_back(j);
  }
  return fed;
}

double global_loss(const Federation& fed, const ParamVector& w) {
  if (fed.honest_ids.empty()) throw ConfigError("global_loss: no honest clients");
  double total = 0.0;
  for (ClientId j : fed.honest_ids) total += loss(fed.spec, w, fed.train[j]);
  return total / static_cast<double>(fed.honest_ids.size());
}

ListEvaluation evaluate_list(const ModelSpec& spec, std::span<const ParamVector> list, std::span<const Dataset> tests,
                             ExecPolicy policy) {
  if (list.empty()) throw std::invalid_argument("evaluate_list: empty model list");
  if (tests.empty()) throw DataError("evaluate_list: no test splits");
  for (const auto& t : tests) {
    if (t.empty()) throw DataError("evaluate_list: empty test split");
  }
  ListEvaluation out;
  out.accuracies.assign(list.size(), 0.0);
  parallel_for(list.size(), policy, [&](std::size_t i) {
    double total = 0.0;
    for (const auto& t : tests) total += accuracy(spec, list[i], t);
    out.accuracies[i] = total / static_cast<double>(tests.size());
  });
  out.best = argmax_index(out.accuracies);
  return out;
}

double RunResult::final_best_test_acc() const {
  if (final_evaluation.accuracies.empty()) return std::numeric_limits<double>::quiet_NaN();
  return final_evaluation.accuracies[final_evaluation.best];
}

namespace {

/// Produces honest and Byzantine updates with per-(client, round) streams.
class UpdateSource {
 public:
  UpdateSource(const RunConfig& cfg, const Federation& fed)
      : cfg_(cfg),
        fed_(fed),
        base_(cfg.seed, "run"),
        train_root_(base_.derive("train")),
        attack_root_(base_.derive("attack")),
        omniscient_root_(base_.derive("omniscient")),
        honest_train_(fed.honest_train()),
        momenta_(fed.size()) {}

  ParamVector honest(ClientId j, const ParamVector& w, std::size_t t) {
    const RngStream rng = train_root_.derive(j).derive(t);
    if (!cfg_.persist_momentum) return local_update(fed_.spec, w, fed_.train[j], cfg_.train, rng);
    const ParamVector* prior = momenta_[j] ? &*momenta_[j] : nullptr;
    LocalTrainResult res = local_train(fed_.spec, w, fed_.train[j], cfg_.train, rng, prior);
    momenta_[j] = std::move(res.momentum);
    return std::move(res.update);
  }

  /// Attacker-side simulation of every honest update from w.
  OmniscientView simulate_view(const ParamVector& w, std::size_t t) const {
    return build_omniscient_view(fed_.spec, w, honest_train_, cfg_.train, omniscient_root_.derive(t), cfg_.policy);
  }

  ParamVector byzantine(ClientId j, const ParamVector& w, std::size_t t, const OmniscientView* view) {
    const std::size_t k = fed_.honest_ids.size();
    const std::size_t m = fed_.size();
    switch (cfg_.attack.kind) {
      case AttackKind::none:
      case AttackKind::lf: return honest(j, w, t);
      case AttackKind::sf: return craft_sf(honest(j, w, t));
      case AttackKind::gauss: {
        RngStream rng = attack_root_.derive(j).derive(t);
        return craft_gauss(honest(j, w, t), rng).update;
      }
      case AttackKind::epr: return craft_epr(*view, k, m);
      case AttackKind::lie: return craft_lie(*view, cfg_.attack.z);
      case AttackKind::omn: return craft_omn(*view, k, m, omn_default_target(*view, cfg_.attack.omn_scale));
    }
    throw ConfigError("unknown attack");
  }

  /// Updates of all m clients from w; the view is built from the real
  /// honest updates of this round.
  std::vector<ParamVector> all_clients(const ParamVector& w, std::size_t t) {
    std::vector<ParamVector> updates(fed_.size());
    const auto& honest_ids = fed_.honest_ids;
    parallel_for(honest_ids.size(), cfg_.policy, [&](std::size_t i) {
      updates[honest_ids[i]] = honest(honest_ids[i], w, t);
    });
    std::optional<OmniscientView> view;
    if (needs_omniscient_view(cfg_.attack.kind) && !fed_.byzantine_ids.empty()) {
      std::vector<ParamVector> honest_updates;
      honest_updates.reserve(honest_ids.size());
      for (ClientId j : honest_ids) honest_updates.push_back(updates[j]);
      view = make_omniscient_view(std::move(honest_updates));
    }
    const auto& byz = fed_.byzantine_ids;
    parallel_for(byz.size(), cfg_.policy, [&](std::size_t i) {
      updates[byz[i]] = byzantine(byz[i], w, t, view ? &*view : nullptr);
    });
    return updates;
  }

  [[nodiscard]] const RngStream& base() const { return base_; }

 private:
  const RunConfig& cfg_;
  const Federation& fed_;
  RngStream base_;
  RngStream train_root_;
  RngStream attack_root_;
  RngStream omniscient_root_;
  std::vector<std::span<const LabeledExample>> honest_train_;
  std::vector<std::optional<ParamVector>> momenta_;
};

struct VoteOutcome {
  std::vector<ModelIndex> votes;
  std::vector<double> honest_mean_losses;
  std::vector<double> global_losses;
};

VoteOutcome run_vote(const RunConfig& cfg, const Federation& fed, std::span<const ParamVector> candidates,
                     const RngStream& vote_root, std::size_t t) {
  const std::size_t n_cand = candidates.size();
  const std::size_t q = n_cand - 1;
  VoteOutcome out;
  out.global_losses.resize(n_cand);
  parallel_for(n_cand, cfg.policy, [&](std::size_t i) { out.global_losses[i] = global_loss(fed, candidates[i]); });

  const bool behave_honestly = cfg.attack.kind == AttackKind::none;
  std::vector<std::vector<double>> losses(fed.size());
  out.votes.resize(fed.size());
  parallel_for(fed.size(), cfg.policy, [&](std::size_t c) {
    RngStream rng = vote_root.derive(c).derive(t);
    auto& mine = losses[c];
    if (cfg.oracle.mode == OracleMode::local_split) {
      mine = estimate_losses(cfg.oracle, fed.spec, candidates, fed.validation[c], rng);
    } else {
      mine.resize(n_cand);
      for (std::size_t i = 0; i < n_cand; ++i) mine[i] = perturb_loss(cfg.oracle, out.global_losses[i], rng);
    }
    if (fed.is_honest(c) || behave_honestly) {
      out.votes[c] = argmin_index(mine);
    } else {
      out.votes[c] = byzantine_vote(cfg.vote, mine, q, rng);
    }
  });

  out.honest_mean_losses.assign(n_cand, 0.0);
  for (ClientId c : fed.honest_ids) {
    for (std::size_t i = 0; i < n_cand; ++i) out.honest_mean_losses[i] += losses[c][i];
  }
  for (double& v : out.honest_mean_losses) v /= static_cast<double>(fed.honest_ids.size());
  return out;
}

bool eval_due(const RunConfig& cfg, std::size_t t) {
  return (t + 1) % cfg.eval_every == 0 || t + 1 == cfg.rounds;
}

std::vector<ParamVector> initial_list(const RunConfig& cfg, const Federation& fed) {
  const ParamVector w0 = initial_parameters(fed.spec, RngStream(cfg.seed, "init"));
  return std::vector<ParamVector>(cfg.list_size(), w0);
}

void require_finite(const ParamVector& w, std::size_t t) {
  if (!w.all_finite()) {
    throw Error("round " + std::to_string(t) + ": candidate model has non-finite parameters");
  }
}

// Shared list-protocol loop; `propose` returns the candidate update for the
// sampled model and fills the sampling fields of the record.
template <typename Propose>
RunResult list_protocol(const RunConfig& cfg, const Federation& fed, UpdateSource& source, Propose&& propose) {
  const std::size_t q = cfg.list_size();
  RunResult result;
  result.regime_warning = !cfg.regime_ok();
  std::vector<ParamVector> list = initial_list(cfg, fed);
  result.initial_global_loss = global_loss(fed, list.front());
  result.final_best_global_loss = result.initial_global_loss;

  RngStream sampling = source.base().derive("sampling");
  const RngStream vote_root = source.base().derive("vote");
  result.rounds.reserve(cfg.rounds);

  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    RoundRecord rec;
    rec.round = t;
    rec.sampled_model = 0;
    const ParamVector update = propose(list, sampling, t, rec);
    ParamVector added = vec_add(list[rec.sampled_model], update);
    require_finite(added, t);

    std::vector<ParamVector> candidates = list;
    candidates.push_back(std::move(added));
    const VoteOutcome vote = run_vote(cfg, fed, candidates, vote_root, t);

    PruneResult pruned = tally_and_prune(std::move(candidates), vote.votes);
    rec.candidate_losses = vote.honest_mean_losses;
    rec.model_added_loss = vote.honest_mean_losses[q];
    rec.tally = pruned.tally.counts;
    rec.pruned = pruned.removed;

    std::vector<double> survivor_global;
    std::vector<double> survivor_val;
    for (std::size_t i = 0; i <= q; ++i) {
      if (i == pruned.removed) continue;
      survivor_global.push_back(vote.global_losses[i]);
      survivor_val.push_back(vote.honest_mean_losses[i]);
    }
    rec.best_index = argmin_index(survivor_global);
    rec.best_global_loss = survivor_global[rec.best_index];
    rec.best_val_loss = *std::min_element(survivor_val.begin(), survivor_val.end());
    list = std::move(pruned.survivors);

    if (eval_due(cfg, t)) {
      const auto ev = evaluate_list(fed.spec, list, fed.test, cfg.policy);
      rec.best_test_acc = ev.accuracies[ev.best];
    }
    result.final_best_global_loss = rec.best_global_loss;
    result.rounds.push_back(std::move(rec));
  }

  result.final_evaluation = evaluate_list(fed.spec, list, fed.test, cfg.policy);
  result.final_list = std::move(list);
  return result;
}

}  // namespace

RunResult run_lidfl(const RunConfig& cfg) { return run_lidfl(cfg, build_federation(cfg)); }

RunResult run_lidfl(const RunConfig& cfg, const Federation& fed) {
  cfg.validate();
  if (cfg.method != Method::lidfl) throw ConfigError("run_lidfl: method must be lidfl");
  UpdateSource source(cfg, fed);
  const std::size_t q = cfg.list_size();
  return list_protocol(cfg, fed, source,
                       [&](const std::vector<ParamVector>& list, RngStream& sampling, std::size_t t, RoundRecord& rec) {
                         const ClientId j = sampling.below(fed.size());
                         rec.sampled_client = j;
                         rec.sampled_model = sampling.below(q);
                         rec.byzantine = !fed.is_honest(j);
                         const ParamVector& w = list[rec.sampled_model];
                         if (!rec.byzantine) return source.honest(j, w, t);
                         if (needs_omniscient_view(cfg.attack.kind)) {
                           const OmniscientView view = source.simulate_view(w, t);
                           return source.byzantine(j, w, t, &view);
                         }
                         return source.byzantine(j, w, t, nullptr);
                       });
}

RunResult run_lidfl_agg(const RunConfig& cfg) { return run_lidfl_agg(cfg, build_federation(cfg)); }

RunResult run_lidfl_agg(const RunConfig& cfg, const Federation& fed) {
  cfg.validate();
  if (cfg.method != Method::lidfl_agg) throw ConfigError("run_lidfl_agg: method must be lidfl_agg");
  UpdateSource source(cfg, fed);
  const std::size_t q = cfg.list_size();
  const RngStream agg_root = source.base().derive("aggregate");
  return list_protocol(cfg, fed, source,
                       [&](const std::vector<ParamVector>& list, RngStream& sampling, std::size_t t, RoundRecord& rec) {
                         rec.sampled_model = sampling.below(q);
                         const auto updates = source.all_clients(list[rec.sampled_model], t);
                         RngStream rng = agg_root.derive(t);
                         return aggregate(cfg.agg, updates, fed.honest_ids.size(), rng, cfg.policy);
                       });
}

RunResult run_baseline(const RunConfig& cfg) { return run_baseline(cfg, build_federation(cfg)); }

RunResult run_baseline(const RunConfig& cfg, const Federation& fed) {
  cfg.validate();
  if (cfg.method != Method::baseline) throw ConfigError("run_baseline: method must be baseline");
  UpdateSource source(cfg, fed);
  const RngStream agg_root = source.base().derive("aggregate");

  RunResult result;
  ParamVector w = initial_parameters(fed.spec, RngStream(cfg.seed, "init"));
  result.initial_global_loss = global_loss(fed, w);
  result.final_best_global_loss = result.initial_global_loss;
  result.rounds.reserve(cfg.rounds);

  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    const auto updates = source.all_clients(w, t);
    RngStream rng = agg_root.derive(t);
    const ParamVector step = aggregate(cfg.agg, updates, fed.honest_ids.size(), rng, cfg.policy);
    axpy_inplace(1.0, step, w);
    require_finite(w, t);

    RoundRecord rec;
    rec.round = t;
    rec.best_global_loss = global_loss(fed, w);
    double val = 0.0;
    for (ClientId c : fed.honest_ids) val += loss(fed.spec, w, fed.validation[c]);
    val /= static_cast<double>(fed.honest_ids.size());
    rec.candidate_losses = {val};
    rec.model_added_loss = val;
    rec.best_val_loss = val;
    if (eval_due(cfg, t)) {
      const ParamVector single[] = {w};
      rec.best_test_acc = evaluate_list(fed.spec, single, fed.test, cfg.policy).accuracies[0];
    }
    result.final_best_global_loss = rec.best_global_loss;
    result.rounds.push_back(std::move(rec));
  }
  const ParamVector single[] = {w};
  result.final_evaluation = evaluate_list(fed.spec, single, fed.test, cfg.policy);
  result.final_list = {w};
  return result;
}

RunResult run(const RunConfig& cfg) {
  switch (cfg.method) {
    case Method::lidfl: return run_lidfl(cfg);
    case Method::lidfl_agg: return run_lidfl_agg(cfg);
    case Method::baseline: return run_baseline(cfg);
  }
  throw ConfigError("unknown method");
}

}  // namespace lidfl
