#include "genspec/genspec.hpp"

#include <optional>
#include <sstream>
#include <string>

#include "genspec/config.hpp"

namespace genspec {

void DeploymentDecision::write(std::ostream& out) const {
  out << "activated=" << (feat_model_activated ? 1 : 0) << '\n' << "overrides=";
  bool first = true;
  for (QueryId q : override_queries) {
    if (!first) out << ',';
    out << q;
    first = false;
  }
  out << '\n';
}

DeploymentDecision DeploymentDecision::read(std::istream& in) {
  DeploymentDecision decision;
  std::string line;
  if (!std::getline(in, line) || line.rfind("activated=", 0) != 0) {
    throw ParseError(1, "expected 'activated=<0|1>'");
  }
  const std::string flag = trim(line.substr(10));
  if (flag != "0" && flag != "1") throw ParseError(1, "activated must be 0 or 1");
  decision.feat_model_activated = flag == "1";
  if (!std::getline(in, line) || line.rfind("overrides=", 0) != 0) {
    throw ParseError(2, "expected 'overrides=<ids>'");
  }
  const std::string ids = trim(line.substr(10));
  if (!ids.empty()) {
    for (const auto& token : split(ids, ',')) {
      try {
        const auto q = parse_int(trim(token));
        if (q < 0) throw std::invalid_argument("negative id");
        decision.override_queries.insert(static_cast<QueryId>(q));
      } catch (const std::invalid_argument& e) {
        throw ParseError(2, std::string("bad query id: ") + e.what());
      }
    }
  }
  return decision;
}

namespace {

// Sufficient statistics for one pi1-vs-pi2 decision on one slice.
struct Comparison {
  DeviationStats relative;  // relative_bound, no_bounds
  DeviationStats first;     // sea
  DeviationStats second;    // sea
  BoundConfig config;
};

std::optional<Comparison> compare(const Policy& first, const Policy& second,
                                  const LogSlice& slice, DecisionRule rule,
                                  const RankWeights& lambda) {
  if (slice.empty()) return std::nullopt;
  Comparison c;
  c.config = make_bound_config(slice, 0.0, lambda);
  if (rule == DecisionRule::sea) {
    c.first = single_stats(first, slice, c.config.K, lambda);
    c.second = single_stats(second, slice, c.config.K, lambda);
  } else {
    c.relative = relative_stats(first, second, slice, c.config.K, lambda);
  }
  return c;
}

bool fires(const std::optional<Comparison>& c, double epsilon, DecisionRule rule) {
  if (!c) return false;
  if (rule == DecisionRule::no_bounds) return c->relative.mean > 0.0;
  const double n = rule == DecisionRule::sea ? c->first.count : c->relative.count;
  if (!(n > 1.0)) return false;
  BoundConfig config = c->config;
  config.epsilon = epsilon;
  if (rule == DecisionRule::sea) {
    const auto a = bound_from_stats(c->first, config);
    const auto b = bound_from_stats(c->second, config);
    return a.lcb > b.ucb;
  }
  return bound_from_stats(c->relative, config).lcb > 0.0;
}

}  // namespace

PrimedModels prime(const LogSlice& log, double beta, const Trainers& trainers, Rng& rng) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("prime: beta must be in (0, 1)");
  if (!trainers.feature || !trainers.tabular) {
    throw std::invalid_argument("prime: both trainers are required");
  }
  PrimedModels primed;
  std::tie(primed.train, primed.selection) = split_log(log, beta, rng);
  primed.feature = trainers.feature(primed.train);
  primed.tabular = trainers.tabular(primed.train);
  return primed;
}

std::vector<DeploymentDecision> decide(const Policy& logging, const PrimedModels& primed,
                                       std::span<const QueryId> queries,
                                       std::span<const double> epsilons, DecisionRule rule,
                                       const RankWeights& lambda) {
  for (double eps : epsilons) {
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("decide: epsilon must be in [0, 1)");
  }
  std::vector<DeploymentDecision> decisions(epsilons.size());

  std::optional<Comparison> activation;
  if (primed.feature) activation = compare(*primed.feature, logging, primed.selection, rule, lambda);
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    decisions[e].feat_model_activated = fires(activation, epsilons[e], rule);
  }
  if (!primed.tabular) return decisions;

  const std::set<QueryId> unique(queries.begin(), queries.end());
  for (QueryId q : unique) {
    const LogSlice slice = primed.selection.for_query(q);
    if (slice.empty()) continue;
    std::optional<Comparison> vs_feature;
    std::optional<Comparison> vs_logging;
    bool feature_done = false;
    bool logging_done = false;
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
      const bool activated = decisions[e].feat_model_activated;
      std::optional<Comparison>* cmp = nullptr;
      if (activated) {
        if (!feature_done) {
          vs_feature = compare(*primed.tabular, *primed.feature, slice, rule, lambda);
          feature_done = true;
        }
        cmp = &vs_feature;
      } else {
        if (!logging_done) {
          vs_logging = compare(*primed.tabular, logging, slice, rule, lambda);
          logging_done = true;
        }
        cmp = &vs_logging;
      }
      if (fires(*cmp, epsilons[e], rule)) decisions[e].override_queries.insert(q);
    }
  }
  return decisions;
}

ServedModel model_to_serve(const DeploymentDecision& decision, QueryId q) {
  if (decision.override_queries.count(q)) return ServedModel::tabular;
  if (decision.feat_model_activated) return ServedModel::feature;
  return ServedModel::logging;
}

GenSpecPolicy::GenSpecPolicy(std::shared_ptr<const Policy> logging,
                             std::shared_ptr<const Policy> feature,
                             std::shared_ptr<const Policy> tabular, DeploymentDecision decision)
    : logging_(std::move(logging)),
      feature_(std::move(feature)),
      tabular_(std::move(tabular)),
      decision_(std::move(decision)) {
  if (!logging_) throw std::invalid_argument("GenSpecPolicy: logging policy is required");
  if (decision_.feat_model_activated && !feature_) {
    throw std::invalid_argument("GenSpecPolicy: activated without a feature model");
  }
  if (!decision_.override_queries.empty() && !tabular_) {
    throw std::invalid_argument("GenSpecPolicy: overrides without a tabular model");
  }
}

const Policy& GenSpecPolicy::model_for(QueryId q) const {
  switch (model_to_serve(decision_, q)) {
    case ServedModel::tabular:
      return *tabular_;
    case ServedModel::feature:
      return *feature_;
    case ServedModel::logging:
      break;
  }
  return *logging_;
}

std::size_t GenSpecPolicy::num_candidates(QueryId q) const {
  return model_for(q).num_candidates(q);
}

double GenSpecPolicy::probability(const Ranking& y, QueryId q) const {
  return model_for(q).probability(y, q);
}

Ranking GenSpecPolicy::sample(QueryId q, Rng& rng) const { return model_for(q).sample(q, rng); }

double GenSpecPolicy::valid_set_size(QueryId q) const { return model_for(q).valid_set_size(q); }

std::vector<double> GenSpecPolicy::expected_rank_weights(QueryId q,
                                                         const RankWeights& lambda) const {
  return model_for(q).expected_rank_weights(q, lambda);
}

GenSpecResult initialize(std::shared_ptr<const Policy> logging, const LogSlice& log,
                         std::span<const double> epsilons, double beta,
                         const Trainers& trainers, Rng& rng, DecisionRule rule,
                         const RankWeights& lambda) {
  if (!logging) throw std::invalid_argument("initialize: logging policy is required");
  GenSpecResult result;
  if (log.empty()) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("initialize: beta must be in (0, 1)");
    result.decisions.assign(epsilons.size(), DeploymentDecision{});
  } else {
    const PrimedModels primed = prime(log, beta, trainers, rng);
    const auto queries = log.queries();
    result.decisions = decide(*logging, primed, queries, epsilons, rule, lambda);
    result.feature = trainers.feature(log);
    result.tabular = trainers.tabular(log);
  }
  result.policies.reserve(result.decisions.size());
  for (const auto& d : result.decisions) {
    result.policies.emplace_back(logging, result.feature, result.tabular, d);
  }
  return result;
}

}  // namespace genspec
