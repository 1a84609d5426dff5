#pragma once

#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <set>
#include <span>
#include <vector>

#include "genspec/core.hpp"
#include "genspec/estimate.hpp"
#include "genspec/simulate.hpp"

namespace genspec {

struct DeploymentDecision {
  bool feat_model_activated = false;
  std::set<QueryId> override_queries;

  // Two lines: `activated=<0|1>` and `overrides=<ascending comma-separated ids>`.
  void write(std::ostream& out) const;
  static DeploymentDecision read(std::istream& in);

  friend bool operator==(const DeploymentDecision&, const DeploymentDecision&) = default;
};

enum class DecisionRule {
  relative_bound,  // LCB(pi1, pi2) > 0
  no_bounds,       // delta_hat(pi1, pi2) > 0, epsilon ignored
  sea,             // reward(pi1) - cb(pi1) > reward(pi2) + cb(pi2)
};

enum class ServedModel { tabular, feature, logging };

// Returns nullptr when the slice carries nothing to learn from.
using Trainer = std::function<std::shared_ptr<const Policy>(const LogSlice&)>;

struct Trainers {
  Trainer feature;
  Trainer tabular;
};

// Models fit on the training part of a random split, with the held-out part
// kept for selection.
struct PrimedModels {
  LogSlice train;
  LogSlice selection;
  std::shared_ptr<const Policy> feature;  // may be null
  std::shared_ptr<const Policy> tabular;  // may be null
};

PrimedModels prime(const LogSlice& log, double beta, const Trainers& trainers, Rng& rng);

// Activation and per-query override decisions from selection-data statistics
// only; one decision per epsilon. Every query of `log` is considered. Queries
// absent from the selection slice are never overridden. K and b are taken
// from the slice each bound is computed on.
std::vector<DeploymentDecision> decide(const Policy& logging, const PrimedModels& primed,
                                       std::span<const QueryId> queries,
                                       std::span<const double> epsilons, DecisionRule rule,
                                       const RankWeights& lambda = RankWeights::dcg());

ServedModel model_to_serve(const DeploymentDecision& decision, QueryId q);

// Serves each query from the model chosen by model_to_serve.
class GenSpecPolicy final : public Policy {
 public:
  GenSpecPolicy(std::shared_ptr<const Policy> logging, std::shared_ptr<const Policy> feature,
                std::shared_ptr<const Policy> tabular, DeploymentDecision decision);

  const DeploymentDecision& decision() const { return decision_; }
  const Policy& model_for(QueryId q) const;

  std::size_t num_candidates(QueryId q) const override;
  double probability(const Ranking& y, QueryId q) const override;
  Ranking sample(QueryId q, Rng& rng) const override;
  double valid_set_size(QueryId q) const override;
  std::vector<double> expected_rank_weights(QueryId q,
                                            const RankWeights& lambda) const override;

 private:
  std::shared_ptr<const Policy> logging_;
  std::shared_ptr<const Policy> feature_;
  std::shared_ptr<const Policy> tabular_;
  DeploymentDecision decision_;
};

struct GenSpecResult {
  std::shared_ptr<const Policy> feature;  // trained on the full log, may be null
  std::shared_ptr<const Policy> tabular;  // trained on the full log, may be null
  std::vector<DeploymentDecision> decisions;
  std::vector<GenSpecPolicy> policies;    // parallel to decisions
};

// Split, prime, decide for every epsilon, then fit both models on the full
// log. An empty log serves the logging policy everywhere.
GenSpecResult initialize(std::shared_ptr<const Policy> logging, const LogSlice& log,
                         std::span<const double> epsilons, double beta,
                         const Trainers& trainers, Rng& rng,
                         DecisionRule rule = DecisionRule::relative_bound,
                         const RankWeights& lambda = RankWeights::dcg());

}  // namespace genspec
