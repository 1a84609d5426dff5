#pragma once

#include <map>
#include <vector>

#include "genspec/core.hpp"
#include "genspec/simulate.hpp"

namespace genspec {

// Memoizes Policy::expected_rank_weights per query for one policy. Not
// thread-safe; meant to live for the duration of one estimator call.
class RankWeightCache {
 public:
  RankWeightCache(const Policy& policy, const RankWeights& lambda)
      : policy_(policy), lambda_(lambda) {}
  const std::vector<double>& operator()(QueryId q);

 private:
  const Policy& policy_;
  const RankWeights& lambda_;
  std::map<QueryId, std::vector<double>> cache_;
};

// IPS estimate of Delta(y) from one interaction:
// sum over d in y of lambda(rank(d | y)) * c(d) / rho(d).
double ips_delta(const Ranking& y, const LoggedInteraction& record,
                 const RankWeights& lambda);

// Counterfactual reward: mean over records of E_{y ~ pi}[ips_delta(y, i)].
// The expectation over pi uses expected rank weights (no enumeration).
// Records are reduced with pairwise_sum in log order.
double ips_reward(const Policy& policy, const LogSlice& log, const RankWeights& lambda);

// Per-query sufficient statistics of a log: the interaction count n_q and the
// inverse-propensity click mass sum_i c_i(d) / rho_i(d) of each candidate.
struct QueryClicks {
  std::size_t interactions = 0;
  std::vector<double> mass;
};

struct ClickTable {
  std::map<QueryId, QueryClicks> queries;
  std::size_t total_interactions = 0;
};

ClickTable aggregate_clicks(const LogSlice& log);

// Same estimator as ips_reward(policy, log, ...) evaluated from aggregated
// statistics; equal up to floating-point summation order.
double ips_reward(const Policy& policy, const ClickTable& table, const RankWeights& lambda);

// R_{i,d} = c(d) / rho(d) * (E_pi1[lambda(rank d)] - E_pi2[lambda(rank d)])
// for every candidate d (candidate order).
std::vector<double> per_document_relative(const Policy& first, const Policy& second,
                                          const LoggedInteraction& record,
                                          const RankWeights& lambda);

struct BoundConfig {
  double epsilon = 0.95;  // confidence, in [0, 1)
  double b = 1.0;         // bound on |R_{i,d}|
  std::size_t K = 1;      // terms per interaction

  void validate() const;
  double log_term() const;  // ln(2 / (1 - epsilon))
};

// K = largest candidate count in the slice; b = max lambda over ranks 1..K
// divided by the smallest stored propensity in the slice.
BoundConfig make_bound_config(const LogSlice& log, double epsilon, const RankWeights& lambda);

struct RelativeEstimate {
  double delta_hat = 0.0;
  double nu = 0.0;
  double cb = 0.0;
  double lcb = 0.0;
  double ucb = 0.0;
};

// Sample statistics of the |D| * K terms X_{i,d} = K * R_{i,d}. Records with
// fewer than K candidates are padded with zero terms.
struct DeviationStats {
  double mean = 0.0;        // equals delta_hat (or the reward, single policy)
  double sum_sq_dev = 0.0;  // sum of (X - mean)^2
  double count = 0.0;       // |D| * K
};

DeviationStats relative_stats(const Policy& first, const Policy& second,
                              const LogSlice& log, std::size_t K,
                              const RankWeights& lambda);
DeviationStats single_stats(const Policy& policy, const LogSlice& log, std::size_t K,
                            const RankWeights& lambda);

// nu = 2 n ln(2/(1-eps)) / (n - 1) * sum_sq_dev,
// cb = 7 K b ln(2/(1-eps)) / (3 (n - 1)) + sqrt(nu) / n,  with n = |D| K.
RelativeEstimate bound_from_stats(const DeviationStats& stats, const BoundConfig& config);

// High-confidence bound on R(pi1) - R(pi2) from a single set of terms.
RelativeEstimate relative_bound(const Policy& first, const Policy& second,
                                const LogSlice& log, const BoundConfig& config,
                                const RankWeights& lambda);

struct SeaEstimate {
  double reward = 0.0;
  double nu = 0.0;
  double cb = 0.0;
};

// Single-policy bound, same form as relative_bound with
// R^pi_{i,d} = c(d) / rho(d) * E_pi[lambda(rank d)].
SeaEstimate sea_bound(const Policy& policy, const LogSlice& log,
                      const BoundConfig& config, const RankWeights& lambda);

// True iff reward(pi1) - cb(pi1) > reward(pi2) + cb(pi2).
bool sea_decision(const Policy& first, const Policy& second, const LogSlice& log,
                  const BoundConfig& config, const RankWeights& lambda);

}  // namespace genspec
