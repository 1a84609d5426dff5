#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "genspec/core.hpp"
#include "genspec/data.hpp"
#include "genspec/estimate.hpp"
#include "genspec/linear_ranker.hpp"
#include "genspec/simulate.hpp"

namespace genspec {

// Memorized per-query relevance estimates r_hat(q, d). Queries without data
// score every candidate 0, i.e. rank uniformly at random.
class TabularRanker {
 public:
  TabularRanker() = default;
  TabularRanker(std::vector<std::size_t> candidate_counts,
                std::map<QueryId, std::vector<double>> estimates);

  double estimate(QueryId q, DocId d) const;
  bool contains(QueryId q) const { return estimates_.count(q) > 0; }
  const std::map<QueryId, std::vector<double>>& estimates() const { return estimates_; }
  const std::vector<std::size_t>& candidate_counts() const { return counts_; }
  ScoreSortPolicy policy() const;

  // `tabular <Q>`, a line of Q candidate counts, then `qid docid r_hat`
  // triples, one per line.
  void write(std::ostream& out) const;
  static TabularRanker read(std::istream& in);

  friend bool operator==(const TabularRanker&, const TabularRanker&) = default;

 private:
  std::vector<std::size_t> counts_;
  std::map<QueryId, std::vector<double>> estimates_;
};

// r_hat(q, d) = (1 / n_q) sum_{i : q_i = q} c_i(d) / rho_i(d).
TabularRanker infer_tabular(const LogSlice& log, std::span<const std::size_t> candidate_counts);

// Thrown when a log carries no clicks to learn from.
class NoClickSignal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One query's contribution to the training surrogate.
struct SurrogateTerm {
  QueryId query = 0;
  double weight = 1.0;            // query frequency correction
  std::vector<double> relevance;  // r_hat per candidate
};

// IPS-weighted pairwise logistic surrogate with lambda-style pair weights:
//   l_q(theta) = sum_d r_hat(d) sum_{d' != d}
//                  |lambda(rank d) - lambda(rank d')| * log(1 + exp(s_d' - s_d)),
// where ranks come from sorting the current scores s = X theta (ties by
// document index). The minibatch loss is the mean of weight * l_q.
class PairwiseLambdaSurrogate {
 public:
  explicit PairwiseLambdaSurrogate(const Dataset& dataset,
                                   RankWeights lambda = RankWeights::dcg())
      : dataset_(dataset), lambda_(std::move(lambda)) {}

  double loss(const Eigen::VectorXd& theta, std::span<const SurrogateTerm> batch) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta,
                           std::span<const SurrogateTerm> batch) const;

 private:
  double query_loss(const Eigen::VectorXd& theta, const SurrogateTerm& term,
                    Eigen::VectorXd* grad) const;

  const Dataset& dataset_;
  RankWeights lambda_;
};

// Builds one surrogate term per query with clicks. With Q such queries and N
// interactions, weight = Q * n_q / N, so a uniformly drawn minibatch gives an
// unbiased estimate of the full IPS surrogate up to a constant factor.
std::vector<SurrogateTerm> surrogate_terms(const ClickTable& table);

struct FeatureTrainerOptions {
  std::vector<double> learning_rates{0.1, 0.01};
  int epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

// Minibatch gradient descent on the surrogate for each learning rate, from one
// seeded initialization. Candidates are the initialization and the weights
// after every epoch; the returned candidate maximizes ips_reward on the
// validation log (on the training log when the validation log has no clicks).
// Throws NoClickSignal when the training log has no clicks.
LinearRanker train_feature_based(const Dataset& dataset, const LogSlice& train,
                                 const LogSlice& validation,
                                 const FeatureTrainerOptions& options = {});

}  // namespace genspec
