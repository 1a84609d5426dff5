#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genspec/rng.hpp"

namespace genspec {

// Dense query index within a Dataset (train, validation and test queries share
// one id space).
using QueryId = std::uint32_t;
// Document index within its query's candidate list, 0..K-1.
using DocId = std::uint32_t;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An ordering of a query's K candidates. Always a permutation of 0..K-1.
class Ranking {
 public:
  Ranking() = default;
  explicit Ranking(std::vector<DocId> docs);

  std::size_t size() const { return docs_.size(); }
  DocId operator[](std::size_t position) const { return docs_[position]; }
  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }
  const std::vector<DocId>& docs() const { return docs_; }

  // ranks()[d] is the 1-based rank of document d.
  std::vector<std::size_t> ranks() const;

  friend bool operator==(const Ranking&, const Ranking&) = default;

 private:
  std::vector<DocId> docs_;
};

// Rank weight function lambda: positive rank -> weight.
class RankWeights {
 public:
  RankWeights(std::function<double(std::size_t)> fn, std::string name)
      : fn_(std::move(fn)), name_(std::move(name)) {}

  // 1 / log2(1 + rank).
  static RankWeights dcg();
  // 1 / rank; the examination probability of the position-biased user.
  static RankWeights inverse_rank();

  double operator()(std::size_t rank) const;
  double max_over(std::size_t num_ranks) const;
  const std::string& name() const { return name_; }

 private:
  std::function<double(std::size_t)> fn_;
  std::string name_;
};

double dcg_weight(std::size_t rank);

// r(q, d) in [0, 1] for every candidate of every query.
class RelevanceTable {
 public:
  RelevanceTable() = default;
  explicit RelevanceTable(std::vector<std::vector<double>> values);

  double operator()(QueryId q, DocId d) const;
  std::span<const double> query(QueryId q) const;
  std::size_t num_queries() const { return values_.size(); }

 private:
  std::vector<std::vector<double>> values_;
};

// A distribution over rankings per query.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::size_t num_candidates(QueryId q) const = 0;
  virtual double probability(const Ranking& y, QueryId q) const = 0;
  virtual Ranking sample(QueryId q, Rng& rng) const = 0;
  // Number of rankings with non-zero probability. Exact while it fits in a
  // double's mantissa.
  virtual double valid_set_size(QueryId q) const = 0;
  // E_{y ~ pi(.|q)}[lambda(rank(d | y))] for every candidate d.
  virtual std::vector<double> expected_rank_weights(
      QueryId q, const RankWeights& lambda) const = 0;
};

// Sorts documents by score; tied documents are ordered uniformly at random.
// The valid set Y(q) holds every ranking that never places a lower-scored
// document above a strictly higher-scored one, each with probability 1/|Y(q)|.
// Ties are detected by exact equality of the scores.
class ScoreSortPolicy final : public Policy {
 public:
  struct TieGroup {
    std::size_t begin;  // first position (0-based) in the canonical order
    std::size_t end;    // one past the last position
  };

  ScoreSortPolicy() = default;
  explicit ScoreSortPolicy(std::vector<std::vector<double>> scores);

  // All candidates tied: the uniform random policy.
  static ScoreSortPolicy uniform(std::span<const std::size_t> candidate_counts);

  std::size_t num_queries() const { return scores_.size(); }
  std::size_t num_candidates(QueryId q) const override;
  double probability(const Ranking& y, QueryId q) const override;
  Ranking sample(QueryId q, Rng& rng) const override;
  double valid_set_size(QueryId q) const override;
  std::vector<double> expected_rank_weights(
      QueryId q, const RankWeights& lambda) const override;

  std::span<const double> scores(QueryId q) const;
  // Score-descending order with ties broken by document index.
  Ranking canonical_ranking(QueryId q) const;
  const std::vector<TieGroup>& tie_groups(QueryId q) const;

 private:
  void check_query(QueryId q) const;

  std::vector<std::vector<double>> scores_;
  std::vector<std::vector<DocId>> order_;
  std::vector<std::vector<TieGroup>> groups_;
};

// Delta(y | q, r) = sum_d lambda(rank(d | y)) * r(q, d).
double ranking_quality(const Ranking& y, QueryId q, const RelevanceTable& r,
                       const RankWeights& lambda);

// Highest achievable Delta for q: documents sorted by relevance.
double ideal_quality(QueryId q, const RelevanceTable& r,
                     const RankWeights& lambda);

struct WeightedQuery {
  QueryId query;
  double weight;
};

// R(pi) = sum_q P(q) E_{y ~ pi}[Delta(y | q, r)], evaluated analytically
// through expected_rank_weights.
double true_reward(const Policy& policy, std::span<const WeightedQuery> queries,
                   const RelevanceTable& r, const RankWeights& lambda);

std::vector<WeightedQuery> uniform_weights(std::span<const QueryId> queries);

// Mean over queries of E[Delta] / ideal Delta, full ranking (no cutoff).
// Queries whose ideal Delta is zero are skipped.
double ndcg(const Policy& policy, std::span<const QueryId> queries,
            const RelevanceTable& r, const RankWeights& lambda);

// Pairwise (cascade) summation with a fixed reduction tree; results depend
// only on the input order, never on threading.
double pairwise_sum(std::span<const double> values);

}  // namespace genspec
