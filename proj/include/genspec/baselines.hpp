#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "genspec/core.hpp"
#include "genspec/data.hpp"
#include "genspec/rng.hpp"
#include "genspec/simulate.hpp"

// Online tabular bandit rankers. Each chooses its own displayed rankings and
// learns from the clicks they receive; all state is kept per query.
namespace genspec {

class OnlineRanker {
 public:
  virtual ~OnlineRanker() = default;
  virtual Ranking display(QueryId q, Rng& rng) = 0;
  // `clicks` is indexed by candidate.
  virtual void update(QueryId q, const Ranking& shown, const std::vector<std::uint8_t>& clicks) = 0;
  // The ranking policy evaluated offline (never the exploratory displays).
  virtual ScoreSortPolicy reported_policy() const = 0;
};

// Greedy by IPS relevance estimate, examination known to be 1 / rank. Per
// step one document, chosen round-robin, gets the optimistic bonus
// sqrt(2 ln(1 + n_q) / (1 + exposure_d)), exposure_d being its summed
// examination probability so far.
class PbmState final : public OnlineRanker {
 public:
  explicit PbmState(std::vector<std::size_t> candidate_counts);

  Ranking display(QueryId q, Rng& rng) override;
  void update(QueryId q, const Ranking& shown, const std::vector<std::uint8_t>& clicks) override;
  ScoreSortPolicy reported_policy() const override;

  std::vector<double> estimates(QueryId q) const;
  std::size_t interactions(QueryId q) const;

 private:
  struct QueryState {
    std::size_t n = 0;
    std::size_t cursor = 0;
    std::vector<double> mass;      // sum of click * rank
    std::vector<double> exposure;  // sum of 1 / rank
  };
  QueryState& state(QueryId q);

  std::vector<std::size_t> counts_;
  std::map<QueryId, QueryState> states_;
};

// Displays the base ranking with its top-n shuffled uniformly and counts
// pairwise preferences P[d][d'] (d clicked, d' in the top-n not clicked).
// Reports the top-n ordered by Copeland score, ties by base order, followed
// by the untouched remainder of the base ranking.
class HotfixState final : public OnlineRanker {
 public:
  HotfixState(const ScoreSortPolicy& base, std::size_t depth);

  Ranking display(QueryId q, Rng& rng) override;
  void update(QueryId q, const Ranking& shown, const std::vector<std::uint8_t>& clicks) override;
  ScoreSortPolicy reported_policy() const override;

  Ranking reported(QueryId q) const;
  double preference(QueryId q, DocId winner, DocId loser) const;
  std::size_t depth() const { return depth_; }

 private:
  std::vector<Ranking> base_;
  std::size_t depth_;
  std::map<QueryId, std::vector<double>> prefs_;  // row-major K x K
};

// Drives an online ranker through simulated interactions. Queries are drawn
// uniformly from `queries`; clicks follow the position-based click model.
// Successive run_to calls continue the same random stream.
class OnlineSimulator {
 public:
  OnlineSimulator(const Dataset& dataset, std::vector<QueryId> queries, ClickModel model,
                  std::uint64_t seed);

  void run_to(OnlineRanker& ranker, std::size_t total_interactions);
  std::size_t interactions() const { return done_; }

 private:
  const Dataset& dataset_;
  std::vector<QueryId> queries_;
  ClickModel model_;
  Rng rng_;
  std::size_t done_ = 0;
};

}  // namespace genspec
