#include "genspec/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace genspec {

Ranking::Ranking(std::vector<DocId> docs) : docs_(std::move(docs)) {
  std::vector<bool> seen(docs_.size(), false);
  for (DocId d : docs_) {
    if (d >= docs_.size() || seen[d]) {
      throw std::invalid_argument(
          "Ranking: documents must be a permutation of 0..K-1");
    }
    seen[d] = true;
  }
}

std::vector<std::size_t> Ranking::ranks() const {
  std::vector<std::size_t> out(docs_.size());
  for (std::size_t pos = 0; pos < docs_.size(); ++pos) out[docs_[pos]] = pos + 1;
  return out;
}

double dcg_weight(std::size_t rank) {
  if (rank == 0) throw std::domain_error("dcg_weight: rank must be >= 1");
  return 1.0 / std::log2(1.0 + static_cast<double>(rank));
}

RankWeights RankWeights::dcg() { return {dcg_weight, "dcg"}; }

RankWeights RankWeights::inverse_rank() {
  return {[](std::size_t rank) {
            if (rank == 0) throw std::domain_error("rank must be >= 1");
            return 1.0 / static_cast<double>(rank);
          },
          "inverse_rank"};
}

double RankWeights::operator()(std::size_t rank) const {
  if (rank == 0) throw std::domain_error("rank weight: rank must be >= 1");
  return fn_(rank);
}

double RankWeights::max_over(std::size_t num_ranks) const {
  double best = 0.0;
  for (std::size_t k = 1; k <= num_ranks; ++k) best = std::max(best, fn_(k));
  return best;
}

RelevanceTable::RelevanceTable(std::vector<std::vector<double>> values)
    : values_(std::move(values)) {
  for (const auto& row : values_) {
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("RelevanceTable: values must be in [0,1]");
      }
    }
  }
}

double RelevanceTable::operator()(QueryId q, DocId d) const {
  if (q >= values_.size() || d >= values_[q].size()) {
    throw std::out_of_range("RelevanceTable: no entry for (" +
                            std::to_string(q) + ", " + std::to_string(d) + ")");
  }
  return values_[q][d];
}

std::span<const double> RelevanceTable::query(QueryId q) const {
  if (q >= values_.size()) {
    throw std::out_of_range("RelevanceTable: unknown query " + std::to_string(q));
  }
  return values_[q];
}

// ScoreSortPolicy -----------------------------------------------------------

ScoreSortPolicy::ScoreSortPolicy(std::vector<std::vector<double>> scores)
    : scores_(std::move(scores)) {
  order_.resize(scores_.size());
  groups_.resize(scores_.size());
  for (std::size_t q = 0; q < scores_.size(); ++q) {
    const auto& s = scores_[q];
    for (double v : s) {
      if (std::isnan(v)) throw std::invalid_argument("ScoreSortPolicy: NaN score");
    }
    auto& order = order_[q];
    order.resize(s.size());
    std::iota(order.begin(), order.end(), DocId{0});
    std::stable_sort(order.begin(), order.end(),
                     [&s](DocId a, DocId b) { return s[a] > s[b]; });
    auto& groups = groups_[q];
    std::size_t begin = 0;
    for (std::size_t pos = 1; pos <= order.size(); ++pos) {
      if (pos == order.size() || s[order[pos]] != s[order[begin]]) {
        groups.push_back({begin, pos});
        begin = pos;
      }
    }
  }
}

ScoreSortPolicy ScoreSortPolicy::uniform(
    std::span<const std::size_t> candidate_counts) {
  std::vector<std::vector<double>> scores;
  scores.reserve(candidate_counts.size());
  for (std::size_t k : candidate_counts) scores.emplace_back(k, 0.0);
  return ScoreSortPolicy(std::move(scores));
}

void ScoreSortPolicy::check_query(QueryId q) const {
  if (q >= scores_.size()) {
    throw std::out_of_range("ScoreSortPolicy: unknown query " +
                            std::to_string(q));
  }
}

std::size_t ScoreSortPolicy::num_candidates(QueryId q) const {
  check_query(q);
  return scores_[q].size();
}

std::span<const double> ScoreSortPolicy::scores(QueryId q) const {
  check_query(q);
  return scores_[q];
}

const std::vector<ScoreSortPolicy::TieGroup>& ScoreSortPolicy::tie_groups(
    QueryId q) const {
  check_query(q);
  return groups_[q];
}

Ranking ScoreSortPolicy::canonical_ranking(QueryId q) const {
  check_query(q);
  return Ranking(order_[q]);
}

double ScoreSortPolicy::probability(const Ranking& y, QueryId q) const {
  check_query(q);
  const auto& s = scores_[q];
  if (y.size() != s.size()) return 0.0;
  for (std::size_t pos = 1; pos < y.size(); ++pos) {
    if (s[y[pos - 1]] < s[y[pos]]) return 0.0;
  }
  return 1.0 / valid_set_size(q);
}

Ranking ScoreSortPolicy::sample(QueryId q, Rng& rng) const {
  check_query(q);
  std::vector<DocId> docs = order_[q];
  for (const auto& g : groups_[q]) {
    if (g.end - g.begin > 1) {
      rng.shuffle(std::span<DocId>(docs).subspan(g.begin, g.end - g.begin));
    }
  }
  return Ranking(std::move(docs));
}

double ScoreSortPolicy::valid_set_size(QueryId q) const {
  check_query(q);
  double size = 1.0;
  for (const auto& g : groups_[q]) {
    for (std::size_t k = 2; k <= g.end - g.begin; ++k) size *= static_cast<double>(k);
  }
  return size;
}

std::vector<double> ScoreSortPolicy::expected_rank_weights(
    QueryId q, const RankWeights& lambda) const {
  check_query(q);
  std::vector<double> out(scores_[q].size());
  for (const auto& g : groups_[q]) {
    // Each member of a tie group is uniformly distributed over the group's
    // rank span.
    double total = 0.0;
    for (std::size_t pos = g.begin; pos < g.end; ++pos) total += lambda(pos + 1);
    const double mean = total / static_cast<double>(g.end - g.begin);
    for (std::size_t pos = g.begin; pos < g.end; ++pos) out[order_[q][pos]] = mean;
  }
  return out;
}

// Metrics ------------------------------------------------------------------

double ranking_quality(const Ranking& y, QueryId q, const RelevanceTable& r,
                       const RankWeights& lambda) {
  const auto rel = r.query(q);
  double total = 0.0;
  for (std::size_t pos = 0; pos < y.size(); ++pos) {
    if (y[pos] >= rel.size()) {
      throw std::out_of_range("ranking_quality: document " +
                              std::to_string(y[pos]) +
                              " has no relevance entry");
    }
    total += lambda(pos + 1) * rel[y[pos]];
  }
  return total;
}

double ideal_quality(QueryId q, const RelevanceTable& r,
                     const RankWeights& lambda) {
  auto rel = std::vector<double>(r.query(q).begin(), r.query(q).end());
  std::sort(rel.begin(), rel.end(), std::greater<>());
  double total = 0.0;
  for (std::size_t pos = 0; pos < rel.size(); ++pos) total += lambda(pos + 1) * rel[pos];
  return total;
}

namespace {

double expected_quality(const Policy& policy, QueryId q,
                        const RelevanceTable& r, const RankWeights& lambda) {
  const auto weights = policy.expected_rank_weights(q, lambda);
  const auto rel = r.query(q);
  if (rel.size() != weights.size()) {
    throw std::invalid_argument("relevance table and policy disagree on K");
  }
  double total = 0.0;
  for (std::size_t d = 0; d < weights.size(); ++d) total += weights[d] * rel[d];
  return total;
}

}  // namespace

double true_reward(const Policy& policy, std::span<const WeightedQuery> queries,
                   const RelevanceTable& r, const RankWeights& lambda) {
  double weight_sum = 0.0;
  double total = 0.0;
  for (const auto& wq : queries) {
    weight_sum += wq.weight;
    total += wq.weight * expected_quality(policy, wq.query, r, lambda);
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("true_reward: query weights must sum to 1");
  }
  return total;
}

std::vector<WeightedQuery> uniform_weights(std::span<const QueryId> queries) {
  std::vector<WeightedQuery> out;
  out.reserve(queries.size());
  for (QueryId q : queries) {
    out.push_back({q, 1.0 / static_cast<double>(queries.size())});
  }
  return out;
}

double ndcg(const Policy& policy, std::span<const QueryId> queries,
            const RelevanceTable& r, const RankWeights& lambda) {
  double total = 0.0;
  std::size_t counted = 0;
  for (QueryId q : queries) {
    const double ideal = ideal_quality(q, r, lambda);
    if (ideal <= 0.0) continue;
    total += expected_quality(policy, q, r, lambda) / ideal;
    ++counted;
  }
  if (counted == 0) {
    throw std::invalid_argument("ndcg: no query has a relevant document");
  }
  return total / static_cast<double>(counted);
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace genspec
