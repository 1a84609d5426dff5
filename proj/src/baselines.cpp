#include "genspec/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace genspec {

namespace {

void check_shown(const Ranking& shown, const std::vector<std::uint8_t>& clicks, std::size_t k) {
  if (shown.size() != k || clicks.size() != k) {
    throw std::invalid_argument("online update: ranking or clicks do not match candidate count");
  }
}

}  // namespace

// PBM ------------------------------------------------------------------------

PbmState::PbmState(std::vector<std::size_t> candidate_counts)
    : counts_(std::move(candidate_counts)) {}

PbmState::QueryState& PbmState::state(QueryId q) {
  if (q >= counts_.size()) throw std::out_of_range("PbmState: unknown query");
  auto& s = states_[q];
  if (s.mass.empty()) {
    s.mass.assign(counts_[q], 0.0);
    s.exposure.assign(counts_[q], 0.0);
  }
  return s;
}

std::vector<double> PbmState::estimates(QueryId q) const {
  if (q >= counts_.size()) throw std::out_of_range("PbmState: unknown query");
  const auto it = states_.find(q);
  if (it == states_.end() || it->second.n == 0) return std::vector<double>(counts_[q], 0.0);
  std::vector<double> out(it->second.mass);
  for (double& v : out) v /= static_cast<double>(it->second.n);
  return out;
}

std::size_t PbmState::interactions(QueryId q) const {
  const auto it = states_.find(q);
  return it == states_.end() ? 0 : it->second.n;
}

Ranking PbmState::display(QueryId q, Rng& rng) {
  auto scores = estimates(q);
  auto& s = state(q);
  const std::size_t k = scores.size();
  const std::size_t explore = s.cursor % k;
  s.cursor = (s.cursor + 1) % k;
  scores[explore] += std::sqrt(2.0 * std::log1p(static_cast<double>(s.n)) /
                               (1.0 + s.exposure[explore]));
  return ScoreSortPolicy({std::move(scores)}).sample(0, rng);
}

void PbmState::update(QueryId q, const Ranking& shown, const std::vector<std::uint8_t>& clicks) {
  auto& s = state(q);
  check_shown(shown, clicks, s.mass.size());
  ++s.n;
  for (std::size_t pos = 0; pos < shown.size(); ++pos) {
    const DocId d = shown[pos];
    const double rank = static_cast<double>(pos + 1);
    s.exposure[d] += 1.0 / rank;
    if (clicks[d]) s.mass[d] += rank;
  }
}

ScoreSortPolicy PbmState::reported_policy() const {
  std::vector<std::vector<double>> scores;
  scores.reserve(counts_.size());
  for (QueryId q = 0; q < counts_.size(); ++q) scores.push_back(estimates(q));
  return ScoreSortPolicy(std::move(scores));
}

// Hotfix ---------------------------------------------------------------------

HotfixState::HotfixState(const ScoreSortPolicy& base, std::size_t depth) : depth_(depth) {
  if (depth_ == 0) throw std::invalid_argument("HotfixState: depth must be positive");
  base_.reserve(base.num_queries());
  for (QueryId q = 0; q < base.num_queries(); ++q) {
    if (depth_ > base.num_candidates(q)) {
      throw std::invalid_argument("HotfixState: depth " + std::to_string(depth_) +
                                  " exceeds the candidate count of query " + std::to_string(q));
    }
    base_.push_back(base.canonical_ranking(q));
  }
}

Ranking HotfixState::display(QueryId q, Rng& rng) {
  if (q >= base_.size()) throw std::out_of_range("HotfixState: unknown query");
  std::vector<DocId> docs = base_[q].docs();
  rng.shuffle(std::span<DocId>(docs.data(), depth_));
  return Ranking(std::move(docs));
}

void HotfixState::update(QueryId q, const Ranking& shown, const std::vector<std::uint8_t>& clicks) {
  if (q >= base_.size()) throw std::out_of_range("HotfixState: unknown query");
  const std::size_t k = base_[q].size();
  check_shown(shown, clicks, k);
  auto& p = prefs_[q];
  if (p.empty()) p.assign(k * k, 0.0);
  for (std::size_t i = 0; i < depth_; ++i) {
    const DocId d = shown[i];
    if (!clicks[d]) continue;
    for (std::size_t j = 0; j < depth_; ++j) {
      const DocId o = shown[j];
      if (o != d && !clicks[o]) p[d * k + o] += 1.0;
    }
  }
}

double HotfixState::preference(QueryId q, DocId winner, DocId loser) const {
  if (q >= base_.size()) throw std::out_of_range("HotfixState: unknown query");
  const std::size_t k = base_[q].size();
  if (winner >= k || loser >= k) throw std::out_of_range("HotfixState: unknown document");
  const auto it = prefs_.find(q);
  return it == prefs_.end() ? 0.0 : it->second[winner * k + loser];
}

Ranking HotfixState::reported(QueryId q) const {
  if (q >= base_.size()) throw std::out_of_range("HotfixState: unknown query");
  const auto it = prefs_.find(q);
  if (it == prefs_.end()) return base_[q];
  const auto& p = it->second;
  const std::size_t k = base_[q].size();
  const auto& base = base_[q].docs();

  std::vector<long> copeland(depth_, 0);
  for (std::size_t i = 0; i < depth_; ++i) {
    for (std::size_t j = 0; j < depth_; ++j) {
      if (i == j) continue;
      const double w = p[base[i] * k + base[j]];
      const double l = p[base[j] * k + base[i]];
      copeland[i] += (w > l) - (w < l);
    }
  }
  std::vector<std::size_t> order(depth_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&copeland](std::size_t a, std::size_t b) { return copeland[a] > copeland[b]; });
  std::vector<DocId> docs;
  docs.reserve(k);
  for (std::size_t i : order) docs.push_back(base[i]);
  docs.insert(docs.end(), base.begin() + static_cast<std::ptrdiff_t>(depth_), base.end());
  return Ranking(std::move(docs));
}

ScoreSortPolicy HotfixState::reported_policy() const {
  std::vector<std::vector<double>> scores;
  scores.reserve(base_.size());
  for (QueryId q = 0; q < base_.size(); ++q) {
    const Ranking y = reported(q);
    std::vector<double> s(y.size());
    for (std::size_t pos = 0; pos < y.size(); ++pos) s[y[pos]] = static_cast<double>(y.size() - pos);
    scores.push_back(std::move(s));
  }
  return ScoreSortPolicy(std::move(scores));
}

// Simulator ------------------------------------------------------------------

OnlineSimulator::OnlineSimulator(const Dataset& dataset, std::vector<QueryId> queries,
                                 ClickModel model, std::uint64_t seed)
    : dataset_(dataset), queries_(std::move(queries)), model_(model), rng_(seed) {
  model_.validate();
  if (queries_.empty()) throw std::invalid_argument("OnlineSimulator: no queries");
}

void OnlineSimulator::run_to(OnlineRanker& ranker, std::size_t total_interactions) {
  if (total_interactions < done_) {
    throw std::invalid_argument("OnlineSimulator: cannot rewind");
  }
  std::vector<std::uint8_t> clicks;
  for (; done_ < total_interactions; ++done_) {
    const QueryId q = queries_[rng_.uniform_index(queries_.size())];
    const Query& query = dataset_.query(q);
    const Ranking shown = ranker.display(q, rng_);
    clicks.assign(query.num_candidates(), 0);
    for (std::size_t pos = 0; pos < shown.size(); ++pos) {
      const DocId d = shown[pos];
      if (rng_.bernoulli(model_.examination(pos + 1)) &&
          rng_.bernoulli(model_.click_probability(query.labels[d]))) {
        clicks[d] = 1;
      }
    }
    ranker.update(q, shown, clicks);
  }
}

}  // namespace genspec
