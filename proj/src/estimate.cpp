#include "genspec/estimate.hpp"

#include <cmath>
#include <string>

namespace genspec {

const std::vector<double>& RankWeightCache::operator()(QueryId q) {
  auto it = cache_.find(q);
  if (it == cache_.end()) {
    it = cache_.emplace(q, policy_.expected_rank_weights(q, lambda_)).first;
  }
  return it->second;
}

namespace {

void check_candidates(const std::vector<double>& weights, const LoggedInteraction& record) {
  if (weights.size() != record.num_candidates()) {
    throw std::invalid_argument("candidate-set mismatch between policy and log for query " +
                                std::to_string(record.query));
  }
}

// Reduces per-record values in log order.
template <typename PerRecord>
double sum_records(const LogSlice& log, PerRecord&& per_record) {
  std::vector<double> values(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) values[i] = per_record(log[i]);
  return pairwise_sum(values);
}

// Two-pass mean / squared deviation over |D| * K terms. `terms` writes one
// record's X_{i,d} values (candidate order); zero padding covers the rest.
// Terms are recomputed in the second pass rather than stored.
template <typename Terms>
DeviationStats deviation_stats(const LogSlice& log, std::size_t K, Terms&& terms) {
  if (log.max_candidates() > K) {
    throw std::invalid_argument("bound: K is smaller than a record's candidate count");
  }
  DeviationStats stats;
  stats.count = static_cast<double>(log.size()) * static_cast<double>(K);
  if (log.empty()) return stats;

  std::vector<double> x;
  std::vector<double> partial(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    terms(log[i], x);
    double s = 0.0;
    for (double v : x) s += v;
    partial[i] = s;
  }
  stats.mean = pairwise_sum(partial) / stats.count;

  for (std::size_t i = 0; i < log.size(); ++i) {
    terms(log[i], x);
    double s = 0.0;
    for (double v : x) s += (v - stats.mean) * (v - stats.mean);
    s += static_cast<double>(K - x.size()) * stats.mean * stats.mean;
    partial[i] = s;
  }
  stats.sum_sq_dev = pairwise_sum(partial);
  return stats;
}

}  // namespace

double ips_delta(const Ranking& y, const LoggedInteraction& record,
                 const RankWeights& lambda) {
  if (y.size() > record.num_candidates()) {
    throw std::invalid_argument("ips_delta: ranking has more documents than the record");
  }
  for (std::size_t d = y.size(); d < record.num_candidates(); ++d) {
    if (record.clicks[d]) {
      throw std::invalid_argument("ips_delta: clicked document " + std::to_string(d) +
                                  " missing from evaluated ranking");
    }
  }
  double total = 0.0;
  for (std::size_t pos = 0; pos < y.size(); ++pos) {
    const DocId d = y[pos];
    if (record.clicks[d]) total += lambda(pos + 1) / record.propensities[d];
  }
  return total;
}

double ips_reward(const Policy& policy, const LogSlice& log, const RankWeights& lambda) {
  if (log.empty()) throw std::invalid_argument("ips_reward: empty log");
  RankWeightCache weights(policy, lambda);
  const double total = sum_records(log, [&](const LoggedInteraction& rec) {
    const auto& w = weights(rec.query);
    check_candidates(w, rec);
    double v = 0.0;
    for (std::size_t d = 0; d < w.size(); ++d) {
      if (rec.clicks[d]) v += w[d] / rec.propensities[d];
    }
    return v;
  });
  return total / static_cast<double>(log.size());
}

ClickTable aggregate_clicks(const LogSlice& log) {
  ClickTable table;
  table.total_interactions = log.size();
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& rec = log[i];
    auto& entry = table.queries[rec.query];
    if (entry.mass.empty()) entry.mass.assign(rec.num_candidates(), 0.0);
    if (entry.mass.size() != rec.num_candidates()) {
      throw std::invalid_argument("aggregate_clicks: inconsistent candidate count");
    }
    ++entry.interactions;
    for (std::size_t d = 0; d < rec.num_candidates(); ++d) {
      if (rec.clicks[d]) entry.mass[d] += 1.0 / rec.propensities[d];
    }
  }
  return table;
}

double ips_reward(const Policy& policy, const ClickTable& table, const RankWeights& lambda) {
  if (table.total_interactions == 0) throw std::invalid_argument("ips_reward: empty log");
  double total = 0.0;
  for (const auto& [q, clicks] : table.queries) {
    const auto w = policy.expected_rank_weights(q, lambda);
    if (w.size() != clicks.mass.size()) {
      throw std::invalid_argument("ips_reward: candidate-set mismatch");
    }
    for (std::size_t d = 0; d < w.size(); ++d) total += w[d] * clicks.mass[d];
  }
  return total / static_cast<double>(table.total_interactions);
}

std::vector<double> per_document_relative(const Policy& first, const Policy& second,
                                          const LoggedInteraction& record,
                                          const RankWeights& lambda) {
  const auto w1 = first.expected_rank_weights(record.query, lambda);
  const auto w2 = second.expected_rank_weights(record.query, lambda);
  check_candidates(w1, record);
  check_candidates(w2, record);
  std::vector<double> out(record.num_candidates(), 0.0);
  for (std::size_t d = 0; d < out.size(); ++d) {
    if (record.clicks[d]) out[d] = (w1[d] - w2[d]) / record.propensities[d];
  }
  return out;
}

// Bounds --------------------------------------------------------------------

void BoundConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("BoundConfig: epsilon must be in [0, 1)");
  }
  if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("BoundConfig: b must be positive");
  if (K == 0) throw std::invalid_argument("BoundConfig: K must be positive");
}

double BoundConfig::log_term() const { return std::log(2.0 / (1.0 - epsilon)); }

BoundConfig make_bound_config(const LogSlice& log, double epsilon, const RankWeights& lambda) {
  if (log.empty()) throw std::invalid_argument("make_bound_config: empty log");
  BoundConfig config;
  config.epsilon = epsilon;
  config.K = log.max_candidates();
  config.b = lambda.max_over(config.K) / log.min_propensity();
  config.validate();
  return config;
}

DeviationStats relative_stats(const Policy& first, const Policy& second,
                              const LogSlice& log, std::size_t K,
                              const RankWeights& lambda) {
  RankWeightCache w1(first, lambda);
  RankWeightCache w2(second, lambda);
  const double k = static_cast<double>(K);
  return deviation_stats(log, K, [&](const LoggedInteraction& rec, std::vector<double>& x) {
    const auto& a = w1(rec.query);
    const auto& b = w2(rec.query);
    check_candidates(a, rec);
    check_candidates(b, rec);
    x.assign(rec.num_candidates(), 0.0);
    for (std::size_t d = 0; d < x.size(); ++d) {
      if (rec.clicks[d]) x[d] = k * (a[d] - b[d]) / rec.propensities[d];
    }
  });
}

DeviationStats single_stats(const Policy& policy, const LogSlice& log, std::size_t K,
                            const RankWeights& lambda) {
  RankWeightCache w(policy, lambda);
  const double k = static_cast<double>(K);
  return deviation_stats(log, K, [&](const LoggedInteraction& rec, std::vector<double>& x) {
    const auto& a = w(rec.query);
    check_candidates(a, rec);
    x.assign(rec.num_candidates(), 0.0);
    for (std::size_t d = 0; d < x.size(); ++d) {
      if (rec.clicks[d]) x[d] = k * a[d] / rec.propensities[d];
    }
  });
}

RelativeEstimate bound_from_stats(const DeviationStats& stats, const BoundConfig& config) {
  config.validate();
  const double n = stats.count;
  if (!(n > 1.0)) throw std::invalid_argument("bound: |D| * K must exceed 1");
  const double log_term = config.log_term();
  RelativeEstimate out;
  out.delta_hat = stats.mean;
  out.nu = 2.0 * n * log_term / (n - 1.0) * stats.sum_sq_dev;
  out.cb = 7.0 * static_cast<double>(config.K) * config.b * log_term / (3.0 * (n - 1.0)) +
           std::sqrt(out.nu) / n;
  out.lcb = out.delta_hat - out.cb;
  out.ucb = out.delta_hat + out.cb;
  return out;
}

RelativeEstimate relative_bound(const Policy& first, const Policy& second,
                                const LogSlice& log, const BoundConfig& config,
                                const RankWeights& lambda) {
  config.validate();
  if (static_cast<double>(log.size()) * static_cast<double>(config.K) <= 1.0) {
    throw std::invalid_argument("relative_bound: |D| * K must exceed 1");
  }
  return bound_from_stats(relative_stats(first, second, log, config.K, lambda), config);
}

SeaEstimate sea_bound(const Policy& policy, const LogSlice& log,
                      const BoundConfig& config, const RankWeights& lambda) {
  config.validate();
  if (static_cast<double>(log.size()) * static_cast<double>(config.K) <= 1.0) {
    throw std::invalid_argument("sea_bound: |D| * K must exceed 1");
  }
  const auto est = bound_from_stats(single_stats(policy, log, config.K, lambda), config);
  return {est.delta_hat, est.nu, est.cb};
}

bool sea_decision(const Policy& first, const Policy& second, const LogSlice& log,
                  const BoundConfig& config, const RankWeights& lambda) {
  const auto a = sea_bound(first, log, config, lambda);
  const auto b = sea_bound(second, log, config, lambda);
  return a.reward - a.cb > b.reward + b.cb;
}

}  // namespace genspec
