#include "genspec/contextual.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "genspec/core.hpp"

namespace genspec::bandit {

ContextualLog::ContextualLog(std::vector<Record> records, std::size_t num_actions)
    : records_(std::move(records)), num_actions_(num_actions) {
  if (num_actions_ == 0) throw std::invalid_argument("ContextualLog: no actions");
  for (const auto& r : records_) {
    if (r.action >= num_actions_) throw std::invalid_argument("ContextualLog: action out of range");
    if (!(r.propensity > 0.0 && r.propensity <= 1.0)) {
      throw std::invalid_argument("ContextualLog: propensity must be in (0, 1]");
    }
    if (!std::isfinite(r.reward)) throw std::invalid_argument("ContextualLog: non-finite reward");
  }
}

std::set<Context> ContextualLog::contexts() const {
  std::set<Context> out;
  for (const auto& r : records_) out.insert(r.context);
  return out;
}

ContextualLog ContextualLog::for_context(Context z) const {
  ContextualLog out;
  out.num_actions_ = num_actions_;
  for (const auto& r : records_) {
    if (r.context == z) out.records_.push_back(r);
  }
  return out;
}

double ContextualLog::min_propensity() const {
  if (records_.empty()) throw std::invalid_argument("ContextualLog: empty log");
  double m = records_.front().propensity;
  for (const auto& r : records_) m = std::min(m, r.propensity);
  return m;
}

std::pair<ContextualLog, ContextualLog> ContextualLog::split(double beta, Rng& rng) const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("split: beta must be in [0, 1]");
  std::vector<std::size_t> index(records_.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(index));
  const auto held = static_cast<std::size_t>(std::llround(beta * static_cast<double>(index.size())));
  std::vector<char> selected(records_.size(), 0);
  for (std::size_t i = 0; i < held; ++i) selected[index[i]] = 1;
  ContextualLog train, sel;
  train.num_actions_ = sel.num_actions_ = num_actions_;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    (selected[i] ? sel : train).records_.push_back(records_[i]);
  }
  return {std::move(train), std::move(sel)};
}

TablePolicy::TablePolicy(std::map<Context, std::vector<double>> rows, std::vector<double> fallback)
    : rows_(std::move(rows)), fallback_(std::move(fallback)) {
  auto check = [this](const std::vector<double>& row) {
    if (row.size() != fallback_.size()) throw std::invalid_argument("TablePolicy: row size mismatch");
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw std::invalid_argument("TablePolicy: negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("TablePolicy: row must sum to 1");
  };
  if (fallback_.empty()) throw std::invalid_argument("TablePolicy: no actions");
  check(fallback_);
  for (const auto& [z, row] : rows_) check(row);
}

TablePolicy TablePolicy::uniform(std::size_t num_actions) {
  if (num_actions == 0) throw std::invalid_argument("TablePolicy: no actions");
  return TablePolicy({}, std::vector<double>(num_actions, 1.0 / static_cast<double>(num_actions)));
}

TablePolicy TablePolicy::deterministic(std::map<Context, Action> choices, std::size_t num_actions) {
  std::map<Context, std::vector<double>> rows;
  for (const auto& [z, a] : choices) {
    if (a >= num_actions) throw std::invalid_argument("TablePolicy: action out of range");
    std::vector<double> row(num_actions, 0.0);
    row[a] = 1.0;
    rows.emplace(z, std::move(row));
  }
  return TablePolicy(std::move(rows),
                     std::vector<double>(num_actions, 1.0 / static_cast<double>(num_actions)));
}

double TablePolicy::probability(Context z, Action a) const {
  if (a >= fallback_.size()) throw std::out_of_range("TablePolicy: action out of range");
  const auto it = rows_.find(z);
  return it == rows_.end() ? fallback_[a] : it->second[a];
}

double ips_reward(const ContextualPolicy& policy, const ContextualLog& log) {
  if (log.empty()) throw std::invalid_argument("ips_reward: empty log");
  std::vector<double> terms(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    terms[i] = r.reward / r.propensity * policy.probability(r.context, r.action);
  }
  return pairwise_sum(terms) / static_cast<double>(log.size());
}

RelativeEstimate relative_bound(const ContextualPolicy& first, const ContextualPolicy& second,
                                const ContextualLog& log, double epsilon, double reward_bound) {
  if (log.size() < 2) throw std::invalid_argument("relative_bound: need at least 2 records");
  if (!(reward_bound > 0.0)) throw std::invalid_argument("relative_bound: reward_bound must be > 0");
  BoundConfig config;
  config.epsilon = epsilon;
  config.K = 1;
  config.b = reward_bound / log.min_propensity();
  std::vector<double> terms(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    terms[i] = r.reward / r.propensity *
               (first.probability(r.context, r.action) - second.probability(r.context, r.action));
  }
  DeviationStats stats;
  stats.count = static_cast<double>(log.size());
  stats.mean = pairwise_sum(terms) / stats.count;
  for (auto& t : terms) t = (t - stats.mean) * (t - stats.mean);
  stats.sum_sq_dev = pairwise_sum(terms);
  return bound_from_stats(stats, config);
}

namespace {

Action argmax(const std::vector<double>& values) {
  return static_cast<Action>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

std::shared_ptr<const ContextualPolicy> train_specialized(const ContextualLog& log) {
  std::map<Context, std::vector<double>> mass;
  for (const auto& r : log.records()) {
    auto& row = mass[r.context];
    if (row.empty()) row.assign(log.num_actions(), 0.0);
    row[r.action] += r.reward / r.propensity;
  }
  std::map<Context, Action> choices;
  for (const auto& [z, row] : mass) choices.emplace(z, argmax(row));
  return std::make_shared<TablePolicy>(
      TablePolicy::deterministic(std::move(choices), std::max<std::size_t>(1, log.num_actions())));
}

std::shared_ptr<const ContextualPolicy> train_generalized(const ContextualLog& log) {
  const std::size_t k = std::max<std::size_t>(1, log.num_actions());
  std::vector<double> mass(k, 0.0);
  for (const auto& r : log.records()) mass[r.action] += r.reward / r.propensity;
  std::vector<double> row(k, 0.0);
  row[argmax(mass)] = 1.0;
  return std::make_shared<TablePolicy>(std::map<Context, std::vector<double>>{}, std::move(row));
}

ContextualGenSpec::ContextualGenSpec(std::shared_ptr<const ContextualPolicy> logging,
                                     std::shared_ptr<const ContextualPolicy> general,
                                     std::shared_ptr<const ContextualPolicy> specialized,
                                     ContextualDecision decision)
    : logging_(std::move(logging)),
      general_(std::move(general)),
      specialized_(std::move(specialized)),
      decision_(std::move(decision)) {
  if (!logging_) throw std::invalid_argument("ContextualGenSpec: logging policy is required");
  if (decision_.general_activated && !general_) {
    throw std::invalid_argument("ContextualGenSpec: activated without a general policy");
  }
  if (!decision_.override_contexts.empty() && !specialized_) {
    throw std::invalid_argument("ContextualGenSpec: overrides without a specialized policy");
  }
}

double ContextualGenSpec::probability(Context z, Action a) const {
  if (decision_.override_contexts.count(z)) return specialized_->probability(z, a);
  if (decision_.general_activated) return general_->probability(z, a);
  return logging_->probability(z, a);
}

ContextualGenSpec initialize(std::shared_ptr<const ContextualPolicy> logging,
                             const ContextualLog& log, double epsilon, double beta,
                             const ContextualTrainer& general,
                             const ContextualTrainer& specialized, Rng& rng,
                             double reward_bound) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("initialize: beta must be in (0, 1)");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("initialize: epsilon must be in [0, 1)");
  }
  if (!logging) throw std::invalid_argument("initialize: logging policy is required");
  if (log.empty()) return ContextualGenSpec(logging, nullptr, nullptr, {});

  const auto [train, sel] = log.split(beta, rng);
  const auto general_primed = general(train);
  const auto specialized_primed = specialized(train);

  ContextualDecision decision;
  if (general_primed && sel.size() >= 2) {
    decision.general_activated =
        relative_bound(*general_primed, *logging, sel, epsilon, reward_bound).lcb > 0.0;
  }
  const ContextualPolicy& baseline =
      decision.general_activated ? *general_primed : *logging;
  if (specialized_primed) {
    for (Context z : sel.contexts()) {
      const auto slice = sel.for_context(z);
      if (slice.size() < 2) continue;
      if (relative_bound(*specialized_primed, baseline, slice, epsilon, reward_bound).lcb > 0.0) {
        decision.override_contexts.insert(z);
      }
    }
  }
  return ContextualGenSpec(logging, general(log), specialized(log), std::move(decision));
}

}  // namespace genspec::bandit
