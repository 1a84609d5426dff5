#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "genspec/estimate.hpp"
#include "genspec/rng.hpp"

// Specialization for general contextual bandits: rewards are observed per
// (context, action) instead of through clicks on rankings.
namespace genspec::bandit {

using Context = std::uint32_t;
using Action = std::uint32_t;

struct Record {
  double reward = 0.0;
  Action action = 0;
  double propensity = 1.0;  // pi_0(action | context), in (0, 1]
  Context context = 0;

  friend bool operator==(const Record&, const Record&) = default;
};

class ContextualLog {
 public:
  ContextualLog() = default;
  ContextualLog(std::vector<Record> records, std::size_t num_actions);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const Record& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<Record>& records() const { return records_; }
  std::size_t num_actions() const { return num_actions_; }

  std::set<Context> contexts() const;
  ContextualLog for_context(Context z) const;
  double min_propensity() const;

  // Held-out fraction beta goes to the second part; order is preserved.
  std::pair<ContextualLog, ContextualLog> split(double beta, Rng& rng) const;

 private:
  std::vector<Record> records_;
  std::size_t num_actions_ = 0;
};

class ContextualPolicy {
 public:
  virtual ~ContextualPolicy() = default;
  virtual std::size_t num_actions() const = 0;
  virtual double probability(Context z, Action a) const = 0;
};

// Explicit per-context action distributions; contexts without a row use
// `fallback`.
class TablePolicy final : public ContextualPolicy {
 public:
  TablePolicy(std::map<Context, std::vector<double>> rows, std::vector<double> fallback);
  static TablePolicy uniform(std::size_t num_actions);
  static TablePolicy deterministic(std::map<Context, Action> choices, std::size_t num_actions);

  std::size_t num_actions() const override { return fallback_.size(); }
  double probability(Context z, Action a) const override;

 private:
  std::map<Context, std::vector<double>> rows_;
  std::vector<double> fallback_;
};

// R_hat(pi) = (1 / |D|) sum_i r_i / rho_i * pi(a_i | z_i).
double ips_reward(const ContextualPolicy& policy, const ContextualLog& log);

// Bound on R(pi1) - R(pi2) from R_i = r_i / rho_i (pi1(a_i|z_i) - pi2(a_i|z_i)),
// b = reward_bound / min rho.
RelativeEstimate relative_bound(const ContextualPolicy& first, const ContextualPolicy& second,
                                const ContextualLog& log, double epsilon,
                                double reward_bound = 1.0);

// Greedy by IPS reward within each context; unseen contexts are uniform.
std::shared_ptr<const ContextualPolicy> train_specialized(const ContextualLog& log);
// One greedy action for every context from pooled IPS rewards.
std::shared_ptr<const ContextualPolicy> train_generalized(const ContextualLog& log);

using ContextualTrainer =
    std::function<std::shared_ptr<const ContextualPolicy>(const ContextualLog&)>;

struct ContextualDecision {
  bool general_activated = false;
  std::set<Context> override_contexts;
  friend bool operator==(const ContextualDecision&, const ContextualDecision&) = default;
};

// pi_G = pi_g if activated else pi_0; contexts in the override set use pi_z.
class ContextualGenSpec final : public ContextualPolicy {
 public:
  ContextualGenSpec(std::shared_ptr<const ContextualPolicy> logging,
                    std::shared_ptr<const ContextualPolicy> general,
                    std::shared_ptr<const ContextualPolicy> specialized,
                    ContextualDecision decision);

  const ContextualDecision& decision() const { return decision_; }
  std::size_t num_actions() const override { return logging_->num_actions(); }
  double probability(Context z, Action a) const override;

 private:
  std::shared_ptr<const ContextualPolicy> logging_;
  std::shared_ptr<const ContextualPolicy> general_;
  std::shared_ptr<const ContextualPolicy> specialized_;
  ContextualDecision decision_;
};

// Activation: LCB(pi_g', pi_0 | D^sel) > 0. Override of context z:
// LCB(pi_z', pi_G' | D^sel_z) > 0, where pi_G' follows the activation.
ContextualGenSpec initialize(std::shared_ptr<const ContextualPolicy> logging,
                             const ContextualLog& log, double epsilon, double beta,
                             const ContextualTrainer& general,
                             const ContextualTrainer& specialized, Rng& rng,
                             double reward_bound = 1.0);

}  // namespace genspec::bandit
