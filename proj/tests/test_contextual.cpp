#include <doctest.h>

#include <cmath>

#include "genspec/contextual.hpp"
#include "oracles.hpp"

using namespace genspec;
using namespace genspec::bandit;

namespace {

// Uniform logging over `actions`; action `best[z]` pays 1, others pay 0.
ContextualLog simulate(const std::vector<Action>& best, std::size_t actions, std::size_t n,
                       std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Record> records;
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = static_cast<Context>(rng.uniform_index(best.size()));
    const auto a = static_cast<Action>(rng.uniform_index(actions));
    records.push_back({a == best[z] ? 1.0 : 0.0, a, 1.0 / static_cast<double>(actions), z});
  }
  return ContextualLog(std::move(records), actions);
}

}  // namespace

TEST_CASE("contextual log validation") {
  CHECK_THROWS(ContextualLog({{1.0, 2, 0.5, 0}}, 2));
  CHECK_THROWS(ContextualLog({{1.0, 0, 0.0, 0}}, 2));
  const ContextualLog log({{1.0, 0, 0.5, 3}, {0.0, 1, 0.5, 4}, {1.0, 1, 0.5, 3}}, 2);
  CHECK(log.contexts() == std::set<Context>{3, 4});
  CHECK(log.for_context(3).size() == 2);
}

TEST_CASE("contextual ips reward") {
  const ContextualLog log({{1.0, 0, 0.5, 0}, {0.5, 1, 0.25, 0}}, 2);
  const auto pick0 = TablePolicy::deterministic({{0, 0}}, 2);
  CHECK(ips_reward(pick0, log) == doctest::Approx(1.0));
  const auto uniform = TablePolicy::uniform(2);
  CHECK(ips_reward(uniform, log) == doctest::Approx((1.0 + 1.0) / 2.0));
}

TEST_CASE("contextual bound matches the explicit formula") {
  const auto log = simulate({0, 1}, 3, 40, 2);
  const auto p1 = TablePolicy::deterministic({{0, 0}, {1, 1}}, 3);
  const auto p2 = TablePolicy::uniform(3);
  std::vector<double> x;
  for (const auto& r : log.records()) {
    x.push_back(r.reward / r.propensity *
                (p1.probability(r.context, r.action) - p2.probability(r.context, r.action)));
  }
  const auto want = oracle::bound(x, 1.0, 3.0, 0.9);
  const auto got = relative_bound(p1, p2, log, 0.9);
  CHECK(got.delta_hat == doctest::Approx(want.mean).epsilon(1e-12));
  CHECK(got.cb == doctest::Approx(want.cb).epsilon(1e-12));
}

TEST_CASE("identical policies never override") {
  const auto log = simulate({0}, 2, 500, 3);
  Rng rng(1);
  const auto logging = std::make_shared<TablePolicy>(TablePolicy::uniform(2));
  const ContextualTrainer same = [&](const ContextualLog&) { return logging; };
  const auto meta = initialize(logging, log, 0.5, 0.5, same, same, rng);
  CHECK_FALSE(meta.decision().general_activated);
  CHECK(meta.decision().override_contexts.empty());
}

TEST_CASE("contexts with conflicting optima are specialized") {
  // Context 0 prefers action 0, contexts 1 and 2 prefer action 1.
  const auto log = simulate({0, 1, 1}, 2, 20000, 4);
  Rng rng(5);
  const auto logging = std::make_shared<TablePolicy>(TablePolicy::uniform(2));
  const auto meta = initialize(logging, log, 0.9, 0.5, train_generalized, train_specialized, rng);
  CHECK(meta.decision().general_activated);
  CHECK(meta.decision().override_contexts.count(0) == 1);
  CHECK(meta.probability(0, 0) == 1.0);
  CHECK(meta.probability(1, 1) == 1.0);
  // Unseen context: served by the general policy.
  CHECK(meta.probability(99, 1) == 1.0);
}

TEST_CASE("empty log serves the logging policy") {
  Rng rng(1);
  const auto logging = std::make_shared<TablePolicy>(TablePolicy::uniform(3));
  const auto meta =
      initialize(logging, ContextualLog({}, 3), 0.5, 0.5, train_generalized, train_specialized, rng);
  CHECK(meta.probability(0, 2) == doctest::Approx(1.0 / 3.0));
}
