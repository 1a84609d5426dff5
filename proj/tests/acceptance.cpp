// Acceptance checks. Prints one PASS/FAIL line per criterion; exits non-zero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "genspec/estimate.hpp"
#include "genspec/harness.hpp"
#include "genspec/models.hpp"
#include "genspec/simulate.hpp"
#include "oracles.hpp"

using namespace genspec;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

ScoreSortPolicy deterministic(const std::vector<unsigned>& order) {
  std::vector<double> s(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    s[order[pos]] = static_cast<double>(order.size() - pos);
  }
  return ScoreSortPolicy({s});
}

Query make_query(std::vector<int> labels) {
  Query q;
  q.labels = std::move(labels);
  q.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q.labels.size()), 1);
  return q;
}

std::string fmt(double v, int digits = 4) { return format_fixed(v, digits); }

// P(X <= k) for X ~ Binomial(n, p).
double binomial_cdf(int k, int n, double p) {
  double total = 0.0;
  for (int i = 0; i <= k; ++i) {
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                      i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return total;
}

// 1. Expected IPS estimates order policies like their true rewards, by exact
// enumeration of displayed rankings and click vectors on one K=3 query.
Outcome unbiased_ordering() {
  const Dataset ds({make_query({0, 2, 4})}, {make_query({1})}, {make_query({1})});
  const ScoreSortPolicy logging({{0.5, 0.5, 0.2}});
  const RelevanceTable r = relevance_from_labels(ds, 0.2);
  const auto rho = propensities(logging, 0);
  const auto lambda = RankWeights::dcg();

  const auto orders = oracle::permutations(3);
  std::vector<ScoreSortPolicy> policies;
  for (const auto& o : orders) policies.push_back(deterministic(o));

  std::vector<double> expected(policies.size(), 0.0);
  std::vector<double> truth(policies.size(), 0.0);
  for (std::size_t p = 0; p < policies.size(); ++p) {
    for (std::size_t pos = 0; pos < 3; ++pos) {
      truth[p] += oracle::dcg(pos + 1) * r(0, orders[p][pos]);
    }
  }
  for (const auto& shown : orders) {
    const Ranking y(std::vector<DocId>(shown.begin(), shown.end()));
    const double p_shown = logging.probability(y, 0);
    if (p_shown == 0.0) continue;
    const auto ranks = y.ranks();
    for (unsigned mask = 0; mask < 8; ++mask) {
      std::vector<std::uint8_t> clicks(3);
      double p_clicks = 1.0;
      for (DocId d = 0; d < 3; ++d) {
        clicks[d] = (mask >> d) & 1u;
        const double pc = r(0, d) / static_cast<double>(ranks[d]);
        p_clicks *= clicks[d] ? pc : 1.0 - pc;
      }
      const LogSlice one({{0, y, clicks, rho}});
      for (std::size_t p = 0; p < policies.size(); ++p) {
        expected[p] += p_shown * p_clicks * ips_reward(policies[p], one, lambda);
      }
    }
  }

  int pairs = 0, agree = 0;
  double worst_gap = 0.0;
  for (std::size_t a = 0; a < policies.size(); ++a) {
    worst_gap = std::max(worst_gap, std::abs(expected[a] - truth[a]));
    for (std::size_t b = a + 1; b < policies.size(); ++b) {
      ++pairs;
      const double de = expected[a] - expected[b];
      const double dt = truth[a] - truth[b];
      agree += (de > 0) == (dt > 0) && (de < 0) == (dt < 0);
    }
  }
  return {agree == pairs && worst_gap < 1e-12,
          std::to_string(agree) + "/" + std::to_string(pairs) +
              " pairs agree in sign, max |E[R_hat] - R| = " + format_double(worst_gap)};
}

Dataset small_dataset(std::size_t queries, std::size_t docs, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.train_queries = queries;
  spec.validation_queries = 1;
  spec.test_queries = 1;
  spec.docs_per_query = docs;
  spec.features = 4;
  spec.signal_features = 2;
  spec.seed = seed;
  return generate_synthetic(spec);
}

std::vector<QueryId> train_ids(const Dataset& ds) {
  const auto p = ds.partition(Partition::train);
  return {p.begin(), p.end()};
}

// Sorts by label, breaking ties by document index.
ScoreSortPolicy label_policy(const Dataset& ds) {
  std::vector<std::vector<double>> s;
  for (const auto& q : ds.queries()) {
    std::vector<double> row(q.num_candidates());
    for (std::size_t d = 0; d < row.size(); ++d) {
      row[d] = q.labels[d] - 1e-3 * static_cast<double>(d);
    }
    s.push_back(row);
  }
  return ScoreSortPolicy(std::move(s));
}

// 2. Coverage of the true difference by [LCB, UCB].
Outcome coverage() {
  const Dataset ds = small_dataset(5, 4, 3);
  const auto qs = train_ids(ds);
  const auto logging = train_logging_policy(ds, 0.4, 1).policy(ds);
  const auto first = label_policy(ds);
  const auto second = ScoreSortPolicy::uniform(ds.candidate_counts());
  const ClickModel model{0.2, 0.2};
  const RelevanceTable r = relevance_from_labels(ds, model.alpha, model.offset);
  const auto weights = uniform_weights(qs);
  const auto lambda = RankWeights::dcg();
  const double delta = true_reward(first, weights, r, lambda) - true_reward(second, weights, r, lambda);

  const std::vector<double> levels{0.5, 0.9, 0.95};
  std::vector<int> covered(levels.size(), 0);
  const int logs = 1000;
  for (int i = 0; i < logs; ++i) {
    const auto log = simulate_clicks(logging, ds, qs, model, 50, derive_seed(2024, i));
    const auto base = make_bound_config(log, 0.0, lambda);
    const auto stats = relative_stats(first, second, log, base.K, lambda);
    for (std::size_t e = 0; e < levels.size(); ++e) {
      BoundConfig cfg = base;
      cfg.epsilon = levels[e];
      const auto est = bound_from_stats(stats, cfg);
      covered[e] += est.lcb <= delta && delta <= est.ucb;
    }
  }
  bool pass = true;
  std::string detail = "delta=" + fmt(delta);
  for (std::size_t e = 0; e < levels.size(); ++e) {
    const double p_value = binomial_cdf(covered[e], logs, levels[e]);
    pass = pass && p_value >= 0.01;
    detail += ", eps=" + format_double(levels[e]) + ": " + std::to_string(covered[e]) + "/" +
              std::to_string(logs) + " (p=" + fmt(p_value) + ")";
  }
  return {pass, detail};
}

// 3. The tabular model attains the maximum estimated reward over all
// deterministic rankings of every logged query.
Outcome tabular_optimality() {
  Rng rng(99);
  const auto lambda = RankWeights::dcg();
  int matched = 0;
  double worst = 0.0;
  const int instances = 20;
  for (int inst = 0; inst < instances; ++inst) {
    const std::size_t nq = 1 + rng.uniform_index(3);
    std::vector<Query> train;
    std::vector<std::vector<double>> scores;
    for (std::size_t q = 0; q < nq; ++q) {
      const std::size_t k = 2 + rng.uniform_index(4);
      std::vector<int> labels(k);
      std::vector<double> s(k);
      for (std::size_t d = 0; d < k; ++d) {
        labels[d] = static_cast<int>(rng.uniform_index(5));
        s[d] = static_cast<double>(rng.uniform_index(3));
      }
      train.push_back(make_query(labels));
      scores.push_back(s);
    }
    const Dataset ds(train, {make_query({0})}, {make_query({0})});
    scores.push_back({0.0});
    scores.push_back({0.0});
    const ScoreSortPolicy logging(scores);
    const auto log = simulate_clicks(logging, ds, train_ids(ds), ClickModel{}, 5 + rng.uniform_index(200),
                                     rng.next_u64());
    const auto tab = infer_tabular(log, ds.candidate_counts()).policy();
    const double got = ips_reward(tab, log, lambda);

    double best = 0.0;
    for (QueryId q : log.queries()) {
      const auto part = log.for_query(q);
      const unsigned k = static_cast<unsigned>(ds.query(q).num_candidates());
      double best_q = -1.0;
      for (const auto& y : oracle::permutations(k)) {
        double v = 0.0;
        for (std::size_t i = 0; i < part.size(); ++i) {
          for (std::size_t pos = 0; pos < k; ++pos) {
            const DocId d = y[pos];
            if (part[i].clicks[d]) v += oracle::dcg(pos + 1) / part[i].propensities[d];
          }
        }
        best_q = std::max(best_q, v);
      }
      best += best_q;
    }
    best /= static_cast<double>(log.size());
    const double rel = std::abs(got - best) / std::max(1.0, std::abs(best));
    worst = std::max(worst, rel);
    matched += rel <= 1e-12;
  }
  return {matched == instances, std::to_string(matched) + "/" + std::to_string(instances) +
                                    " instances at the brute-force maximum, max rel diff " +
                                    format_double(worst)};
}

// 4. The relative bound detects a dominating policy no later than the pair
// of single-policy bounds.
Outcome relative_vs_sea() {
  const auto lambda = RankWeights::dcg();
  const ClickModel model{0.2, 0.2};
  std::vector<std::size_t> grid;
  for (double n = 20; n <= 40000; n *= 1.25) grid.push_back(static_cast<std::size_t>(std::llround(n)));
  const std::size_t never = grid.back() + 1;

  const int runs = 200;
  int ok = 0, fired = 0;
  for (int run = 0; run < runs; ++run) {
    const Dataset ds = small_dataset(8, 5, 1000 + static_cast<std::uint64_t>(run));
    const auto qs = train_ids(ds);
    const auto logging = train_logging_policy(ds, 0.5, static_cast<std::uint64_t>(run)).policy(ds);
    const auto first = label_policy(ds);
    const auto& second = logging;
    const RelevanceTable r = relevance_from_labels(ds, model.alpha, model.offset);
    const auto w = uniform_weights(qs);
    if (!(true_reward(first, w, r, lambda) > true_reward(second, w, r, lambda))) continue;

    const auto log = simulate_clicks(logging, ds, qs, model, grid.back(), derive_seed(77, run));
    std::size_t first_rel = never, first_sea = never;
    for (std::size_t n : grid) {
      const LogSlice prefix = log.prefix(n);
      const auto cfg = make_bound_config(prefix, 0.95, lambda);
      if (first_rel == never && relative_bound(first, second, prefix, cfg, lambda).lcb > 0.0) {
        first_rel = n;
      }
      if (first_sea == never && sea_decision(first, second, prefix, cfg, lambda)) first_sea = n;
      if (first_rel != never && first_sea != never) break;
    }
    ok += first_rel <= first_sea;
    fired += first_rel != never;
  }
  const double frac = static_cast<double>(ok) / runs;
  return {frac >= 0.95, std::to_string(ok) + "/" + std::to_string(runs) +
                            " runs with relative first-fire <= SEA first-fire (" +
                            std::to_string(fired) + " relative bounds fired)"};
}

// 5. Desk-scale learning curves on synthetic data.
Outcome learning_curves() {
  ExperimentConfig config;
  config.alpha = 0.2;
  config.synthetic.signal_strength = 0.7;
  config.epsilons = {0.01};
  config.repeats = 10;
  config.budgets = {10, 100, 1000, 10000, 100000, 1000000};
  config.modes = {Mode::genspec};
  const auto rows = run_experiment(config);

  struct Stat {
    double mean = 0.0, sd = 0.0, n = 0.0;
  };
  std::map<std::pair<std::string, std::size_t>, Stat> train;
  for (const auto& s : summarize(rows)) {
    train[{s.method, s.budget}] = {s.train_mean, s.train_std, static_cast<double>(s.count)};
  }
  auto at = [&](const std::string& m, std::size_t b) { return train.at({m, b}); };
  const std::size_t top = config.budgets.back();

  std::string detail;
  const bool a = at("tabular", 10).mean < at("logging", 10).mean &&
                 std::abs(at("tabular", top).mean - 1.0) <= 0.01;
  detail += "(a) tabular " + fmt(at("tabular", 10).mean) + " -> " + fmt(at("tabular", top).mean) +
            " vs logging " + fmt(at("logging", 10).mean);

  bool plateau = true;
  for (std::size_t b : config.budgets) plateau = plateau && at("feature", b).mean < 0.99;
  const bool bb = at("feature", 1000).mean > at("logging", 1000).mean && plateau;
  detail += "; (b) feature@1e3 " + fmt(at("feature", 1000).mean) + ", feature@top " +
            fmt(at("feature", top).mean);

  bool safe = true;
  for (std::size_t b : config.budgets) {
    const Stat g = at("genspec", b), l = at("logging", b);
    const double se = std::sqrt(g.sd * g.sd / g.n + l.sd * l.sd / l.n);
    safe = safe && g.mean >= l.mean - se;
  }
  const bool c = safe && at("genspec", top).mean >= at("feature", top).mean;
  detail += "; (c) genspec@top " + fmt(at("genspec", top).mean) +
            (safe ? ", never below logging" : ", BELOW logging somewhere");

  std::map<std::pair<std::size_t, int>, std::pair<double, double>> reference;
  for (const auto& r : rows) {
    auto& ref = reference[{r.budget, r.repeat}];
    if (r.method == "feature") ref.first = r.test_ndcg;
    if (r.method == "logging") ref.second = r.test_ndcg;
  }
  int mismatched = 0;
  for (const auto& r : rows) {
    if (r.method != "genspec") continue;
    const auto& ref = reference.at({r.budget, r.repeat});
    mismatched += !(r.test_ndcg == ref.first || r.test_ndcg == ref.second);
  }
  const bool d = mismatched == 0;
  detail += "; (d) " + std::to_string(mismatched) + " test mismatches";
  return {a && bb && c && d, detail};
}

// 6. Analytic policy-aware propensities against Monte-Carlo estimates of
// E[1/rank] from logged displays.
Outcome propensity_monte_carlo() {
  const std::vector<std::vector<double>> cases{
      {1, 1, 1, 1, 1}, {2, 1, 1, 0, 0}, {0.5, 0.5, 0.7}, {3, 3, 2, 2, 2}};
  const std::size_t n = 100000;
  int checks = 0, within = 0;
  double worst = 0.0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    std::vector<int> labels(cases[c].size(), 0);
    const Dataset ds({make_query(labels)}, {make_query({0})}, {make_query({0})});
    const ScoreSortPolicy pi({cases[c], {0.0}, {0.0}});
    const std::vector<QueryId> qs{0};
    const auto log = simulate_clicks(pi, ds, qs, ClickModel{}, n, derive_seed(5, c));
    const auto analytic = log[0].propensities;
    const std::size_t k = cases[c].size();
    std::vector<double> sum(k, 0.0), sum_sq(k, 0.0);
    for (std::size_t i = 0; i < log.size(); ++i) {
      const auto ranks = log[i].displayed.ranks();
      for (std::size_t d = 0; d < k; ++d) {
        const double v = 1.0 / static_cast<double>(ranks[d]);
        sum[d] += v;
        sum_sq[d] += v * v;
      }
    }
    for (std::size_t d = 0; d < k; ++d) {
      const double mean = sum[d] / n;
      const double var = std::max(0.0, sum_sq[d] / n - mean * mean);
      const double sigma = std::sqrt(var / n);
      const double z = std::abs(mean - analytic[d]);
      ++checks;
      within += z <= std::max(3.0 * sigma, 1e-12);
      if (sigma > 0) worst = std::max(worst, z / sigma);
    }
  }
  return {within == checks, std::to_string(within) + "/" + std::to_string(checks) +
                                " propensities within 3 sigma, worst " + fmt(worst, 2) + " sigma"};
}

// 7. Analytic surrogate gradient against central finite differences.
Outcome gradient_check() {
  SyntheticSpec spec;
  spec.train_queries = 64;
  spec.validation_queries = 1;
  spec.test_queries = 1;
  const Dataset ds = generate_synthetic(spec);
  const auto logging = ScoreSortPolicy::uniform(ds.candidate_counts());
  const auto log = simulate_clicks(logging, ds, train_ids(ds), ClickModel{}, 5000, 3);
  const auto terms = surrogate_terms(aggregate_clicks(log));
  const PairwiseLambdaSurrogate surrogate(ds);
  Rng rng(4);
  double worst = 0.0;
  for (int b = 0; b < 10; ++b) {
    std::vector<SurrogateTerm> batch;
    for (int i = 0; i < 32; ++i) batch.push_back(terms[rng.uniform_index(terms.size())]);
    Eigen::VectorXd theta(ds.feature_dim());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd g = surrogate.gradient(theta, batch);
    Eigen::VectorXd fd(theta.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      fd[i] = (surrogate.loss(up, batch) - surrogate.loss(down, batch)) / (2.0 * h);
    }
    const double rel = (g - fd).norm() / std::max({g.norm(), fd.norm(), 1e-300});
    worst = std::max(worst, rel);
  }
  return {worst <= 1e-4, "max relative error " + format_double(worst) + " over 10 minibatches"};
}

// 8. Replaying a configuration reproduces the CSV byte for byte.
Outcome determinism() {
  std::istringstream text(
      "seed = 12345\nrepeats = 3\nbudgets = 10, 100, 1000, 10000\n"
      "epsilon = 0, 0.01, 0.25, 0.75\nmode = genspec, sea, bandits, no-bounds\n"
      "synthetic.train_queries = 40\nsynthetic.validation_queries = 10\n"
      "synthetic.test_queries = 20\nepochs = 10\n");
  const auto config = ExperimentConfig::from_config(KeyValueConfig::parse(text));
  auto render = [](const ExperimentConfig& c) {
    std::ostringstream out;
    write_csv(out, run_experiment(c));
    return out.str();
  };
  const std::string a = render(config);
  const std::string b = render(config);
  auto threaded = config;
  threaded.threads = 3;
  const std::string c = render(threaded);
  return {a == b && a == c, std::to_string(a.size()) + " bytes, replay " +
                                (a == b ? "identical" : "DIFFERS") + ", threaded " +
                                (a == c ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "estimator ordering unbiasedness", 1.0, unbiased_ordering},
      {2, "bound coverage", 60.0, coverage},
      {3, "tabular optimality", 10.0, tabular_optimality},
      {4, "relative vs SEA efficiency", 300.0, relative_vs_sea},
      {5, "synthetic learning curves", 1800.0, learning_curves},
      {6, "propensity correctness", 30.0, propensity_monte_carlo},
      {7, "gradient check", 10.0, gradient_check},
      {8, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds <= 0.0 || seconds < c.limit_seconds;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s criterion %d (%s): %s [%.2fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), seconds, in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
