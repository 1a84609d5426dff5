#include "genspec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <tuple>

#include "genspec/baselines.hpp"
#include "genspec/genspec.hpp"
#include "genspec/linear_ranker.hpp"
#include "genspec/models.hpp"
#include "genspec/simulate.hpp"

namespace genspec {

Mode parse_mode(const std::string& text) {
  const std::string t = trim(text);
  if (t == "genspec") return Mode::genspec;
  if (t == "sea") return Mode::sea;
  if (t == "bandits") return Mode::bandits;
  if (t == "no-bounds") return Mode::no_bounds;
  throw std::invalid_argument("unknown mode '" + t + "' (genspec, sea, bandits, no-bounds)");
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::genspec:
      return "genspec";
    case Mode::sea:
      return "sea";
    case Mode::bandits:
      return "bandits";
    case Mode::no_bounds:
      return "no-bounds";
  }
  return "";
}

void ExperimentConfig::validate() const {
  if (dataset_dir.empty()) synthetic.validate();
  ClickModel{alpha, 0.2}.validate();
  if (epsilons.empty()) throw std::invalid_argument("config: at least one epsilon is required");
  for (double e : epsilons) {
    if (!(e >= 0.0 && e < 1.0)) throw std::invalid_argument("config: epsilon must be in [0, 1)");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("config: beta must be in (0, 1)");
  if (budgets.empty()) throw std::invalid_argument("config: at least one budget is required");
  if (!std::is_sorted(budgets.begin(), budgets.end())) {
    throw std::invalid_argument("config: budgets must be sorted ascending");
  }
  if (repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
  if (modes.empty()) throw std::invalid_argument("config: at least one mode is required");
  if (!(logging_fraction > 0.0 && logging_fraction <= 1.0)) {
    throw std::invalid_argument("config: logging_fraction must be in (0, 1]");
  }
  if (hotfix_depth == 0) throw std::invalid_argument("config: hotfix_depth must be >= 1");
  if (epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
  if (threads == 0) throw std::invalid_argument("config: threads must be >= 1");
}

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& config) {
  static const std::set<std::string> known = {
      "dataset", "alpha",        "epsilon", "beta",   "budgets", "repeats", "seed",
      "out",     "mode",         "logging_fraction", "hotfix_depth", "epochs", "threads"};
  for (const auto& [key, value] : config.values()) {
    if (!known.count(key) && key.rfind("synthetic.", 0) != 0) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  auto non_negative = [](std::int64_t v, const char* key) {
    if (v < 0) throw std::invalid_argument(std::string("config: ") + key + " must be >= 0");
    return v;
  };

  ExperimentConfig out;
  out.synthetic = SyntheticSpec::from_config(config, "synthetic.");
  if (auto v = config.get_string("dataset")) out.dataset_dir = *v;
  if (auto v = config.get_double("alpha")) out.alpha = *v;
  if (auto v = config.get_doubles("epsilon")) out.epsilons = *v;
  if (auto v = config.get_double("beta")) out.beta = *v;
  if (auto v = config.get_string("budgets")) {
    out.budgets.clear();
    for (const auto& token : split(*v, ',')) {
      out.budgets.push_back(static_cast<std::size_t>(non_negative(parse_int(trim(token)), "budgets")));
    }
  }
  if (auto v = config.get_int("repeats")) out.repeats = static_cast<int>(*v);
  if (auto v = config.get_int("seed")) out.seed = static_cast<std::uint64_t>(non_negative(*v, "seed"));
  if (auto v = config.get_string("out")) out.out = *v;
  if (auto v = config.get_string("mode")) {
    out.modes.clear();
    for (const auto& token : split(*v, ',')) out.modes.insert(parse_mode(token));
  }
  if (auto v = config.get_double("logging_fraction")) out.logging_fraction = *v;
  if (auto v = config.get_int("hotfix_depth")) {
    out.hotfix_depth = static_cast<std::size_t>(non_negative(*v, "hotfix_depth"));
  }
  if (auto v = config.get_int("epochs")) out.epochs = static_cast<int>(*v);
  if (auto v = config.get_int("threads")) {
    out.threads = static_cast<std::size_t>(non_negative(*v, "threads"));
  }
  return out;
}

namespace {

// Read-only state shared by every repeat.
struct Setup {
  const ExperimentConfig& config;
  Dataset dataset;
  RelevanceTable gains;
  std::shared_ptr<const ScoreSortPolicy> logging;
  std::shared_ptr<const ScoreSortPolicy> uniform;
  std::vector<QueryId> interaction_queries;  // train and validation
  std::size_t hotfix_depth = 0;
  double logging_train = 0.0;
  double logging_test = 0.0;
  double uniform_test = 0.0;
};

double train_ndcg(const Setup& s, const Policy& policy) {
  return ndcg(policy, s.dataset.partition(Partition::train), s.gains, RankWeights::dcg());
}

double test_ndcg(const Setup& s, const Policy& policy) {
  return ndcg(policy, s.dataset.partition(Partition::test), s.gains, RankWeights::dcg());
}

ResultRow make_row(std::string method, std::optional<double> epsilon, std::size_t budget,
                   int repeat, double train, double test) {
  ResultRow row;
  row.method = std::move(method);
  row.epsilon = epsilon;
  row.budget = budget;
  row.repeat = repeat;
  row.train_ndcg = train;
  row.test_ndcg = test;
  return row;
}

void add_decision_rows(const Setup& s, std::vector<ResultRow>& rows, const std::string& method,
                       std::span<const double> epsilons, bool with_epsilon,
                       std::span<const DeploymentDecision> decisions,
                       const std::shared_ptr<const Policy>& feature,
                       const std::shared_ptr<const Policy>& tabular, std::size_t budget,
                       int repeat) {
  for (std::size_t e = 0; e < decisions.size(); ++e) {
    const GenSpecPolicy policy(s.logging, feature, tabular, decisions[e]);
    auto row = make_row(method, with_epsilon ? std::optional<double>(epsilons[e]) : std::nullopt,
                        budget, repeat, train_ndcg(s, policy), test_ndcg(s, policy));
    row.activated = decisions[e].feat_model_activated;
    row.overrides = decisions[e].override_queries.size();
    rows.push_back(std::move(row));
  }
}

std::vector<ResultRow> run_repeat(const Setup& s, int repeat) {
  const ExperimentConfig& c = s.config;
  const std::uint64_t base = derive_seed(c.seed, static_cast<std::uint64_t>(repeat) + 1);
  const ClickModel model{c.alpha, 0.2};
  const auto counts = s.dataset.candidate_counts();
  const auto train_ids = s.dataset.partition(Partition::train);
  const auto validation_ids = s.dataset.partition(Partition::validation);
  std::vector<ResultRow> rows;

  const bool offline = c.modes.count(Mode::genspec) || c.modes.count(Mode::sea) ||
                       c.modes.count(Mode::no_bounds);
  LogSlice full;
  if (offline) {
    SimulationOptions sim_options;
    full = simulate_clicks(*s.logging, s.dataset, s.interaction_queries, model,
                           c.budgets.back(), derive_seed(base, 1), sim_options);
  }
  std::unique_ptr<PbmState> pbm;
  std::unique_ptr<HotfixState> hotfix;
  std::unique_ptr<OnlineSimulator> pbm_sim;
  std::unique_ptr<OnlineSimulator> hotfix_sim;
  if (c.modes.count(Mode::bandits)) {
    pbm = std::make_unique<PbmState>(counts);
    hotfix = std::make_unique<HotfixState>(*s.logging, s.hotfix_depth);
    pbm_sim = std::make_unique<OnlineSimulator>(s.dataset, s.interaction_queries, model,
                                                derive_seed(base, 3));
    hotfix_sim = std::make_unique<OnlineSimulator>(s.dataset, s.interaction_queries, model,
                                                   derive_seed(base, 4));
  }

  FeatureTrainerOptions trainer_options;
  trainer_options.epochs = c.epochs;
  trainer_options.seed = derive_seed(base, 2);

  for (std::size_t b = 0; b < c.budgets.size(); ++b) {
    const std::size_t budget = c.budgets[b];
    rows.push_back(make_row("logging", std::nullopt, budget, repeat, s.logging_train,
                            s.logging_test));

    if (offline) {
      const LogSlice prefix = full.prefix(budget);
      const LogSlice log = prefix.filter_queries(train_ids);
      const LogSlice validation = prefix.filter_queries(validation_ids);
      Trainers trainers;
      trainers.feature = [&](const LogSlice& slice) -> std::shared_ptr<const Policy> {
        try {
          return std::make_shared<ScoreSortPolicy>(
              train_feature_based(s.dataset, slice, validation, trainer_options).policy(s.dataset));
        } catch (const NoClickSignal&) {
          return nullptr;
        }
      };
      trainers.tabular = [&](const LogSlice& slice) -> std::shared_ptr<const Policy> {
        return std::make_shared<ScoreSortPolicy>(infer_tabular(slice, counts).policy());
      };

      Rng split_rng(derive_seed(base, 100 + b));
      const PrimedModels primed = prime(log, c.beta, trainers, split_rng);
      const auto feature = trainers.feature(log);
      const auto tabular = trainers.tabular(log);
      const auto queries = log.queries();

      const Policy& feature_eval = feature ? *feature : *s.uniform;
      rows.push_back(make_row("feature", std::nullopt, budget, repeat,
                              train_ndcg(s, feature_eval), test_ndcg(s, feature_eval)));
      // Test queries never occur in the log, so this is the uniform policy's value.
      rows.push_back(make_row("tabular", std::nullopt, budget, repeat, train_ndcg(s, *tabular),
                              s.uniform_test));

      if (c.modes.count(Mode::genspec)) {
        const auto d = decide(*s.logging, primed, queries, c.epsilons, DecisionRule::relative_bound);
        add_decision_rows(s, rows, "genspec", c.epsilons, true, d, feature, tabular, budget, repeat);
      }
      if (c.modes.count(Mode::no_bounds)) {
        const std::vector<double> none{0.0};
        const auto d = decide(*s.logging, primed, queries, none, DecisionRule::no_bounds);
        add_decision_rows(s, rows, "genspec-nobounds", none, false, d, feature, tabular, budget,
                          repeat);
      }
      if (c.modes.count(Mode::sea)) {
        const auto d = decide(*s.logging, primed, queries, c.epsilons, DecisionRule::sea);
        add_decision_rows(s, rows, "sea", c.epsilons, true, d, feature, tabular, budget, repeat);
      }
    }

    if (pbm) {
      pbm_sim->run_to(*pbm, budget);
      hotfix_sim->run_to(*hotfix, budget);
      rows.push_back(make_row("pbm", std::nullopt, budget, repeat,
                              train_ndcg(s, pbm->reported_policy()), s.uniform_test));
      rows.push_back(make_row("hotfix", std::nullopt, budget, repeat,
                              train_ndcg(s, hotfix->reported_policy()), s.uniform_test));
    }
  }
  return rows;
}

auto sort_key(const ResultRow& r) {
  return std::make_tuple(std::cref(r.method), r.epsilon.has_value(), r.epsilon.value_or(0.0),
                         r.budget, r.repeat);
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  Dataset dataset = config.dataset_dir.empty() ? generate_synthetic(config.synthetic)
                                               : load_letor_dataset(config.dataset_dir);
  Setup s{config, std::move(dataset), {}, nullptr, nullptr, {}, config.hotfix_depth};
  s.gains = label_gains(s.dataset);
  s.logging = std::make_shared<ScoreSortPolicy>(
      train_logging_policy(s.dataset, config.logging_fraction, derive_seed(config.seed, 0))
          .policy(s.dataset));
  s.uniform = std::make_shared<ScoreSortPolicy>(
      ScoreSortPolicy::uniform(s.dataset.candidate_counts()));
  for (auto p : {Partition::train, Partition::validation}) {
    const auto ids = s.dataset.partition(p);
    s.interaction_queries.insert(s.interaction_queries.end(), ids.begin(), ids.end());
  }
  s.logging_train = train_ndcg(s, *s.logging);
  s.logging_test = test_ndcg(s, *s.logging);
  s.uniform_test = test_ndcg(s, *s.uniform);

  std::vector<std::vector<ResultRow>> per_repeat(static_cast<std::size_t>(config.repeats));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int r = next++; r < config.repeats; r = next++) {
      try {
        per_repeat[static_cast<std::size_t>(r)] = run_repeat(s, r);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(config.threads, static_cast<std::size_t>(config.repeats));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<ResultRow> rows;
  for (auto& part : per_repeat) rows.insert(rows.end(), part.begin(), part.end());
  std::sort(rows.begin(), rows.end(),
            [](const ResultRow& a, const ResultRow& b) { return sort_key(a) < sort_key(b); });
  return rows;
}

void write_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << (r.epsilon ? format_double(*r.epsilon) : "") << ',' << r.budget
        << ',' << r.repeat << ',' << format_fixed(r.train_ndcg, 6) << ','
        << format_fixed(r.test_ndcg, 6) << ',' << (r.activated ? 1 : 0) << ',' << r.overrides
        << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) {
    throw ParseError(1, std::string("expected header '") + kCsvHeader + "'");
  }
  std::vector<ResultRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 8) throw ParseError(number, "expected 8 fields");
    try {
      ResultRow r;
      r.method = f[0];
      if (!f[1].empty()) r.epsilon = parse_double(f[1]);
      r.budget = static_cast<std::size_t>(parse_int(f[2]));
      r.repeat = static_cast<int>(parse_int(f[3]));
      r.train_ndcg = parse_double(f[4]);
      r.test_ndcg = parse_double(f[5]);
      r.activated = parse_int(f[6]) != 0;
      r.overrides = static_cast<std::size_t>(parse_int(f[7]));
      rows.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw ParseError(number, e.what());
    }
  }
  return rows;
}

std::vector<SummaryRow> summarize(std::span<const ResultRow> rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no rows");
  using Key = std::tuple<std::string, bool, double, std::size_t>;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    groups[{r.method, r.epsilon.has_value(), r.epsilon.value_or(0.0), r.budget}].push_back(&r);
  }
  auto mean_std = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = pairwise_sum(v) / n;
    if (v.size() < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / (n - 1.0))};
  };
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    s.method = std::get<0>(key);
    if (std::get<1>(key)) s.epsilon = std::get<2>(key);
    s.budget = std::get<3>(key);
    s.count = members.size();
    std::vector<double> train, test;
    for (const auto* r : members) {
      train.push_back(r->train_ndcg);
      test.push_back(r->test_ndcg);
    }
    std::tie(s.train_mean, s.train_std) = mean_std(train);
    std::tie(s.test_mean, s.test_std) = mean_std(test);
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.method << ',' << (r.epsilon ? format_double(*r.epsilon) : "") << ',' << r.budget
        << ',' << r.count << ',' << format_fixed(r.train_mean, 6) << ','
        << format_fixed(r.train_std, 6) << ',' << format_fixed(r.test_mean, 6) << ','
        << format_fixed(r.test_std, 6) << '\n';
  }
}

}  // namespace genspec
