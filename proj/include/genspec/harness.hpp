#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "genspec/config.hpp"
#include "genspec/data.hpp"

namespace genspec {

enum class Mode { genspec, sea, bandits, no_bounds };

Mode parse_mode(const std::string& text);
std::string mode_name(Mode mode);

struct ExperimentConfig {
  std::string dataset_dir;  // LETOR directory; empty selects the synthetic generator
  SyntheticSpec synthetic;
  double alpha = 0.2;
  std::vector<double> epsilons{0.01};
  double beta = 0.5;
  std::vector<std::size_t> budgets{10, 100, 1000, 10000, 100000, 1000000};
  int repeats = 10;
  std::uint64_t seed = 1;
  std::string out;
  std::set<Mode> modes{Mode::genspec};
  double logging_fraction = 0.01;
  std::size_t hotfix_depth = 3;
  int epochs = 50;
  std::size_t threads = 1;

  void validate() const;

  // Keys: dataset, alpha, epsilon, beta, budgets, repeats, seed, out, mode,
  // logging_fraction, hotfix_depth, epochs, threads, and synthetic.* for the
  // generator. List values are comma separated. Unknown keys are rejected.
  static ExperimentConfig from_config(const KeyValueConfig& config);
};

struct ResultRow {
  std::string method;
  std::optional<double> epsilon;
  std::size_t budget = 0;
  int repeat = 0;
  double train_ndcg = 0.0;
  double test_ndcg = 0.0;
  bool activated = false;
  std::size_t overrides = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

// Rows sorted by (method, epsilon, budget, repeat); methods without an
// epsilon sort first within their name.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader =
    "method,epsilon,budget,repeat,train_ndcg,test_ndcg,activated,overrides";

void write_csv(std::ostream& out, std::span<const ResultRow> rows);
std::vector<ResultRow> read_csv(std::istream& in);

struct SummaryRow {
  std::string method;
  std::optional<double> epsilon;
  std::size_t budget = 0;
  std::size_t count = 0;
  double train_mean = 0.0;
  double train_std = 0.0;  // sample standard deviation; 0 for one repeat
  double test_mean = 0.0;
  double test_std = 0.0;
};

std::vector<SummaryRow> summarize(std::span<const ResultRow> rows);

inline constexpr const char* kSummaryHeader =
    "method,epsilon,budget,count,train_mean,train_std,test_mean,test_std";

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

}  // namespace genspec
