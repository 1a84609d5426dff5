#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "genspec/core.hpp"
#include "genspec/data.hpp"
#include "genspec/linear_ranker.hpp"

namespace genspec {

// Position-biased user: examines rank k with probability 1/k and clicks an
// examined document with probability offset + alpha * label.
struct ClickModel {
  double alpha = 0.2;
  double offset = 0.2;

  double examination(std::size_t rank) const { return 1.0 / static_cast<double>(rank); }
  double click_probability(int label) const;
  void validate() const;
};

struct LoggedInteraction {
  QueryId query = 0;
  Ranking displayed;
  std::vector<std::uint8_t> clicks;  // per candidate, in candidate order
  std::vector<double> propensities;  // per candidate, in candidate order

  std::size_t num_candidates() const { return propensities.size(); }
  friend bool operator==(const LoggedInteraction&, const LoggedInteraction&) = default;
};

// An ordered view over a shared, immutable record store. Slicing (prefixes,
// per-query subsets, random splits) only copies row indices. Rows keep the
// order in which they were logged.
class LogSlice {
 public:
  LogSlice();
  explicit LogSlice(std::vector<LoggedInteraction> records);

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const LoggedInteraction& operator[](std::size_t i) const { return (*store_)[rows_[i]]; }

  // Unique query ids present, ascending.
  std::vector<QueryId> queries() const;
  std::size_t count(QueryId q) const;
  LogSlice for_query(QueryId q) const;
  LogSlice prefix(std::size_t n) const;
  // `positions` index into this slice and must be ascending.
  LogSlice subset(std::span<const std::size_t> positions) const;
  LogSlice filter_queries(std::span<const QueryId> keep) const;

  std::size_t max_candidates() const;
  double min_propensity() const;

 private:
  LogSlice(std::shared_ptr<const std::vector<LoggedInteraction>> store,
           std::vector<std::uint32_t> rows);
  void build_index();

  std::shared_ptr<const std::vector<LoggedInteraction>> store_;
  std::vector<std::uint32_t> rows_;
  std::map<QueryId, std::vector<std::uint32_t>> by_query_;  // store rows
};

struct LoggingPolicyOptions {
  int epochs = 20;
  double learning_rate = 0.01;
};

// Supervised pairwise-hinge linear model on a `fraction` subsample of the
// training queries. Deterministic given the seed.
LinearRanker train_logging_policy(const Dataset& dataset, double fraction,
                                  std::uint64_t seed,
                                  const LoggingPolicyOptions& options = {});

// Policy-aware examination propensity: E_{y ~ pi0}[1 / rank(d | y)].
double propensity(const Policy& logging, QueryId q, DocId d);
std::vector<double> propensities(const Policy& logging, QueryId q);

struct SimulationOptions {
  std::size_t threads = 1;
  // Records whether each document was examined (instrumented runs only).
  std::vector<std::vector<std::uint8_t>>* examination_trace = nullptr;
};

// Interactions are generated in fixed blocks of kSimulationBlock records,
// each block from its own stream derive_seed(seed, block). The output is
// therefore independent of the thread count, and a shorter run is always a
// prefix of a longer one with the same seed.
inline constexpr std::size_t kSimulationBlock = 1024;

LogSlice simulate_clicks(const Policy& logging, const Dataset& dataset,
                         std::span<const QueryId> queries, const ClickModel& model,
                         std::size_t n_interactions, std::uint64_t seed,
                         const SimulationOptions& options = {});

// Interaction-level random split. The selection part holds round(beta * n)
// records; both parts keep the original order.
std::pair<LogSlice, LogSlice> split_log(const LogSlice& log, double beta, Rng& rng);

// One record per line:
//   qid \t ranking \t clicked doc ids \t propensities (candidate order)
// lists comma separated; doubles in shortest round-trip form.
void write_log(std::ostream& out, const LogSlice& log);
LogSlice read_log(std::istream& in);

}  // namespace genspec
