#include "genspec/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace genspec {

double ClickModel::click_probability(int label) const {
  return std::min(1.0, offset + alpha * label);
}

void ClickModel::validate() const {
  if (alpha < 0.0 || offset < 0.0) {
    throw std::invalid_argument("ClickModel: alpha and offset must be >= 0");
  }
  if (offset + kMaxLabel * alpha > 1.0 + 1e-12) {
    throw std::invalid_argument("ClickModel: offset + 4 * alpha exceeds 1");
  }
}

// LogSlice ------------------------------------------------------------------

LogSlice::LogSlice()
    : store_(std::make_shared<const std::vector<LoggedInteraction>>()) {}

LogSlice::LogSlice(std::vector<LoggedInteraction> records)
    : store_(std::make_shared<const std::vector<LoggedInteraction>>(std::move(records))) {
  if (store_->size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("LogSlice: too many records");
  }
  rows_.resize(store_->size());
  std::iota(rows_.begin(), rows_.end(), std::uint32_t{0});
  build_index();
}

LogSlice::LogSlice(std::shared_ptr<const std::vector<LoggedInteraction>> store,
                   std::vector<std::uint32_t> rows)
    : store_(std::move(store)), rows_(std::move(rows)) {
  build_index();
}

void LogSlice::build_index() {
  for (std::uint32_t row : rows_) by_query_[(*store_)[row].query].push_back(row);
}

std::vector<QueryId> LogSlice::queries() const {
  std::vector<QueryId> out;
  out.reserve(by_query_.size());
  for (const auto& [q, rows] : by_query_) out.push_back(q);
  return out;
}

std::size_t LogSlice::count(QueryId q) const {
  const auto it = by_query_.find(q);
  return it == by_query_.end() ? 0 : it->second.size();
}

LogSlice LogSlice::for_query(QueryId q) const {
  const auto it = by_query_.find(q);
  if (it == by_query_.end()) return LogSlice(store_, {});
  return LogSlice(store_, it->second);
}

LogSlice LogSlice::prefix(std::size_t n) const {
  n = std::min(n, rows_.size());
  return LogSlice(store_, std::vector<std::uint32_t>(rows_.begin(),
                                                     rows_.begin() + static_cast<std::ptrdiff_t>(n)));
}

LogSlice LogSlice::subset(std::span<const std::size_t> positions) const {
  std::vector<std::uint32_t> rows;
  rows.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] >= rows_.size() || (i > 0 && positions[i] <= positions[i - 1])) {
      throw std::invalid_argument("LogSlice::subset: positions must be ascending and in range");
    }
    rows.push_back(rows_[positions[i]]);
  }
  return LogSlice(store_, std::move(rows));
}

LogSlice LogSlice::filter_queries(std::span<const QueryId> keep) const {
  const std::set<QueryId> wanted(keep.begin(), keep.end());
  std::vector<std::uint32_t> rows;
  for (std::uint32_t row : rows_) {
    if (wanted.count((*store_)[row].query)) rows.push_back(row);
  }
  return LogSlice(store_, std::move(rows));
}

std::size_t LogSlice::max_candidates() const {
  std::size_t k = 0;
  for (std::uint32_t row : rows_) k = std::max(k, (*store_)[row].num_candidates());
  return k;
}

double LogSlice::min_propensity() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::uint32_t row : rows_) {
    for (double p : (*store_)[row].propensities) m = std::min(m, p);
  }
  return m;
}

// Logging policy ------------------------------------------------------------

LinearRanker train_logging_policy(const Dataset& dataset, double fraction,
                                  std::uint64_t seed,
                                  const LoggingPolicyOptions& options) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("train_logging_policy: fraction must be in (0, 1]");
  }
  const auto train = dataset.partition(Partition::train);
  if (train.empty()) throw std::invalid_argument("train_logging_policy: no training queries");

  Rng rng(seed);
  std::vector<QueryId> subsample(train.begin(), train.end());
  rng.shuffle(std::span<QueryId>(subsample));
  const auto n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size()))));
  subsample.resize(std::min(n, subsample.size()));
  std::sort(subsample.begin(), subsample.end());

  const bool informative = std::any_of(subsample.begin(), subsample.end(), [&](QueryId q) {
    const auto& labels = dataset.query(q).labels;
    return std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) !=
           labels.end();
  });
  if (!informative) {
    throw std::invalid_argument(
        "train_logging_policy: subsample has no query with two distinct labels");
  }

  const Eigen::Index dim = dataset.feature_dim();
  Eigen::VectorXd w(dim);
  for (Eigen::Index i = 0; i < dim; ++i) w[i] = rng.uniform(-0.01, 0.01);

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<QueryId>(subsample));
    for (QueryId qid : subsample) {
      const Query& q = dataset.query(qid);
      const auto k = static_cast<Eigen::Index>(q.num_candidates());
      for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
          const int li = q.labels[static_cast<std::size_t>(i)];
          const int lj = q.labels[static_cast<std::size_t>(j)];
          if (li == lj) continue;
          const Eigen::Index hi = li > lj ? i : j;
          const Eigen::Index lo = li > lj ? j : i;
          const Eigen::VectorXd diff = (q.features.row(hi) - q.features.row(lo)).transpose();
          if (diff.dot(w) < 1.0) w += options.learning_rate * diff;
        }
      }
    }
  }
  return LinearRanker(std::move(w));
}

std::vector<double> propensities(const Policy& logging, QueryId q) {
  auto out = logging.expected_rank_weights(q, RankWeights::inverse_rank());
  for (double p : out) {
    if (!(p > 0.0)) {
      throw std::domain_error("propensity: zero examination probability");
    }
  }
  return out;
}

double propensity(const Policy& logging, QueryId q, DocId d) {
  const auto all = propensities(logging, q);
  if (d >= all.size()) throw std::out_of_range("propensity: unknown document");
  return all[d];
}

// Click simulation -----------------------------------------------------------

LogSlice simulate_clicks(const Policy& logging, const Dataset& dataset,
                         std::span<const QueryId> queries, const ClickModel& model,
                         std::size_t n_interactions, std::uint64_t seed,
                         const SimulationOptions& options) {
  model.validate();
  if (queries.empty()) throw std::invalid_argument("simulate_clicks: empty partition");
  if (n_interactions == 0) return LogSlice();

  std::map<QueryId, std::vector<double>> rho;
  std::map<QueryId, std::vector<double>> click_p;
  for (QueryId q : queries) {
    if (rho.count(q)) continue;
    rho[q] = propensities(logging, q);
    auto& p = click_p[q];
    for (int label : dataset.query(q).labels) p.push_back(model.click_probability(label));
  }

  std::vector<LoggedInteraction> records(n_interactions);
  if (options.examination_trace) options.examination_trace->assign(n_interactions, {});
  const std::size_t num_blocks = (n_interactions + kSimulationBlock - 1) / kSimulationBlock;

  auto run_block = [&](std::size_t block) {
    Rng rng(derive_seed(seed, block));
    const std::size_t begin = block * kSimulationBlock;
    const std::size_t end = std::min(n_interactions, begin + kSimulationBlock);
    for (std::size_t i = begin; i < end; ++i) {
      const QueryId q = queries[rng.uniform_index(queries.size())];
      auto& rec = records[i];
      rec.query = q;
      rec.displayed = logging.sample(q, rng);
      rec.propensities = rho.at(q);
      rec.clicks.assign(rec.displayed.size(), 0);
      const auto& probs = click_p.at(q);
      std::vector<std::uint8_t>* examined = nullptr;
      if (options.examination_trace) {
        examined = &(*options.examination_trace)[i];
        examined->assign(rec.displayed.size(), 0);
      }
      for (std::size_t pos = 0; pos < rec.displayed.size(); ++pos) {
        const DocId d = rec.displayed[pos];
        if (!rng.bernoulli(model.examination(pos + 1))) continue;
        if (examined) (*examined)[d] = 1;
        if (rng.bernoulli(probs[d])) rec.clicks[d] = 1;
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, num_blocks));
  if (threads == 1) {
    for (std::size_t b = 0; b < num_blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t b = t; b < num_blocks; b += threads) run_block(b);
      });
    }
    for (auto& w : workers) w.join();
  }
  return LogSlice(std::move(records));
}

std::pair<LogSlice, LogSlice> split_log(const LogSlice& log, double beta, Rng& rng) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("split_log: beta must be in [0, 1]");
  }
  const std::size_t n = log.size();
  const auto n_sel = static_cast<std::size_t>(std::llround(beta * static_cast<double>(n)));
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  // Partial Fisher-Yates: the first n_sel entries become the selection set.
  for (std::size_t i = 0; i < n_sel; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(positions[i], positions[j]);
  }
  std::vector<std::size_t> sel(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(n_sel));
  std::vector<std::size_t> train(positions.begin() + static_cast<std::ptrdiff_t>(n_sel), positions.end());
  std::sort(sel.begin(), sel.end());
  std::sort(train.begin(), train.end());
  return {log.subset(train), log.subset(sel)};
}

// Serialization -------------------------------------------------------------

void write_log(std::ostream& out, const LogSlice& log) {
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& rec = log[i];
    out << rec.query << '\t';
    for (std::size_t p = 0; p < rec.displayed.size(); ++p) {
      if (p) out << ',';
      out << rec.displayed[p];
    }
    out << '\t';
    bool first = true;
    for (std::size_t d = 0; d < rec.clicks.size(); ++d) {
      if (!rec.clicks[d]) continue;
      if (!first) out << ',';
      out << d;
      first = false;
    }
    out << '\t';
    for (std::size_t d = 0; d < rec.propensities.size(); ++d) {
      if (d) out << ',';
      out << format_double(rec.propensities[d]);
    }
    out << '\n';
  }
}

LogSlice read_log(std::istream& in) {
  std::vector<LoggedInteraction> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 4) throw ParseError(line_no, "expected 4 tab-separated fields");
    try {
      LoggedInteraction rec;
      rec.query = static_cast<QueryId>(parse_int(fields[0]));
      std::vector<DocId> docs;
      for (const auto& t : split(fields[1], ',')) docs.push_back(static_cast<DocId>(parse_int(t)));
      rec.displayed = Ranking(std::move(docs));
      rec.clicks.assign(rec.displayed.size(), 0);
      if (!trim(fields[2]).empty()) {
        for (const auto& t : split(fields[2], ',')) {
          const auto d = static_cast<std::size_t>(parse_int(t));
          if (d >= rec.clicks.size()) throw std::invalid_argument("clicked document out of range");
          rec.clicks[d] = 1;
        }
      }
      rec.propensities = parse_double_list(fields[3]);
      if (rec.propensities.size() != rec.displayed.size()) {
        throw std::invalid_argument("propensity count differs from ranking length");
      }
      for (double p : rec.propensities) {
        if (!(p > 0.0)) throw std::invalid_argument("propensities must be positive");
      }
      records.push_back(std::move(rec));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return LogSlice(std::move(records));
}

}  // namespace genspec
