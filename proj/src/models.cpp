#include "genspec/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace genspec {

// Tabular --------------------------------------------------------------------

TabularRanker::TabularRanker(std::vector<std::size_t> candidate_counts,
                             std::map<QueryId, std::vector<double>> estimates)
    : counts_(std::move(candidate_counts)), estimates_(std::move(estimates)) {
  for (const auto& [q, values] : estimates_) {
    if (q >= counts_.size() || values.size() != counts_[q]) {
      throw std::invalid_argument("TabularRanker: estimate shape mismatch for query " +
                                  std::to_string(q));
    }
    for (double v : values) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("TabularRanker: estimates must be finite and >= 0");
      }
    }
  }
}

double TabularRanker::estimate(QueryId q, DocId d) const {
  if (q >= counts_.size() || d >= counts_[q]) {
    throw std::out_of_range("TabularRanker: unknown (query, document)");
  }
  const auto it = estimates_.find(q);
  return it == estimates_.end() ? 0.0 : it->second[d];
}

ScoreSortPolicy TabularRanker::policy() const {
  std::vector<std::vector<double>> scores;
  scores.reserve(counts_.size());
  for (QueryId q = 0; q < counts_.size(); ++q) {
    const auto it = estimates_.find(q);
    scores.push_back(it == estimates_.end() ? std::vector<double>(counts_[q], 0.0)
                                            : it->second);
  }
  return ScoreSortPolicy(std::move(scores));
}

void TabularRanker::write(std::ostream& out) const {
  out << "tabular " << counts_.size() << '\n';
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (i) out << ' ';
    out << counts_[i];
  }
  out << '\n';
  for (const auto& [q, values] : estimates_) {
    for (std::size_t d = 0; d < values.size(); ++d) {
      out << q << ' ' << d << ' ' << format_double(values[d]) << '\n';
    }
  }
}

TabularRanker TabularRanker::read(std::istream& in) {
  std::string tag;
  std::size_t num_queries = 0;
  if (!(in >> tag >> num_queries) || tag != "tabular") {
    throw ParseError(1, "expected 'tabular <queries>' header");
  }
  std::vector<std::size_t> counts(num_queries);
  for (auto& c : counts) {
    if (!(in >> c)) throw ParseError(2, "missing candidate count");
  }
  std::map<QueryId, std::vector<double>> estimates;
  std::size_t line = 2;
  std::string q_text, d_text, v_text;
  while (in >> q_text >> d_text >> v_text) {
    ++line;
    try {
      const auto q = static_cast<QueryId>(parse_int(q_text));
      const auto d = static_cast<std::size_t>(parse_int(d_text));
      if (q >= counts.size() || d >= counts[q]) throw std::invalid_argument("out of range");
      auto& row = estimates[q];
      if (row.empty()) row.assign(counts[q], 0.0);
      row[d] = parse_double(v_text);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line, std::string("bad tabular entry: ") + e.what());
    }
  }
  return TabularRanker(std::move(counts), std::move(estimates));
}

TabularRanker infer_tabular(const LogSlice& log, std::span<const std::size_t> candidate_counts) {
  const ClickTable table = aggregate_clicks(log);
  std::map<QueryId, std::vector<double>> estimates;
  for (const auto& [q, clicks] : table.queries) {
    auto& row = estimates[q];
    row.resize(clicks.mass.size());
    const double n = static_cast<double>(clicks.interactions);
    for (std::size_t d = 0; d < row.size(); ++d) row[d] = clicks.mass[d] / n;
  }
  return TabularRanker(std::vector<std::size_t>(candidate_counts.begin(), candidate_counts.end()),
                       std::move(estimates));
}

// Surrogate ------------------------------------------------------------------

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double PairwiseLambdaSurrogate::query_loss(const Eigen::VectorXd& theta,
                                           const SurrogateTerm& term,
                                           Eigen::VectorXd* grad) const {
  const Query& q = dataset_.query(term.query);
  const Eigen::VectorXd s = q.features * theta;
  const std::size_t k = q.num_candidates();
  if (term.relevance.size() != k) {
    throw std::invalid_argument("surrogate: relevance size differs from candidate count");
  }

  std::vector<DocId> order(k);
  std::iota(order.begin(), order.end(), DocId{0});
  std::stable_sort(order.begin(), order.end(), [&s](DocId a, DocId b) { return s[a] > s[b]; });
  std::vector<double> lam(k);
  for (std::size_t pos = 0; pos < k; ++pos) lam[order[pos]] = lambda_(pos + 1);

  Eigen::VectorXd grad_scores;
  if (grad) grad_scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  double loss = 0.0;
  for (std::size_t d = 0; d < k; ++d) {
    const double rel = term.relevance[d];
    if (rel == 0.0) continue;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == d) continue;
      const double a = rel * std::abs(lam[d] - lam[o]);
      const auto di = static_cast<Eigen::Index>(d);
      const auto oi = static_cast<Eigen::Index>(o);
      const double z = s[oi] - s[di];
      loss += a * softplus(z);
      if (grad) {
        const double g = a * sigmoid(z);
        grad_scores[oi] += g;
        grad_scores[di] -= g;
      }
    }
  }
  if (grad) *grad += term.weight * (q.features.transpose() * grad_scores);
  return term.weight * loss;
}

double PairwiseLambdaSurrogate::loss(const Eigen::VectorXd& theta,
                                     std::span<const SurrogateTerm> batch) const {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& term : batch) total += query_loss(theta, term, nullptr);
  return total / static_cast<double>(batch.size());
}

Eigen::VectorXd PairwiseLambdaSurrogate::gradient(const Eigen::VectorXd& theta,
                                                  std::span<const SurrogateTerm> batch) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
  if (batch.empty()) return grad;
  for (const auto& term : batch) query_loss(theta, term, &grad);
  return grad / static_cast<double>(batch.size());
}

std::vector<SurrogateTerm> surrogate_terms(const ClickTable& table) {
  std::vector<SurrogateTerm> terms;
  for (const auto& [q, clicks] : table.queries) {
    const bool any = std::any_of(clicks.mass.begin(), clicks.mass.end(),
                                 [](double m) { return m > 0.0; });
    if (!any) continue;
    SurrogateTerm term;
    term.query = q;
    term.relevance.resize(clicks.mass.size());
    const double n = static_cast<double>(clicks.interactions);
    for (std::size_t d = 0; d < clicks.mass.size(); ++d) term.relevance[d] = clicks.mass[d] / n;
    term.weight = static_cast<double>(clicks.interactions);
    terms.push_back(std::move(term));
  }
  const double scale = static_cast<double>(terms.size()) /
                       static_cast<double>(std::max<std::size_t>(1, table.total_interactions));
  for (auto& t : terms) t.weight *= scale;
  return terms;
}

// Trainer ----------------------------------------------------------------------

LinearRanker train_feature_based(const Dataset& dataset, const LogSlice& train,
                                 const LogSlice& validation,
                                 const FeatureTrainerOptions& options) {
  const ClickTable train_table = aggregate_clicks(train);
  std::vector<SurrogateTerm> terms = surrogate_terms(train_table);
  if (terms.empty()) throw NoClickSignal("train_feature_based: training log has no clicks");
  if (options.batch_size == 0 || options.epochs < 0) {
    throw std::invalid_argument("train_feature_based: bad hyperparameters");
  }

  ClickTable selection_table = aggregate_clicks(validation);
  if (surrogate_terms(selection_table).empty()) selection_table = train_table;
  const RankWeights dcg = RankWeights::dcg();
  auto selection_reward = [&](const Eigen::VectorXd& theta) {
    return ips_reward(LinearRanker(theta).policy(dataset), selection_table, dcg);
  };

  Rng init_rng(options.seed);
  Eigen::VectorXd initial(dataset.feature_dim());
  for (Eigen::Index i = 0; i < initial.size(); ++i) initial[i] = init_rng.uniform(-0.01, 0.01);

  Eigen::VectorXd best = initial;
  double best_reward = selection_reward(initial);
  const PairwiseLambdaSurrogate surrogate(dataset, dcg);

  for (std::size_t r = 0; r < options.learning_rates.size(); ++r) {
    const double lr = options.learning_rates[r];
    Rng rng(derive_seed(options.seed, r));
    Eigen::VectorXd theta = initial;
    std::vector<std::size_t> order(terms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<SurrogateTerm> batch;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
      rng.shuffle(std::span<std::size_t>(order));
      for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
        const std::size_t end = std::min(order.size(), start + options.batch_size);
        batch.clear();
        for (std::size_t i = start; i < end; ++i) batch.push_back(terms[order[i]]);
        theta -= lr * surrogate.gradient(theta, batch);
      }
      const double reward = selection_reward(theta);
      if (reward > best_reward) {
        best_reward = reward;
        best = theta;
      }
    }
  }
  return LinearRanker(std::move(best));
}

}  // namespace genspec
