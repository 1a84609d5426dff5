#include "genspec/linear_ranker.hpp"

#include <cmath>
#include <string>

namespace genspec {

LinearRanker::LinearRanker(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if (!weights_.allFinite()) {
    throw std::invalid_argument("LinearRanker: weights must be finite");
  }
}

Eigen::VectorXd LinearRanker::scores(const Query& query) const {
  if (query.features.cols() != weights_.size()) {
    throw std::invalid_argument("LinearRanker: feature dimension mismatch");
  }
  return query.features * weights_;
}

ScoreSortPolicy LinearRanker::policy(const Dataset& dataset) const {
  std::vector<std::vector<double>> all;
  all.reserve(dataset.num_queries());
  for (const auto& q : dataset.queries()) {
    const Eigen::VectorXd s = scores(q);
    all.emplace_back(s.data(), s.data() + s.size());
  }
  return ScoreSortPolicy(std::move(all));
}

void LinearRanker::write(std::ostream& out) const {
  out << "linear " << weights_.size() << '\n';
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (i) out << ' ';
    out << format_double(weights_[i]);
  }
  out << '\n';
}

LinearRanker LinearRanker::read(std::istream& in) {
  std::string tag;
  Eigen::Index dim = 0;
  if (!(in >> tag >> dim) || tag != "linear" || dim < 0) {
    throw ParseError(1, "expected 'linear <dimension>' header");
  }
  Eigen::VectorXd w(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    std::string token;
    if (!(in >> token)) throw ParseError(2, "missing weight " + std::to_string(i));
    w[i] = parse_double(token);
  }
  return LinearRanker(std::move(w));
}

}  // namespace genspec
