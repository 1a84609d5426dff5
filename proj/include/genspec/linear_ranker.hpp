#pragma once

#include <Eigen/Dense>
#include <istream>
#include <ostream>

#include "genspec/core.hpp"
#include "genspec/data.hpp"

namespace genspec {

// score(q, d) = weights . features(q, d); ranks by sorting scores.
class LinearRanker {
 public:
  LinearRanker() = default;
  explicit LinearRanker(Eigen::VectorXd weights);

  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd scores(const Query& query) const;
  // Score-sort policy over every query of the dataset.
  ScoreSortPolicy policy(const Dataset& dataset) const;

  // Text form: `linear <F>` then the F weights on one line.
  void write(std::ostream& out) const;
  static LinearRanker read(std::istream& in);

 private:
  Eigen::VectorXd weights_;
};

}  // namespace genspec
