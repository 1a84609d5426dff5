#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "genspec/config.hpp"
#include "genspec/core.hpp"

namespace genspec {

inline constexpr int kMaxLabel = 4;

struct Query {
  QueryId id = 0;
  std::string name;           // qid as it appears in the source
  Eigen::MatrixXd features;   // one row per candidate document
  std::vector<int> labels;    // graded relevance, 0..4

  std::size_t num_candidates() const { return labels.size(); }
  friend bool operator==(const Query& a, const Query& b) {
    return a.name == b.name && a.labels == b.labels &&
           a.features.rows() == b.features.rows() &&
           a.features.cols() == b.features.cols() && a.features == b.features;
  }
};

enum class Partition { train = 0, validation = 1, test = 2 };

// Queries of all three partitions share one dense id space: train queries
// first, then validation, then test. Feature vectors are zero-padded to the
// widest partition.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Query> train, std::vector<Query> validation,
          std::vector<Query> test);

  const Query& query(QueryId id) const { return queries_.at(id); }
  std::span<const Query> queries() const { return queries_; }
  std::span<const QueryId> partition(Partition p) const {
    return partitions_[static_cast<std::size_t>(p)];
  }
  std::size_t num_queries() const { return queries_.size(); }
  Eigen::Index feature_dim() const { return feature_dim_; }
  std::vector<std::size_t> candidate_counts() const;
  Partition partition_of(QueryId id) const;

 private:
  std::vector<Query> queries_;
  std::array<std::vector<QueryId>, 3> partitions_;
  Eigen::Index feature_dim_ = 0;
};

// LETOR / SVMLight ranking format, one document per line:
//   <label> qid:<id> <index>:<value> ... [# comment]
// Labels are integers 0..4, feature indices 1-based and possibly sparse
// (absent indices read as 0.0). Documents are grouped by qid in order of the
// qid's first appearance. Query ids in the result are positional (0..n-1).
std::vector<Query> parse_letor(std::istream& in);
std::vector<Query> load_letor(const std::string& path);
// Dense output, shortest round-trip representation of each value.
void write_letor(std::ostream& out, std::span<const Query> queries);

// Loads <dir>/train.txt, <dir>/vali.txt and <dir>/test.txt.
Dataset load_letor_dataset(const std::string& dir);

struct SyntheticSpec {
  std::size_t train_queries = 200;
  std::size_t validation_queries = 50;
  std::size_t test_queries = 100;
  std::size_t docs_per_query = 10;
  std::size_t features = 8;
  std::size_t signal_features = 3;
  double signal_strength = 0.7;
  std::uint64_t seed = 1;

  void validate() const;
  // Reads `<prefix>train_queries`, `<prefix>signal_strength`, ... keys.
  static SyntheticSpec from_config(const KeyValueConfig& config,
                                   const std::string& prefix = "");
};

// Labels are uniform on 0..4. For every document a shared nuisance value
// eta ~ U(-1, 1) is drawn; signal feature j is
//   s * label / 4 + (1 - s) * (eta + u_j),   u_j ~ U(-1, 1),
// and the remaining features are pure U(-1, 1) distractors. Because eta is
// shared by all signal features, no linear model can average it away, so for
// s < 1 rankings are informative but imperfect. Only Rng::uniform and
// Rng::uniform_index are used, making the output platform independent.
Dataset generate_synthetic(const SyntheticSpec& spec);

// Click probability given examination: offset + alpha * label.
RelevanceTable relevance_from_labels(const Dataset& dataset, double alpha,
                                     double offset = 0.2);

// Graded gain label / 4 used for NDCG (scale-invariant, so identical to
// using the raw label as gain).
RelevanceTable label_gains(const Dataset& dataset);

}  // namespace genspec
