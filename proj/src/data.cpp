#include "genspec/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace genspec {

Dataset::Dataset(std::vector<Query> train, std::vector<Query> validation,
                 std::vector<Query> test) {
  std::array<std::vector<Query>*, 3> parts = {&train, &validation, &test};
  for (auto* part : parts) {
    for (const auto& q : *part) {
      feature_dim_ = std::max(feature_dim_, q.features.cols());
    }
  }
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (auto& q : *parts[p]) {
      if (q.num_candidates() == 0) {
        throw std::invalid_argument("Dataset: query '" + q.name +
                                    "' has no candidates");
      }
      if (static_cast<std::size_t>(q.features.rows()) != q.num_candidates()) {
        throw std::invalid_argument("Dataset: feature rows != label count");
      }
      for (int label : q.labels) {
        if (label < 0 || label > kMaxLabel) {
          throw std::invalid_argument("Dataset: label outside 0..4");
        }
      }
      if (q.features.cols() < feature_dim_) {
        Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(q.features.rows(), feature_dim_);
        padded.leftCols(q.features.cols()) = q.features;
        q.features = std::move(padded);
      }
      q.id = static_cast<QueryId>(queries_.size());
      partitions_[p].push_back(q.id);
      queries_.push_back(std::move(q));
    }
  }
}

std::vector<std::size_t> Dataset::candidate_counts() const {
  std::vector<std::size_t> counts;
  counts.reserve(queries_.size());
  for (const auto& q : queries_) counts.push_back(q.num_candidates());
  return counts;
}

Partition Dataset::partition_of(QueryId id) const {
  for (std::size_t p = 0; p < partitions_.size(); ++p) {
    const auto& ids = partitions_[p];
    if (!ids.empty() && id >= ids.front() && id <= ids.back()) {
      return static_cast<Partition>(p);
    }
  }
  throw std::out_of_range("Dataset: unknown query " + std::to_string(id));
}

// LETOR ---------------------------------------------------------------------

std::vector<Query> parse_letor(std::istream& in) {
  struct PendingQuery {
    std::string name;
    std::vector<int> labels;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  };
  std::vector<PendingQuery> pending;
  std::map<std::string, std::size_t> index_of;
  std::size_t dim = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;

    int label = 0;
    try {
      const auto value = parse_int(token);
      label = static_cast<int>(value);
    } catch (const std::invalid_argument&) {
      throw ParseError(line_no, "expected integer label, got '" + token + "'");
    }
    if (label < 0 || label > kMaxLabel) {
      throw ParseError(line_no, "label " + token + " outside 0..4");
    }

    if (!(tokens >> token) || token.rfind("qid:", 0) != 0 || token.size() == 4) {
      throw ParseError(line_no, "expected qid:<id>");
    }
    const std::string qid = token.substr(4);

    std::vector<std::pair<std::size_t, double>> row;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw ParseError(line_no, "expected <index>:<value>, got '" + token + "'");
      }
      std::int64_t index = 0;
      double value = 0.0;
      try {
        index = parse_int(token.substr(0, colon));
        value = parse_double(token.substr(colon + 1));
      } catch (const std::invalid_argument&) {
        throw ParseError(line_no, "malformed feature '" + token + "'");
      }
      if (index < 1) throw ParseError(line_no, "feature indices are 1-based");
      dim = std::max(dim, static_cast<std::size_t>(index));
      row.emplace_back(static_cast<std::size_t>(index - 1), value);
    }

    auto [it, inserted] = index_of.try_emplace(qid, pending.size());
    if (inserted) pending.push_back({qid, {}, {}});
    auto& q = pending[it->second];
    q.labels.push_back(label);
    q.rows.push_back(std::move(row));
  }

  std::vector<Query> out;
  out.reserve(pending.size());
  for (auto& p : pending) {
    Query q;
    q.id = static_cast<QueryId>(out.size());
    q.name = p.name;
    q.labels = std::move(p.labels);
    q.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q.labels.size()),
                                       static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
      for (const auto& [col, value] : p.rows[r]) {
        q.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = value;
      }
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Query> load_letor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open LETOR file: " + path);
  return parse_letor(in);
}

void write_letor(std::ostream& out, std::span<const Query> queries) {
  for (const auto& q : queries) {
    for (Eigen::Index r = 0; r < q.features.rows(); ++r) {
      out << q.labels[static_cast<std::size_t>(r)] << " qid:" << q.name;
      for (Eigen::Index c = 0; c < q.features.cols(); ++c) {
        out << ' ' << (c + 1) << ':' << format_double(q.features(r, c));
      }
      out << '\n';
    }
  }
}

Dataset load_letor_dataset(const std::string& dir) {
  return Dataset(load_letor(dir + "/train.txt"), load_letor(dir + "/vali.txt"),
                 load_letor(dir + "/test.txt"));
}

// Synthetic -----------------------------------------------------------------

void SyntheticSpec::validate() const {
  if (train_queries == 0 || validation_queries == 0 || test_queries == 0 ||
      docs_per_query == 0) {
    throw std::invalid_argument("SyntheticSpec: counts must be positive");
  }
  if (features < 2) {
    throw std::invalid_argument(
        "SyntheticSpec: need at least 2 features (signal + distractor)");
  }
  if (signal_features < 1 || signal_features >= features) {
    throw std::invalid_argument(
        "SyntheticSpec: signal_features must be in [1, features - 1]");
  }
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) {
    throw std::invalid_argument("SyntheticSpec: signal_strength must be in [0,1]");
  }
}

SyntheticSpec SyntheticSpec::from_config(const KeyValueConfig& config,
                                         const std::string& prefix) {
  SyntheticSpec spec;
  auto read_count = [&](const char* key, std::size_t& field) {
    if (auto v = config.get_int(prefix + key)) {
      if (*v < 0) throw std::invalid_argument(prefix + key + " must be >= 0");
      field = static_cast<std::size_t>(*v);
    }
  };
  read_count("train_queries", spec.train_queries);
  read_count("validation_queries", spec.validation_queries);
  read_count("test_queries", spec.test_queries);
  read_count("docs_per_query", spec.docs_per_query);
  read_count("features", spec.features);
  read_count("signal_features", spec.signal_features);
  if (auto v = config.get_double(prefix + "signal_strength")) spec.signal_strength = *v;
  if (auto v = config.get_int(prefix + "seed")) spec.seed = static_cast<std::uint64_t>(*v);
  return spec;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double s = spec.signal_strength;
  const auto k = static_cast<Eigen::Index>(spec.docs_per_query);
  const auto f = static_cast<Eigen::Index>(spec.features);
  const auto signal = static_cast<Eigen::Index>(spec.signal_features);

  std::size_t counter = 0;
  auto make_partition = [&](std::size_t count) {
    std::vector<Query> queries;
    queries.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      Query q;
      q.name = std::to_string(counter++);
      q.labels.resize(spec.docs_per_query);
      q.features.resize(k, f);
      for (Eigen::Index d = 0; d < k; ++d) {
        const int label = static_cast<int>(rng.uniform_index(kMaxLabel + 1));
        q.labels[static_cast<std::size_t>(d)] = label;
        const double eta = rng.uniform(-1.0, 1.0);
        for (Eigen::Index j = 0; j < f; ++j) {
          const double u = rng.uniform(-1.0, 1.0);
          q.features(d, j) = j < signal
                                 ? s * label / double{kMaxLabel} + (1.0 - s) * (eta + u)
                                 : u;
        }
      }
      queries.push_back(std::move(q));
    }
    return queries;
  };
  auto train = make_partition(spec.train_queries);
  auto validation = make_partition(spec.validation_queries);
  auto test = make_partition(spec.test_queries);
  return Dataset(std::move(train), std::move(validation), std::move(test));
}

RelevanceTable relevance_from_labels(const Dataset& dataset, double alpha,
                                     double offset) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (offset + kMaxLabel * alpha > 1.0 + 1e-12) {
    throw std::invalid_argument(
        "offset + 4 * alpha exceeds 1: click probability overflow");
  }
  std::vector<std::vector<double>> values;
  values.reserve(dataset.num_queries());
  for (const auto& q : dataset.queries()) {
    auto& row = values.emplace_back();
    row.reserve(q.labels.size());
    for (int label : q.labels) row.push_back(std::min(1.0, offset + alpha * label));
  }
  return RelevanceTable(std::move(values));
}

RelevanceTable label_gains(const Dataset& dataset) {
  std::vector<std::vector<double>> values;
  values.reserve(dataset.num_queries());
  for (const auto& q : dataset.queries()) {
    auto& row = values.emplace_back();
    for (int label : q.labels) row.push_back(label / double{kMaxLabel});
  }
  return RelevanceTable(std::move(values));
}

}  // namespace genspec
