#include <doctest.h>

#include <sstream>

#include "genspec/config.hpp"
#include "genspec/data.hpp"

using namespace genspec;

TEST_CASE("parse letor groups documents by qid") {
  std::istringstream in(
      "2 qid:10 1:0.5 3:1.0 # doc a\n"
      "0 qid:10 2:-1\n"
      "\n"
      "4 qid:7 1:2\n");
  const auto qs = parse_letor(in);
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].name == "10");
  CHECK(qs[0].labels == std::vector<int>{2, 0});
  CHECK(qs[0].features.rows() == 2);
  CHECK(qs[0].features.cols() == 3);
  CHECK(qs[0].features(0, 0) == 0.5);
  CHECK(qs[0].features(0, 1) == 0.0);
  CHECK(qs[0].features(1, 1) == -1.0);
  CHECK(qs[1].labels == std::vector<int>{4});
}

TEST_CASE("parse letor reports the failing line") {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_letor(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("1 qid:1 1:0.1\n5 qid:1 1:0.2\n") == 2);
  CHECK(line_of("1 1:0.1\n") == 1);
  CHECK(line_of("1 qid:1 0:0.1\n") == 1);
  CHECK(line_of("1 qid:1 1:abc\n") == 1);
  CHECK(line_of("x qid:1 1:0.1\n") == 1);
}

TEST_CASE("letor round trip") {
  std::istringstream in("3 qid:1 1:0.25 2:0.5\n1 qid:1 1:-0.125 2:4\n0 qid:2 1:1 2:2\n");
  const auto qs = parse_letor(in);
  std::ostringstream out;
  write_letor(out, qs);
  std::istringstream again(out.str());
  const auto back = parse_letor(again);
  REQUIRE(back.size() == qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    CHECK(back[i].labels == qs[i].labels);
    CHECK(back[i].features == qs[i].features);
  }
}

TEST_CASE("dataset assigns dense ids per partition") {
  SyntheticSpec spec;
  spec.train_queries = 3;
  spec.validation_queries = 2;
  spec.test_queries = 1;
  const Dataset ds = generate_synthetic(spec);
  CHECK(ds.num_queries() == 6);
  CHECK(ds.partition(Partition::train).size() == 3);
  CHECK(ds.partition(Partition::validation)[0] == 3);
  CHECK(ds.partition(Partition::test)[0] == 5);
  CHECK(ds.partition_of(4) == Partition::validation);
  for (QueryId q = 0; q < ds.num_queries(); ++q) CHECK(ds.query(q).id == q);
}

TEST_CASE("synthetic generator is deterministic and well formed") {
  SyntheticSpec spec;
  spec.train_queries = 5;
  spec.validation_queries = 1;
  spec.test_queries = 1;
  const Dataset a = generate_synthetic(spec);
  const Dataset b = generate_synthetic(spec);
  for (QueryId q = 0; q < a.num_queries(); ++q) CHECK(a.query(q) == b.query(q));
  for (const auto& q : a.queries()) {
    CHECK(q.num_candidates() == spec.docs_per_query);
    CHECK(q.features.cols() == static_cast<Eigen::Index>(spec.features));
    for (int l : q.labels) CHECK((l >= 0 && l <= kMaxLabel));
  }
  spec.seed = 2;
  CHECK_FALSE(generate_synthetic(spec).query(0) == a.query(0));
}

TEST_CASE("fully informative features equal scaled labels") {
  SyntheticSpec spec;
  spec.train_queries = 2;
  spec.validation_queries = 1;
  spec.test_queries = 1;
  spec.signal_strength = 1.0;
  const Dataset ds = generate_synthetic(spec);
  for (const auto& q : ds.queries()) {
    for (std::size_t d = 0; d < q.num_candidates(); ++d) {
      CHECK(q.features(static_cast<Eigen::Index>(d), 0) == q.labels[d] / 4.0);
    }
  }
}

TEST_CASE("synthetic generator parameters are validated") {
  SyntheticSpec spec;
  spec.signal_strength = 1.5;
  CHECK_THROWS(spec.validate());
  spec = {};
  spec.signal_features = spec.features;
  CHECK_THROWS(spec.validate());
  KeyValueConfig config;
  config.set("synthetic.train_queries", "12");
  config.set("synthetic.signal_strength", "0.4");
  const auto read = SyntheticSpec::from_config(config, "synthetic.");
  CHECK(read.train_queries == 12);
  CHECK(read.signal_strength == 0.4);
}

TEST_CASE("relevance from labels") {
  SyntheticSpec spec;
  spec.train_queries = 1;
  spec.validation_queries = 1;
  spec.test_queries = 1;
  const Dataset ds = generate_synthetic(spec);
  const auto r = relevance_from_labels(ds, 0.2);
  const auto& q = ds.query(0);
  for (std::size_t d = 0; d < q.num_candidates(); ++d) {
    CHECK(r(0, static_cast<DocId>(d)) == doctest::Approx(0.2 + 0.2 * q.labels[d]));
  }
  CHECK_THROWS(relevance_from_labels(ds, 0.3));
  CHECK_THROWS(relevance_from_labels(ds, -0.1));
}

TEST_CASE("key value config") {
  std::istringstream in("# comment\nalpha = 0.2\nbudgets = 10, 100\nalpha = 0.025\n");
  const auto c = KeyValueConfig::parse(in);
  CHECK(*c.get_double("alpha") == 0.025);
  CHECK(*c.get_doubles("budgets") == std::vector<double>{10, 100});
  CHECK_FALSE(c.get_string("missing").has_value());
  std::istringstream bad("novalue\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(bad), ParseError);
  CHECK(parse_int("1e6") == 1000000);
  CHECK_THROWS(parse_int("1.5"));
  CHECK(format_fixed(0.5, 3) == "0.500");
  CHECK(parse_double(format_double(0.1)) == 0.1);
}
