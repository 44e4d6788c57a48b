#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "detangle/error.hpp"
#include "detangle/random.hpp"
#include "helpers.hpp"

using namespace detangle;
using testing::TempDir;
using testing::write_text;

namespace {

const char* kSchema = R"({"factors":[{"name":"size","cardinality":3},{"name":"shape","cardinality":2}]})";

DataErrorKind load_error_kind(const std::string& csv, const std::string& schema = kSchema) {
  TempDir dir("ds");
  write_text(dir / "data.csv", csv);
  write_text(dir / "schema.json", schema);
  try {
    load_representation_set(dir / "data.csv", dir / "schema.json");
  } catch (const DataError& e) {
    return e.kind();
  }
  FAIL("expected a DataError");
  return DataErrorKind::kMalformedCsv;
}

}  // namespace

TEST_CASE("schema validation") {
  CHECK_THROWS_AS(FactorSchema({{"a", 1}}), Error);
  CHECK_THROWS_AS(FactorSchema({{"a", 2}, {"a", 3}}), Error);
  FactorSchema s({{"size", 3}, {"shape", 2}});
  CHECK(s.index_of("shape") == 1u);
  CHECK_FALSE(s.index_of("colour").has_value());
  CHECK(parse_schema_json(schema_to_json(s)) == s);
  CHECK_THROWS_AS(parse_schema_json("{\"factors\": 3}"), DataError);
  CHECK_THROWS_AS(parse_schema_json("not json"), DataError);
}

TEST_CASE("representation set invariants") {
  CHECK_THROWS_AS(testing::make_set(2, {}, {}, {2}), Error);
  // more factors than neurons
  CHECK_THROWS_AS(testing::make_set(1, {0.0, 1.0}, {0, 1, 1, 0}, {2, 2}), Error);
  CHECK_THROWS_AS(testing::make_set(1, {0.0, 1.0}, {0, 2}, {2}), Error);
  CHECK_THROWS_AS(testing::make_set(1, {0.0, NAN}, {0, 1}, {2}), Error);
}

TEST_CASE("load a hand-written 4-row file") {
  TempDir dir("ds");
  write_text(dir / "data.csv", "z0,z1,g0,g1\n0.5,1,0,0\n-2,3e-1,1,1\n4,0,2,0\n1.25,-7,0,1\n");
  write_text(dir / "schema.json", kSchema);
  RepresentationSet set = load_representation_set(dir / "data.csv", dir / "schema.json");
  CHECK(set.num_samples() == 4);
  CHECK(set.num_neurons() == 2);
  CHECK(set.num_factors() == 2);
  CHECK(set.latent(1, 1) == 0.3);
  CHECK(set.label(2, 0) == 2);
  CHECK(set.schema()[1].name == "shape");

  write_representation_set(set, dir / "copy.csv", dir / "copy.json");
  CHECK(load_representation_set(dir / "copy.csv", dir / "copy.json") == set);
}

TEST_CASE("ingestion errors name the cell") {
  CHECK(load_error_kind("z0,z1,g0,g1\n0,0,3,0\n") == DataErrorKind::kLabelOutOfRange);
  CHECK(load_error_kind("z0,z1,g0,g1\nNaN,0,0,0\n") == DataErrorKind::kNonFinite);
  CHECK(load_error_kind("z0,z1,g1,g0\n0,0,0,0\n") == DataErrorKind::kHeaderMismatch);
  CHECK(load_error_kind("z0,z1,g0\n0,0,0\n") == DataErrorKind::kHeaderMismatch);
  CHECK(load_error_kind("z0,z1,g0,g1\n0,0,0\n") == DataErrorKind::kMalformedCsv);
  CHECK(load_error_kind("z0,z1,g0,g1\n0,abc,0,0\n") == DataErrorKind::kMalformedCsv);
  CHECK(load_error_kind("z0,z1,g0,g1\n0,0,0.5,0\n") == DataErrorKind::kMalformedCsv);
  CHECK(load_error_kind("z0,z1,g0,g1\n0,0,0,0\n", "{}") == DataErrorKind::kSchemaInvalid);

  TempDir dir("ds");
  write_text(dir / "data.csv", "z0,z1,g0,g1\n0,0,0,0\n1,1,2,1\n1,1,0,2\n");
  write_text(dir / "schema.json", kSchema);
  try {
    load_representation_set(dir / "data.csv", dir / "schema.json");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == "g1");
  }
  CHECK_THROWS_AS(load_representation_set(dir / "missing.csv", dir / "schema.json"), IoError);
}

TEST_CASE("discretize examples") {
  auto two = discretize_neuron(std::vector<double>{0, 0, 1, 1}, 2, BinStrategy::kQuantile);
  CHECK(two.bins == std::vector<int>{0, 0, 1, 1});
  auto ew = discretize_neuron(std::vector<double>{0.1, 0.2, 0.3, 0.4}, 2, BinStrategy::kEqualWidth);
  CHECK(ew.bins == std::vector<int>{0, 0, 1, 1});

  Rng rng(7);
  std::vector<double> u(1000);
  for (double& x : u) x = rng.uniform();
  auto q = discretize_neuron(u, 4, BinStrategy::kQuantile);
  std::vector<int> counts(4, 0);
  for (int b : q.bins) {
    REQUIRE(b >= 0);
    REQUIRE(b < 4);
    ++counts[b];
  }
  for (int c : counts) CHECK(std::abs(c - 250) <= 1);

  auto flat = discretize_neuron(std::vector<double>{3, 3, 3}, 5, BinStrategy::kQuantile);
  CHECK(flat.degenerate);
  CHECK(flat.bins == std::vector<int>{0, 0, 0});
  CHECK_THROWS_AS(discretize_neuron(std::vector<double>{1, 2}, 0, BinStrategy::kQuantile), Error);
}

TEST_CASE("discretize maps few distinct levels to consecutive bins") {
  std::vector<double> v{5, -1, 2, 2, -1, 5, 5};
  for (auto strategy : {BinStrategy::kQuantile, BinStrategy::kEqualWidth}) {
    auto d = discretize_neuron(v, 20, strategy);
    CHECK(d.bins == std::vector<int>{2, 0, 1, 1, 0, 2, 2});
  }
}

TEST_CASE("quantile binning is invariant under increasing transforms") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(200 + trial);
    for (double& x : v) x = rng.normal();
    std::vector<double> w(v.size());
    std::transform(v.begin(), v.end(), w.begin(), [](double x) { return std::exp(x) * 3.0 + x * x * x; });
    for (int b : {2, 5, 20}) CHECK(discretize_neuron(v, b, BinStrategy::kQuantile).bins ==
                                   discretize_neuron(w, b, BinStrategy::kQuantile).bins);
  }
}

TEST_CASE("random split partitions rows deterministically") {
  std::vector<double> z(53);
  std::vector<int> g(53);
  for (std::size_t r = 0; r < 53; ++r) {
    z[r] = static_cast<double>(r);
    g[r] = static_cast<int>(r % 2);
  }
  auto set = testing::make_set(1, z, g, {2});
  Split s = make_split(set, RandomSplit{0.2, 99});
  CHECK(s.test_rows.size() == 10);
  CHECK(s.train_rows.size() == 43);
  std::set<std::size_t> all(s.train_rows.begin(), s.train_rows.end());
  all.insert(s.test_rows.begin(), s.test_rows.end());
  CHECK(all.size() == 53);
  CHECK(s.test.num_samples() == 10);
  for (std::size_t k = 0; k < s.test_rows.size(); ++k) CHECK(s.test.row_ids()[k] == s.test_rows[k]);

  Split again = make_split(set, RandomSplit{0.2, 99});
  CHECK(again.test_rows == s.test_rows);
  Split other = make_split(set, RandomSplit{0.2, 100});
  CHECK(other.test_rows != s.test_rows);

  CHECK_THROWS_AS(make_split(set, RandomSplit{0.01, 1}), Error);
}

TEST_CASE("exclusion split holds out exactly the combination") {
  std::vector<double> z;
  std::vector<int> g;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 4; ++c) {
        z.push_back(a);
        z.push_back(b);
        g.push_back(a);
        g.push_back(b);
      }
  auto set = testing::make_set(2, z, g, {3, 2});
  Split s = make_split(set, ExclusionSplit{0, 2, 1, 1});
  CHECK(s.test.num_samples() == 4);
  for (std::size_t r = 0; r < s.test.num_samples(); ++r) {
    CHECK(s.test.label(r, 0) == 2);
    CHECK(s.test.label(r, 1) == 1);
  }
  for (std::size_t r = 0; r < s.train.num_samples(); ++r)
    CHECK_FALSE((s.train.label(r, 0) == 2 && s.train.label(r, 1) == 1));
  CHECK(s.train.num_samples() == 20);
  CHECK_THROWS_AS(make_split(set.select_rows(s.train_rows), ExclusionSplit{0, 2, 1, 1}), Error);
}
