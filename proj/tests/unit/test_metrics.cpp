#include <doctest.h>

#include <cmath>

#include "detangle/error.hpp"
#include "detangle/metrics.hpp"
#include "detangle/random.hpp"
#include "detangle/synth.hpp"
#include "helpers.hpp"

using namespace detangle;

namespace {

RepresentationSet table1(GeneratorKind kind, std::size_t copies = 1) {
  GeneratorSpec spec;
  spec.kind = kind;
  spec.copies = copies;
  return generate(spec);
}

MetricConfig no_probes() {
  MetricConfig cfg;
  cfg.compute_probes = false;
  return cfg;
}

}  // namespace

TEST_CASE("Table-1 variant A golden scores") {
  auto r = compute_metric_report(table1(GeneratorKind::kTable1A), no_probes());
  CHECK(r.alignment.assignment == std::vector<std::size_t>{0, 1});
  CHECK(r.greedy.assignment == std::vector<std::size_t>{0, 0});
  CHECK(r.snc.scores[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.snc.scores[1] == 0.0);
  CHECK(r.aggregate_of(r.snc.scores).mean == doctest::Approx(0.25));
  CHECK(r.mig[0] == doctest::Approx(0.1887).epsilon(5e-4 / 0.1887));
  CHECK(r.mig[1] == doctest::Approx(0.1887).epsilon(5e-4 / 0.1887));
  CHECK(r.sap.scores[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.sap.scores[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r.dci.disentanglement == doctest::Approx(0.0).scale(1.0));
  CHECK(r.dci.completeness == doctest::Approx(1.0));
  CHECK_FALSE(r.dci.informativeness.has_value());
}

TEST_CASE("Table-1 variant B moves SNC up and the baselines down") {
  auto a = compute_metric_report(table1(GeneratorKind::kTable1A), no_probes());
  auto b = compute_metric_report(table1(GeneratorKind::kTable1B), no_probes());
  CHECK(b.snc.scores[0] == doctest::Approx(0.5));
  CHECK(b.snc.scores[1] == doctest::Approx(0.4));
  CHECK(b.aggregate_of(b.snc.scores).mean == doctest::Approx(0.45));
  CHECK(b.mig[1] == doctest::Approx(0.07).epsilon(0.005 / 0.07));
  CHECK(b.aggregate_of(b.sap.scores).mean == doctest::Approx(0.15).epsilon(1e-9));
  CHECK(b.dci.average_dc < a.dci.average_dc);
  CHECK(b.greedy.assignment == std::vector<std::size_t>{0, 0});

  MetricConfig greedy = no_probes();
  greedy.alignment = AlignmentMode::kGreedy;
  auto g = compute_metric_report(table1(GeneratorKind::kTable1B), greedy);
  CHECK(g.alignment.assignment == std::vector<std::size_t>{0, 0});
  CHECK(g.snc.scores[1] == doctest::Approx(0.5));
}

TEST_CASE("neuron knockout on variant A") {
  MetricConfig cfg;
  auto r = compute_metric_report(table1(GeneratorKind::kTable1A, 500), cfg);
  REQUIRE(r.nk.has_value());
  CHECK((*r.nk)[0].score == doctest::Approx(0.25).epsilon(0.05 / 0.25));
  CHECK((*r.nk)[1].score == doctest::Approx(0.0).epsilon(0.05).scale(1.0));
  REQUIRE(r.mlp.has_value());
  REQUIRE(r.linear.has_value());
  CHECK(r.dci.informativeness.has_value());
  for (const auto& f : *r.nk) {
    CHECK(f.score >= 0.0);
    CHECK(f.score <= 1.0);
  }
}

TEST_CASE("single-neuron classification") {
  std::vector<double> z{0.1, 0.9, 0.5, 0.2, 0.8, 0.45};
  std::vector<int> g{2, 0, 1, 2, 0, 1};
  auto fit = single_neuron_classification(z, g, 3);
  CHECK(fit.accuracy == 1.0);
  CHECK(fit.adjusted == 1.0);
  CHECK(fit.bin_to_class == std::vector<int>{2, 1, 0});
  CHECK_THROWS_AS(single_neuron_classification(std::vector<double>{0, 1}, std::vector<int>{0, 1}, 3), Error);
  CHECK_THROWS_AS(single_neuron_classification(std::vector<double>{0, 1}, std::vector<int>{0}, 2), Error);
}

TEST_CASE("scores stay in [0, 1] on random data") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t rows = 120;
    std::vector<double> z(rows * 4);
    std::vector<int> g(rows * 2);
    for (double& v : z) v = rng.normal();
    for (std::size_t r = 0; r < rows; ++r) {
      g[2 * r] = static_cast<int>(rng.below(3));
      g[2 * r + 1] = static_cast<int>(rng.below(2));
      if (trial % 2) z[4 * r + 2] += 2.0 * g[2 * r];
    }
    auto set = testing::make_set(4, z, g, {3, 2});
    auto r = compute_metric_report(set, no_probes());
    for (auto* v : {&r.snc.scores, &r.mig, &r.sap.scores})
      for (double s : *v) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
      }
    for (double d : {r.dci.disentanglement, r.dci.completeness, r.dci.average_dc}) {
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
    }
  }
}

TEST_CASE("DCI on canonical matrices") {
  auto identity = dci(ImportanceMatrix(2, 3, {1, 0, 0, 0, 1, 0}));
  CHECK(identity.disentanglement == doctest::Approx(1.0));
  CHECK(identity.completeness == doctest::Approx(1.0));
  auto spread = dci(ImportanceMatrix(2, 2, {1, 1, 1, 1}));
  CHECK(spread.disentanglement == doctest::Approx(0.0).scale(1.0));
  CHECK(spread.completeness == doctest::Approx(0.0).scale(1.0));
  auto zero = dci(ImportanceMatrix(2, 2, {0, 0, 0, 0}));
  CHECK(zero.degenerate);
  auto informed = dci(ImportanceMatrix(2, 2, {1, 0, 0, 1}), std::vector<double>{0.5, 1.0});
  CHECK(*informed.informativeness == doctest::Approx(0.75));
  CHECK_THROWS_AS(dci(ImportanceMatrix(2, 2, {1, 0, 0, 1}), std::vector<double>{0.5}), Error);
}

TEST_CASE("MIG normalizes by factor entropy") {
  ImportanceMatrix imp(1, 3, {0.9, 0.3, 0.1});
  CHECK(mig(imp, std::vector<double>{1.2})[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(mig(imp, std::vector<double>{0.0}), Error);
}

TEST_CASE("aggregation") {
  std::vector<double> s{0.5, 0.4, 0.1};
  CHECK(aggregate(s, AggregateMode::kMean) == doctest::Approx(1.0 / 3.0));
  CHECK(aggregate(s, AggregateMode::kProduct) == doctest::Approx(0.02));
  CHECK(aggregate(s, AggregateMode::kProduct, std::vector<std::size_t>{0, 1}) == doctest::Approx(0.2));
  CHECK(aggregate(s, AggregateMode::kMean, std::vector<std::size_t>{2}) == doctest::Approx(0.1));
  CHECK_THROWS_AS(aggregate(s, AggregateMode::kMean, std::vector<std::size_t>{}), Error);
  CHECK_THROWS_AS(aggregate(s, AggregateMode::kMean, std::vector<std::size_t>{3}), Error);
  CHECK(parse_aggregate_mode("product") == AggregateMode::kProduct);
  CHECK_THROWS_AS(parse_aggregate_mode("median"), Error);
}

TEST_CASE("redundant xor fools pairwise metrics but not knockout") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::kRedundantXor;
  spec.copies = 250;
  auto set = generate(spec);
  auto r = compute_metric_report(set, MetricConfig{});
  CHECK(r.mig[0] == doctest::Approx(1.0));
  CHECK(r.alignment.assignment[0] == 0);
  REQUIRE(r.nk.has_value());
  CHECK((*r.nk)[0].score < 0.05);
}
