#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "detangle/error.hpp"
#include "detangle/parallel.hpp"
#include "detangle/report.hpp"
#include "detangle/synth.hpp"
#include "helpers.hpp"

using namespace detangle;

TEST_CASE("importance matrix JSON is factor-major") {
  ImportanceMatrix imp(2, 3, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  Json j = to_json(imp, {"size", "shape"});
  CHECK(j["values"][1][0].get<double>() == 0.4);
  CHECK(j["values"][0].size() == 3);
  CHECK(j["factors"][1] == "shape");
}

TEST_CASE("metric report JSON round-trips into a summary") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::kTable1B;
  MetricConfig cfg;
  cfg.compute_probes = false;
  cfg.subset = std::vector<std::size_t>{0, 1};
  cfg.aggregate = AggregateMode::kProduct;
  auto report = compute_metric_report(generate(spec), cfg);
  Json j = Json::parse(dump(to_json(report)));
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["snc"]["subset"].get<double>() == doctest::Approx(0.2));
  CHECK(j["dci"]["informativeness"].is_null());
  auto s = metric_summary_from_json(j, "b");
  CHECK(s.per_factor["snc"] == report.snc.scores);
  CHECK(s.per_factor["mig"] == report.mig);
  CHECK(s.scalars["dci_avg"] == report.dci.average_dc);
  CHECK(s.per_factor.count("nk") == 0);
  const std::string table = metric_table(report);
  CHECK(table.find("product(subset)") != std::string::npos);
  CHECK(table.find("alignment (greedy): colour->z0, shape->z0") != std::string::npos);
  j["schema_version"] = 2;
  CHECK_THROWS_AS(metric_summary_from_json(j, "b"), Error);
}

TEST_CASE("infinite t is recorded as a sentinel") {
  CorrelationResult r{1.0, 5, INFINITY, 2.2250738585072014e-308};
  Json j = to_json(r);
  CHECK(j["t"] == "inf");
  CHECK(j["t_infinite"] == true);
}

TEST_CASE("parallel_for reports the lowest failing index") {
  setenv("DETANGLE_THREADS", "4", 1);
  try {
    parallel_for(40, [](std::size_t i) {
      if (i % 7 == 3) throw std::runtime_error("index " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "index 3");
  }
  unsetenv("DETANGLE_THREADS");
}
