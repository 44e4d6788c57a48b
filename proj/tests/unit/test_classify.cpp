#include <doctest.h>

#include <cmath>
#include <numeric>

#include "detangle/classify.hpp"
#include "detangle/error.hpp"
#include "detangle/random.hpp"
#include "detangle/report.hpp"
#include "detangle/simd/kernels.hpp"
#include "detangle/synth.hpp"
#include "helpers.hpp"

using namespace detangle;

namespace {

Matrix random_features(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix x(rows, cols);
  for (double& v : x.data) v = rng.normal();
  return x;
}

double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / denom;
}

void check_gradients(ProbeKind kind) {
  Rng rng(21);
  Matrix x = random_features(rng, 5, 4);
  std::vector<int> y{0, 2, 1, 2, 0};
  TrainConfig cfg;
  cfg.hidden_units = 7;
  cfg.epochs = 3;
  cfg.seed = 5;
  ProbeModel model = train_probe(x, y, kind, cfg, 3);

  ProbeGradients grads;
  probe_loss_and_gradients(model, x, y, &grads);

  const double h = 1e-5;
  auto check_block = [&](std::vector<double> ProbeModel::*param, const std::vector<double>& analytic) {
    REQUIRE(analytic.size() == (model.*param).size());
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      ProbeModel plus = model;
      ProbeModel minus = model;
      (plus.*param)[k] += h;
      (minus.*param)[k] -= h;
      const double numeric =
          (probe_loss_and_gradients(plus, x, y, nullptr) - probe_loss_and_gradients(minus, x, y, nullptr)) / (2 * h);
      CHECK(relative_error(analytic[k], numeric) < 1e-4);
    }
  };
  check_block(&ProbeModel::output_weights, grads.output_weights);
  check_block(&ProbeModel::output_bias, grads.output_bias);
  if (kind == ProbeKind::kMlp) {
    check_block(&ProbeModel::hidden_weights, grads.hidden_weights);
    check_block(&ProbeModel::hidden_bias, grads.hidden_bias);
  }
}

RepresentationSet xor_set(std::size_t copies) {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::kXor;
  spec.copies = copies;
  return generate(spec);
}

}  // namespace

TEST_CASE("analytic gradients match central differences") {
  check_gradients(ProbeKind::kMlp);
  check_gradients(ProbeKind::kLinear);
}

TEST_CASE("softmax outputs are distributions") {
  Rng rng(4);
  Matrix x = random_features(rng, 40, 3);
  std::vector<int> y(40);
  for (std::size_t r = 0; r < 40; ++r) y[r] = static_cast<int>(r % 4);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.hidden_units = 16;
  ProbeModel model = train_probe(x, y, ProbeKind::kMlp, cfg);
  CHECK(model.num_classes == 4);
  for (std::size_t r = 0; r < 40; ++r) {
    auto p = model.probabilities(x.row(r));
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("linear probe on the Table-1 neuron reaches 75%") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::kTable1A;
  spec.copies = 25;
  auto set = generate(spec);
  const std::size_t z1[] = {0};
  Matrix x = set.select_neurons(z1);
  auto model = train_probe(x, set.factor_labels(0), ProbeKind::kLinear, TrainConfig{});
  CHECK(accuracy(model, x, set.factor_labels(0)) == doctest::Approx(0.75).epsilon(0.01 / 0.75));
}

TEST_CASE("xor separates the probe families") {
  auto set = xor_set(64);
  const std::size_t pair[] = {0, 1};
  Matrix x = set.select_neurons(pair);
  auto labels = set.factor_labels(0);
  auto linear = train_probe(x, labels, ProbeKind::kLinear, TrainConfig{});
  auto mlp = train_probe(x, labels, ProbeKind::kMlp, TrainConfig{});
  CHECK(accuracy(linear, x, labels) <= 0.75);
  CHECK(accuracy(mlp, x, labels) >= 0.99);
}

TEST_CASE("training is bit-deterministic") {
  Rng rng(9);
  Matrix x = random_features(rng, 300, 5);
  std::vector<int> y(300);
  for (std::size_t r = 0; r < 300; ++r) y[r] = x(r, 0) + 0.5 * x(r, 3) > 0 ? 1 : 0;
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 77;
  auto a = train_probe(x, y, ProbeKind::kMlp, cfg);
  auto b = train_probe(x, y, ProbeKind::kMlp, cfg);
  CHECK(a.hidden_weights == b.hidden_weights);
  CHECK(a.output_weights == b.output_weights);
  CHECK(a.output_bias == b.output_bias);
  cfg.seed = 78;
  auto c = train_probe(x, y, ProbeKind::kMlp, cfg);
  CHECK(a.hidden_weights != c.hidden_weights);
}

TEST_CASE("scalar and vector backends train to the same predictions") {
  if (!simd::backend_available(simd::Backend::kAvx2)) return;
  Rng rng(12);
  Matrix x = random_features(rng, 200, 6);
  std::vector<int> y(200);
  for (std::size_t r = 0; r < 200; ++r) y[r] = static_cast<int>((x(r, 1) > 0) + (x(r, 2) > 0.5));
  TrainConfig cfg;
  cfg.epochs = 10;
  const auto original = simd::active_backend();
  simd::set_backend(simd::Backend::kScalar);
  auto ref = train_probe(x, y, ProbeKind::kMlp, cfg);
  simd::set_backend(simd::Backend::kAvx2);
  auto fast = train_probe(x, y, ProbeKind::kMlp, cfg);
  simd::set_backend(original);
  for (std::size_t k = 0; k < ref.output_weights.size(); ++k)
    CHECK(ref.output_weights[k] == doctest::Approx(fast.output_weights[k]).epsilon(1e-8).scale(1.0));
  CHECK(accuracy(ref, x, y) == accuracy(fast, x, y));
}

TEST_CASE("probe preconditions") {
  Matrix x(4, 1);
  x.data = {0, 1, 2, 3};
  CHECK_THROWS_AS(train_probe(x, std::vector<int>{1, 1, 1, 1}, ProbeKind::kMlp, TrainConfig{}), Error);
  Matrix bad = x;
  bad.data[2] = INFINITY;
  CHECK_THROWS_AS(train_probe(bad, std::vector<int>{0, 1, 0, 1}, ProbeKind::kMlp, TrainConfig{}), Error);
  TrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.epochs = 3;
  cfg.learning_rate = 1e300;
  CHECK_THROWS_AS(train_probe(x, std::vector<int>{0, 1, 0, 1}, ProbeKind::kMlp, cfg), TrainingError);
  // batch larger than N is clipped
  TrainConfig big;
  big.batch_size = 1000;
  big.epochs = 2;
  CHECK_NOTHROW(train_probe(x, std::vector<int>{0, 1, 0, 1}, ProbeKind::kLinear, big));
}

TEST_CASE("chance adjustment") {
  CHECK(chance_rate(std::vector<int>{0, 0, 1, 1}) == 0.5);
  CHECK(chance_rate(std::vector<int>{0, 0, 0, 1}) == 0.625);
  CHECK(adjusted_accuracy(0.5, 0.5) == 0.0);
  CHECK(adjusted_accuracy(1.0, 0.5) == 1.0);
  CHECK(adjusted_accuracy(0.2, 0.5) == 0.0);
  CHECK(adjusted_accuracy(0.75, 0.5) == 0.5);
  CHECK(adjusted_accuracy(0.9, 1.0) == 0.0);
  double prev = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double a = adjusted_accuracy(k / 100.0, 0.3);
    CHECK(a >= prev);
    prev = a;
  }
}

TEST_CASE("probe weight dump round-trips") {
  Rng rng(1);
  Matrix x = random_features(rng, 50, 3);
  std::vector<int> y(50);
  for (std::size_t r = 0; r < 50; ++r) y[r] = x(r, 2) > 0;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.hidden_units = 9;
  for (auto kind : {ProbeKind::kMlp, ProbeKind::kLinear}) {
    auto model = train_probe(x, y, kind, cfg);
    auto back = probe_from_json(Json::parse(to_json(model).dump()));
    CHECK(back.output_weights == model.output_weights);
    CHECK(back.hidden_weights == model.hidden_weights);
    CHECK(back.feature_scale == model.feature_scale);
    for (std::size_t r = 0; r < 50; ++r) CHECK(back.logits(x.row(r)) == model.logits(x.row(r)));
    Json j = to_json(model);
    j["version"] = 99;
    CHECK_THROWS_AS(probe_from_json(j), Error);
  }
}
