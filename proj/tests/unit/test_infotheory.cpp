#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "detangle/error.hpp"
#include "detangle/infotheory.hpp"
#include "detangle/random.hpp"
#include "detangle/synth.hpp"
#include "helpers.hpp"

using namespace detangle;

namespace {

// Direct enumeration of the empirical joint distribution.
double oracle_mi(const std::vector<int>& x, const std::vector<int>& y) {
  std::map<std::pair<int, int>, double> pxy;
  std::map<int, double> px;
  std::map<int, double> py;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    pxy[{x[k], y[k]}] += 1.0 / n;
    px[x[k]] += 1.0 / n;
    py[y[k]] += 1.0 / n;
  }
  double mi = 0.0;
  for (const auto& [key, p] : pxy) mi += p * std::log2(p / (px[key.first] * py[key.second]));
  return mi;
}

double oracle_entropy(const std::vector<int>& x) {
  std::map<int, double> p;
  for (int v : x) p[v] += 1.0 / static_cast<double>(x.size());
  double h = 0.0;
  for (const auto& [v, q] : p) h -= q * std::log2(q);
  return h;
}

std::vector<int> random_labels(Rng& rng, std::size_t n, int k) {
  std::vector<int> out(n);
  for (int& v : out) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return out;
}

}  // namespace

TEST_CASE("entropy golden value") {
  CHECK(entropy(std::vector<int>{0, 0, 0, 1}) == doctest::Approx(0.8112781244591328).epsilon(1e-14));
  CHECK(entropy(std::vector<int>{1, 1, 1}) == 0.0);
  CHECK(entropy(std::vector<int>{0, 1, 2, 3}) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("contingency table counts") {
  auto t = contingency(std::vector<int>{0, 1, 1, 2}, std::vector<int>{1, 0, 0, 1});
  CHECK(t.rows == 3);
  CHECK(t.cols == 2);
  CHECK(t.total == 4);
  CHECK(t(1, 0) == 2);
  CHECK(t(2, 1) == 1);
  CHECK_THROWS_AS(contingency(std::vector<int>{0, 1}, std::vector<int>{0}), Error);
  CHECK_THROWS_AS(contingency(std::vector<int>{0, -1}, std::vector<int>{0, 1}), Error);
}

TEST_CASE("mutual information matches enumeration, symmetric and bounded") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(300);
    auto x = random_labels(rng, n, 1 + static_cast<int>(rng.below(6)));
    auto y = random_labels(rng, n, 1 + static_cast<int>(rng.below(6)));
    if (trial % 3 == 0)
      for (std::size_t k = 0; k < n; ++k)
        if (rng.uniform() < 0.6) y[k] = x[k] % 4;
    const double mi = mutual_information(x, y);
    CHECK(mi == doctest::Approx(oracle_mi(x, y)).epsilon(1e-12).scale(1.0));
    CHECK(mi == mutual_information(y, x));
    CHECK(mi >= 0.0);
    CHECK(mi <= std::min(oracle_entropy(x), oracle_entropy(y)) + 1e-9);
  }
}

TEST_CASE("independent product populations have zero information") {
  std::vector<int> x;
  std::vector<int> y;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 5; ++b)
      for (int c = 0; c < 1 + a; ++c) {
        x.push_back(a);
        y.push_back(b);
      }
  CHECK(mutual_information(x, y) == 0.0);
}

TEST_CASE("coarsening bins never increases information") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> z(400);
    std::vector<int> g(400);
    for (std::size_t k = 0; k < z.size(); ++k) {
      g[k] = static_cast<int>(rng.below(3));
      z[k] = g[k] + rng.normal();
    }
    auto fine = discretize_neuron(z, 20, BinStrategy::kQuantile).bins;
    std::vector<int> coarse(fine.size());
    std::transform(fine.begin(), fine.end(), coarse.begin(), [](int b) { return b / 2; });
    CHECK(mutual_information(coarse, g) <= mutual_information(fine, g) + 1e-12);
  }
}

TEST_CASE("xor population: pairwise blind, jointly complete") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::kXor;
  auto set = generate(spec);
  std::vector<std::vector<int>> bins;
  for (std::size_t i = 0; i < set.num_neurons(); ++i) {
    bins.push_back(discretize_neuron(set.neuron(i), 20, BinStrategy::kQuantile).bins);
    CHECK(mutual_information(bins.back(), set.factor_labels(0)) < 1e-9);
  }
  CHECK(joint_mutual_information(bins, set.factor_labels(0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("joint information is monotone in added variables") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<int>> xs(3);
    for (auto& x : xs) x = random_labels(rng, 120, 3);
    auto y = random_labels(rng, 120, 2);
    const double joint = joint_mutual_information(xs, y);
    for (const auto& x : xs) CHECK(joint >= mutual_information(x, y) - 1e-9);
  }
  std::vector<std::vector<int>> wide(4, std::vector<int>{0, 99});
  CHECK_THROWS_AS(joint_mutual_information(wide, std::vector<int>{0, 1}, 1000), Error);
}

TEST_CASE("importance matrix of the Table-1 population") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::kTable1A;
  auto set = generate(spec);
  auto imp = importance_matrix(set, BinConfig{});
  REQUIRE(imp.num_factors == 2);
  REQUIRE(imp.num_neurons == 2);
  CHECK(imp(0, 0) == doctest::Approx(1.0 - 0.8112781244591328).epsilon(1e-12));
  CHECK(imp(1, 0) == doctest::Approx(1.0 - 0.8112781244591328).epsilon(1e-12));
  CHECK(std::abs(imp(0, 1)) < 1e-12);
  CHECK(std::abs(imp(1, 1)) < 1e-12);

  spec.kind = GeneratorKind::kTable1B;
  auto b = importance_matrix(generate(spec), BinConfig{});
  CHECK(b(1, 1) == doctest::Approx(0.1187).epsilon(5e-4 / 0.1187));

  auto again = importance_matrix(set, BinConfig{});
  CHECK(again.values == imp.values);
  auto ent = factor_entropies(set);
  CHECK(ent[0] == doctest::Approx(1.0));
}

TEST_CASE("importance matrix does not depend on the thread count") {
  GeneratorSpec spec;
  spec.kind = GeneratorKind::kRotated;
  spec.cardinalities = {3, 4};
  spec.copies = 30;
  spec.angle = 0.4;
  spec.extra_neurons = 5;
  auto set = generate(spec);
  setenv("DETANGLE_THREADS", "1", 1);
  auto one = importance_matrix(set, BinConfig{});
  setenv("DETANGLE_THREADS", "4", 1);
  auto four = importance_matrix(set, BinConfig{});
  unsetenv("DETANGLE_THREADS");
  CHECK(one.values == four.values);
}
