#include <doctest.h>

#include <algorithm>
#include <functional>
#include <cmath>
#include <numeric>

#include "detangle/align.hpp"
#include "detangle/assignment.hpp"
#include "detangle/error.hpp"
#include "detangle/random.hpp"
#include "helpers.hpp"

using namespace detangle;

namespace {

struct Brute {
  double best = -1.0;
  std::vector<std::size_t> columns;
};

// Every injective map, visited in lexicographic order.
void enumerate(std::size_t n, std::size_t m, const std::vector<double>& w, std::vector<std::size_t>& cur,
               std::vector<bool>& used, const std::function<void(const std::vector<std::size_t>&, double)>& visit) {
  if (cur.size() == n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w[j * m + cur[j]];
    visit(cur, s);
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (used[i]) continue;
    used[i] = true;
    cur.push_back(i);
    enumerate(n, m, w, cur, used, visit);
    cur.pop_back();
    used[i] = false;
  }
}

Brute brute_force(std::size_t n, std::size_t m, const std::vector<double>& w) {
  Brute b;
  std::vector<std::size_t> cur;
  std::vector<bool> used(m, false);
  enumerate(n, m, w, cur, used, [&](const std::vector<std::size_t>&, double s) { b.best = std::max(b.best, s); });
  const double tol = 1e-10 * (1.0 + std::abs(b.best));
  bool found = false;
  enumerate(n, m, w, cur, used, [&](const std::vector<std::size_t>& c, double s) {
    if (!found && s >= b.best - tol) {
      b.columns = c;
      found = true;
    }
  });
  return b;
}

ImportanceMatrix table1_b_matrix() { return ImportanceMatrix(2, 2, {0.1887, 0.0, 0.1887, 0.1187}); }

}  // namespace

TEST_CASE("assignment matches exhaustive enumeration on 200 random matrices") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const std::size_t m = n + rng.below(9 - n);
    std::vector<double> w(n * m);
    // Half the trials use small integers so that ties are common.
    for (double& x : w) x = trial % 2 ? rng.uniform() : static_cast<double>(rng.below(3));
    Brute b = brute_force(n, m, w);
    Assignment a = lexicographic_max_weight_assignment(n, m, w);
    CHECK(a.columns == b.columns);
    CHECK(a.objective == doctest::Approx(b.best).epsilon(1e-12));
    Assignment plain = max_weight_assignment(n, m, w);
    CHECK(plain.objective == doctest::Approx(b.best).epsilon(1e-12));
  }
}

TEST_CASE("assignment preconditions") {
  CHECK_THROWS_AS(max_weight_assignment(3, 2, std::vector<double>(6, 1.0)), Error);
  CHECK_THROWS_AS(max_weight_assignment(2, 2, std::vector<double>(3, 1.0)), Error);
}

TEST_CASE("greedy collapses the Table-1 factors; injective separates them") {
  auto imp = table1_b_matrix();
  Alignment g = greedy_alignment(imp);
  CHECK(g.assignment == std::vector<std::size_t>{0, 0});
  Alignment inj = injective_alignment(imp);
  CHECK(inj.assignment == std::vector<std::size_t>{0, 1});
  CHECK(inj.objective == doctest::Approx(0.1887 + 0.1187));
  CHECK(align(imp, AlignmentMode::kGreedy).mode == AlignmentMode::kGreedy);
}

TEST_CASE("alignment edge cases") {
  CHECK_THROWS_AS(injective_alignment(ImportanceMatrix(3, 2, std::vector<double>(6, 0.1))), Error);
  Alignment zero = injective_alignment(ImportanceMatrix(2, 3, std::vector<double>(6, 0.0)));
  CHECK(zero.degenerate);
  CHECK(zero.assignment == std::vector<std::size_t>{0, 1});
  // ties resolve toward the lowest neuron
  Alignment tie = greedy_alignment(ImportanceMatrix(1, 3, {0.5, 0.5, 0.2}));
  CHECK(tie.assignment == std::vector<std::size_t>{0});
}

TEST_CASE("hinton diagrams") {
  auto imp = table1_b_matrix();
  const std::vector<std::string> names{"colour", "shape"};
  const std::string inj = hinton_svg(imp, injective_alignment(imp), names);
  const std::string grd = hinton_svg(imp, greedy_alignment(imp), names);
  CHECK(inj == hinton_svg(imp, injective_alignment(imp), names));
  CHECK(inj != grd);
  auto count = [](const std::string& s, const std::string& needle) {
    std::size_t c = 0;
    for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++c;
    return c;
  };
  CHECK(count(inj, "class=\"aligned\"") == 2);
  CHECK(count(inj, "class=\"cell\"") == 3);
  CHECK(inj.find("<svg") != std::string::npos);

  const std::string text = hinton_text(imp, injective_alignment(imp), names);
  CHECK(text.find("[########]") != std::string::npos);
  CHECK(text.find("shape") != std::string::npos);

  testing::TempDir dir("hinton");
  export_hinton(imp, greedy_alignment(imp), dir / "h.svg", names);
  CHECK(std::filesystem::file_size(dir / "h.svg") == grd.size());
}
