#include "detangle/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "detangle/error.hpp"

namespace detangle {

namespace {

// Square min-cost assignment with row/column potentials, O(k^3).
// cost is k x k row-major; returns column for each row.
std::vector<std::size_t> hungarian_min_cost(std::size_t k, const std::vector<double>& cost) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<std::size_t> match(k + 1, 0);  // match[col] = row, 1-based, 0 = free
  std::vector<std::size_t> way(k + 1, 0);
  for (std::size_t row = 1; row <= k; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> min_slack(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= k; ++c) {
        if (used[c]) continue;
        double cur = cost[(r0 - 1) * k + (c - 1)] - u[r0] - v[c];
        if (cur < min_slack[c]) {
          min_slack[c] = cur;
          way[c] = col0;
        }
        if (min_slack[c] < delta) {
          delta = min_slack[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= k; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          min_slack[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> out(k, 0);
  for (std::size_t c = 1; c <= k; ++c) out[match[c] - 1] = c - 1;
  return out;
}

void check_shape(std::size_t rows, std::size_t cols, std::span<const double> weights) {
  if (rows == 0 || cols == 0) throw Error("assignment problem is empty");
  if (rows > cols)
    throw Error("cannot assign " + std::to_string(rows) + " rows injectively into " + std::to_string(cols) + " columns");
  if (weights.size() != rows * cols) throw Error("weight matrix storage does not match its shape");
  for (double w : weights)
    if (!std::isfinite(w)) throw Error("assignment weights must be finite");
}

double objective_of(std::size_t cols, std::span<const double> weights, const std::vector<std::size_t>& columns) {
  double acc = 0.0;
  for (std::size_t r = 0; r < columns.size(); ++r) acc += weights[r * cols + columns[r]];
  return acc;
}

}  // namespace

Assignment max_weight_assignment(std::size_t rows, std::size_t cols, std::span<const double> weights) {
  check_shape(rows, cols, weights);
  const std::size_t k = cols;
  std::vector<double> cost(k * k, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) cost[r * k + c] = -weights[r * cols + c];
  auto full = hungarian_min_cost(k, cost);
  Assignment out;
  out.columns.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(rows));
  out.objective = objective_of(cols, weights, out.columns);
  return out;
}

Assignment lexicographic_max_weight_assignment(std::size_t rows, std::size_t cols, std::span<const double> weights) {
  check_shape(rows, cols, weights);
  const double best = max_weight_assignment(rows, cols, weights).objective;
  const double tol = 1e-10 * (1.0 + std::fabs(best));

  std::vector<std::size_t> fixed;
  std::vector<char> taken(cols, 0);
  double fixed_sum = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    bool placed = false;
    for (std::size_t c = 0; c < cols && !placed; ++c) {
      if (taken[c]) continue;
      double total = fixed_sum + weights[r * cols + c];
      const std::size_t rest_rows = rows - r - 1;
      if (rest_rows > 0) {
        std::vector<std::size_t> free_cols;
        for (std::size_t c2 = 0; c2 < cols; ++c2)
          if (!taken[c2] && c2 != c) free_cols.push_back(c2);
        std::vector<double> sub(rest_rows * free_cols.size());
        for (std::size_t rr = 0; rr < rest_rows; ++rr)
          for (std::size_t cc = 0; cc < free_cols.size(); ++cc)
            sub[rr * free_cols.size() + cc] = weights[(r + 1 + rr) * cols + free_cols[cc]];
        total += max_weight_assignment(rest_rows, free_cols.size(), sub).objective;
      }
      if (total >= best - tol) {
        fixed.push_back(c);
        taken[c] = 1;
        fixed_sum += weights[r * cols + c];
        placed = true;
      }
    }
    if (!placed) throw Error("internal: lexicographic assignment lost the optimum");
  }
  Assignment out;
  out.columns = std::move(fixed);
  out.objective = objective_of(cols, weights, out.columns);
  return out;
}

}  // namespace detangle
