#pragma once

// Kuhn-Munkres (Hungarian) maximum-weight assignment.

#include <cstddef>
#include <span>
#include <vector>

namespace detangle {

struct Assignment {
  // assignment[row] = column; columns are pairwise distinct.
  std::vector<std::size_t> columns;
  double objective = 0.0;
};

// Maximum-weight injective assignment of `rows` rows into `cols` columns
// (rows <= cols) for a row-major weight matrix. The problem is squared by
// padding with zero-weight rows whose assignments are dropped.
Assignment max_weight_assignment(std::size_t rows, std::size_t cols, std::span<const double> weights);

// Among all optimal assignments (objective within a relative 1e-10 of the
// optimum), returns the lexicographically smallest column vector.
Assignment lexicographic_max_weight_assignment(std::size_t rows, std::size_t cols, std::span<const double> weights);

}  // namespace detangle
