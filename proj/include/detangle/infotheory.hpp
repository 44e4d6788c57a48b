#pragma once

// Plug-in (maximum-likelihood) entropy and mutual information over discrete
// variables, in bits.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "detangle/dataset.hpp"

namespace detangle {

struct ContingencyTable {
  std::size_t rows = 0;  // alphabet of x
  std::size_t cols = 0;  // alphabet of y
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::uint64_t operator()(std::size_t a, std::size_t b) const { return counts[a * cols + b]; }
};

// Alphabets are [0, max+1) of each input. Labels must be nonnegative.
ContingencyTable contingency(std::span<const int> x, std::span<const int> y);

double entropy(std::span<const int> labels);
double mutual_information(std::span<const int> x, std::span<const int> y);
double mutual_information(const ContingencyTable& table);

inline constexpr std::uint64_t kDefaultJointAlphabetCap = 1'000'000;

// MI between the tuple (xs[0], xs[1], ...) and y. Throws when the product of
// the input alphabets exceeds `alphabet_cap`.
double joint_mutual_information(std::span<const std::vector<int>> xs, std::span<const int> y,
                                std::uint64_t alphabet_cap = kDefaultJointAlphabetCap);

// n x m matrix; entry (j, i) is I(g_j; binned z_i) in bits.
struct ImportanceMatrix {
  std::size_t num_factors = 0;
  std::size_t num_neurons = 0;
  std::vector<double> values;
  BinConfig bin_config;

  ImportanceMatrix() = default;
  ImportanceMatrix(std::size_t n, std::size_t m, std::vector<double> v, BinConfig config = {});

  double operator()(std::size_t factor, std::size_t neuron) const { return values[factor * num_neurons + neuron]; }
  std::span<const double> row(std::size_t factor) const {
    return {values.data() + factor * num_neurons, num_neurons};
  }
};

ImportanceMatrix importance_matrix(const RepresentationSet& set, const BinConfig& config);

std::vector<double> factor_entropies(const RepresentationSet& set);

}  // namespace detangle
