#include "detangle/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detangle/error.hpp"
#include "detangle/parallel.hpp"

namespace detangle {

namespace {

std::size_t alphabet_size(std::span<const int> v) {
  int hi = -1;
  for (int x : v) {
    if (x < 0) throw Error("discrete values must be nonnegative");
    hi = std::max(hi, x);
  }
  return static_cast<std::size_t>(hi + 1);
}

// Summing sorted terms makes the result independent of the order in which
// cells were visited, so I(x;y) == I(y;x) bit for bit.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

double entropy_of_counts(std::span<const std::uint64_t> counts, std::uint64_t total) {
  std::vector<double> terms;
  const double n = static_cast<double>(total);
  for (auto c : counts)
    if (c > 0) {
      double p = static_cast<double>(c) / n;
      terms.push_back(-p * std::log2(p));
    }
  return sorted_sum(terms);
}

}  // namespace

ContingencyTable contingency(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) throw Error("length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  if (x.empty()) throw Error("contingency table of empty vectors");
  ContingencyTable t;
  t.rows = alphabet_size(x);
  t.cols = alphabet_size(y);
  t.counts.assign(t.rows * t.cols, 0);
  for (std::size_t k = 0; k < x.size(); ++k)
    ++t.counts[static_cast<std::size_t>(x[k]) * t.cols + static_cast<std::size_t>(y[k])];
  t.total = x.size();
  return t;
}

double entropy(std::span<const int> labels) {
  if (labels.empty()) throw Error("entropy of an empty vector");
  std::vector<std::uint64_t> counts(alphabet_size(labels), 0);
  for (int v : labels) ++counts[static_cast<std::size_t>(v)];
  return entropy_of_counts(counts, labels.size());
}

double mutual_information(const ContingencyTable& t) {
  std::vector<std::uint64_t> row_sum(t.rows, 0), col_sum(t.cols, 0);
  for (std::size_t a = 0; a < t.rows; ++a)
    for (std::size_t b = 0; b < t.cols; ++b) {
      row_sum[a] += t(a, b);
      col_sum[b] += t(a, b);
    }
  const double n = static_cast<double>(t.total);
  std::vector<double> terms;
  for (std::size_t a = 0; a < t.rows; ++a)
    for (std::size_t b = 0; b < t.cols; ++b) {
      const std::uint64_t c = t(a, b);
      if (c == 0) continue;
      // Integer-valued numerator and denominator: exact when independent.
      double ratio = (static_cast<double>(c) * n) / (static_cast<double>(row_sum[a]) * static_cast<double>(col_sum[b]));
      terms.push_back(static_cast<double>(c) / n * std::log2(ratio));
    }
  return std::max(0.0, sorted_sum(terms));
}

double mutual_information(std::span<const int> x, std::span<const int> y) {
  return mutual_information(contingency(x, y));
}

double joint_mutual_information(std::span<const std::vector<int>> xs, std::span<const int> y,
                                std::uint64_t alphabet_cap) {
  if (xs.empty()) throw Error("joint mutual information needs at least one variable");
  const std::size_t len = y.size();
  std::uint64_t product = 1;
  std::vector<std::uint64_t> sizes;
  for (const auto& x : xs) {
    if (x.size() != len) throw Error("length mismatch in joint mutual information");
    std::uint64_t a = alphabet_size(x);
    if (a != 0 && product > alphabet_cap / a)
      throw Error("joint alphabet exceeds cap of " + std::to_string(alphabet_cap) + " cells");
    product *= a;
    sizes.push_back(a);
  }
  if (product > alphabet_cap) throw Error("joint alphabet exceeds cap of " + std::to_string(alphabet_cap) + " cells");

  std::vector<std::uint64_t> codes(len, 0);
  for (std::size_t k = 0; k < xs.size(); ++k)
    for (std::size_t r = 0; r < len; ++r) codes[r] = codes[r] * sizes[k] + static_cast<std::uint64_t>(xs[k][r]);
  std::vector<std::uint64_t> distinct = codes;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<int> dense(len);
  for (std::size_t r = 0; r < len; ++r)
    dense[r] = static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), codes[r]) - distinct.begin());
  return mutual_information(dense, y);
}

ImportanceMatrix::ImportanceMatrix(std::size_t n, std::size_t m, std::vector<double> v, BinConfig config)
    : num_factors(n), num_neurons(m), values(std::move(v)), bin_config(config) {
  if (values.size() != n * m) throw Error("importance matrix storage does not match its shape");
  for (double x : values)
    if (!(x >= 0.0) || !std::isfinite(x)) throw Error("importance entries must be finite and nonnegative");
}

ImportanceMatrix importance_matrix(const RepresentationSet& set, const BinConfig& config) {
  const std::size_t n = set.num_factors();
  const std::size_t m = set.num_neurons();
  std::vector<std::vector<int>> labels(n);
  for (std::size_t j = 0; j < n; ++j) labels[j] = set.factor_labels(j);
  std::vector<double> values(n * m, 0.0);
  parallel_for(m, [&](std::size_t i) {
    auto values_i = set.neuron(i);
    auto binned = discretize_neuron(values_i, config.bins, config.strategy);
    for (std::size_t j = 0; j < n; ++j) values[j * m + i] = mutual_information(binned.bins, labels[j]);
  });
  return ImportanceMatrix(n, m, std::move(values), config);
}

std::vector<double> factor_entropies(const RepresentationSet& set) {
  std::vector<double> out(set.num_factors());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = entropy(set.factor_labels(j));
  return out;
}

}  // namespace detangle
