#pragma once

// Representation/factor data model, CSV + JSON ingestion, latent binning and
// train/test splitting.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "detangle/matrix.hpp"

namespace detangle {

struct Factor {
  std::string name;
  int cardinality = 0;

  bool operator==(const Factor&) const = default;
};

// Ordered list of discrete generative factors. Index j identifies factor g_j.
class FactorSchema {
 public:
  FactorSchema() = default;
  explicit FactorSchema(std::vector<Factor> factors);

  std::size_t size() const { return factors_.size(); }
  const Factor& operator[](std::size_t j) const { return factors_[j]; }
  const std::vector<Factor>& factors() const { return factors_; }
  int cardinality(std::size_t j) const { return factors_[j].cardinality; }
  std::optional<std::size_t> index_of(const std::string& name) const;

  // Unnamed schema g0, g1, ... with the given cardinalities.
  static FactorSchema from_cardinalities(std::span<const int> cardinalities);

  bool operator==(const FactorSchema&) const = default;

 private:
  std::vector<Factor> factors_;
};

// N samples of m neuron activations paired with n discrete factor labels.
// Immutable once constructed; the constructor enforces every invariant.
class RepresentationSet {
 public:
  // `latents` is N x m row-major, `labels` is N x n row-major. `row_ids`
  // records each row's index in the set it was cut from; defaults to 0..N-1.
  RepresentationSet(Matrix latents, std::vector<int> labels, FactorSchema schema,
                    std::vector<std::size_t> row_ids = {});

  std::size_t num_samples() const { return latents_.rows; }
  std::size_t num_neurons() const { return latents_.cols; }
  std::size_t num_factors() const { return schema_.size(); }

  const FactorSchema& schema() const { return schema_; }
  const Matrix& latents() const { return latents_; }
  std::span<const int> labels() const { return labels_; }
  std::span<const std::size_t> row_ids() const { return row_ids_; }

  double latent(std::size_t row, std::size_t neuron) const { return latents_(row, neuron); }
  int label(std::size_t row, std::size_t factor) const { return labels_[row * num_factors() + factor]; }

  std::vector<double> neuron(std::size_t i) const;
  std::vector<int> factor_labels(std::size_t j) const;

  // Latent columns in the given order, as an N x |neurons| matrix.
  Matrix select_neurons(std::span<const std::size_t> neurons) const;

  // Rows at the given positions; row_ids are carried over.
  RepresentationSet select_rows(std::span<const std::size_t> positions) const;

  bool operator==(const RepresentationSet&) const;

 private:
  Matrix latents_;
  std::vector<int> labels_;
  FactorSchema schema_;
  std::vector<std::size_t> row_ids_;
};

RepresentationSet load_representation_set(const std::filesystem::path& data_path,
                                          const std::filesystem::path& schema_path);

void write_representation_set(const RepresentationSet& set, const std::filesystem::path& data_path,
                              const std::filesystem::path& schema_path);

FactorSchema parse_schema_json(const std::string& text);
std::string schema_to_json(const FactorSchema& schema);

enum class BinStrategy { kQuantile, kEqualWidth };

const char* to_string(BinStrategy strategy);
BinStrategy parse_bin_strategy(const std::string& name);

struct BinConfig {
  int bins = 20;
  BinStrategy strategy = BinStrategy::kQuantile;
};

struct DiscretizedNeuron {
  std::vector<int> bins;
  // num_bins - 1 sorted thresholds; a value lands in the bin equal to the
  // number of thresholds strictly below it, so ties go to the lower bin.
  // Unused trailing thresholds are +inf.
  std::vector<double> boundaries;
  BinStrategy strategy = BinStrategy::kQuantile;
  int num_bins = 0;
  // All values identical while more than one bin was requested.
  bool degenerate = false;
};

DiscretizedNeuron discretize_neuron(std::span<const double> values, int num_bins, BinStrategy strategy);

struct RandomSplit {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Holds out every row with (g_a == value_a and g_b == value_b).
struct ExclusionSplit {
  std::size_t factor_a = 0;
  int value_a = 0;
  std::size_t factor_b = 1;
  int value_b = 0;
};

using SplitSpec = std::variant<RandomSplit, ExclusionSplit>;

struct Split {
  RepresentationSet train;
  RepresentationSet test;
  // Positions in the source set, ascending.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

Split make_split(const RepresentationSet& set, const SplitSpec& spec);

}  // namespace detangle
