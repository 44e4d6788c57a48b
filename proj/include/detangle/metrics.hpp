#pragma once

// Disentanglement metrics: single-neuron classification (SNC), neuron
// knockout (NK), and the MIG, SAP and DCI baselines.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detangle/align.hpp"
#include "detangle/classify.hpp"
#include "detangle/dataset.hpp"
#include "detangle/infotheory.hpp"

namespace detangle {

// Predicting a factor from one neuron: bin the neuron into K bins (K = factor
// cardinality) and map bins to classes by the bijection that maximizes
// agreement.
struct SingleNeuronFit {
  double accuracy = 0.0;
  double chance = 0.0;
  double adjusted = 0.0;
  std::vector<int> bin_to_class;
};

SingleNeuronFit single_neuron_classification(std::span<const double> neuron, std::span<const int> labels,
                                             int num_classes, BinStrategy strategy = BinStrategy::kQuantile);

struct SncResult {
  std::vector<double> scores;
  std::vector<SingleNeuronFit> fits;
};

SncResult snc(const RepresentationSet& set, const Alignment& alignment,
              BinStrategy strategy = BinStrategy::kQuantile);

enum class NkAccuracy {
  kRaw,       // Acc_z - Acc_{z != i}
  kAdjusted,  // same difference on chance-adjusted accuracies
};

const char* to_string(NkAccuracy mode);

struct NkOptions {
  TrainConfig train;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  NkAccuracy accuracy = NkAccuracy::kRaw;
};

struct NkFactor {
  double score = 0.0;
  // Held-out accuracies of MLPs trained on all neurons and on all but the
  // aligned neuron.
  double accuracy_all = 0.0;
  double accuracy_without = 0.0;
  double adjusted_all = 0.0;
  double adjusted_without = 0.0;
};

std::vector<NkFactor> nk(const RepresentationSet& set, const Alignment& alignment, const NkOptions& options);

// (top1 - top2) / H(g_j) per factor row, clipped to [0, 1].
std::vector<double> mig(const ImportanceMatrix& imp, std::span<const double> factor_entropies);

struct SapResult {
  std::vector<double> scores;
  // n x m single-neuron accuracies (unadjusted).
  std::vector<double> neuron_accuracy;
};

SapResult sap(const RepresentationSet& set, BinStrategy strategy = BinStrategy::kQuantile);

struct DciResult {
  double disentanglement = 0.0;
  double completeness = 0.0;
  // Mean of the per-factor informativeness scores; nullopt if none given.
  std::optional<double> informativeness;
  double average_dc = 0.0;
  std::vector<double> neuron_disentanglement;
  std::vector<double> neuron_weight;
  std::vector<double> factor_completeness;
  bool degenerate = false;
};

DciResult dci(const ImportanceMatrix& imp, std::span<const double> informativeness = {});

enum class AggregateMode { kMean, kProduct };

const char* to_string(AggregateMode mode);
AggregateMode parse_aggregate_mode(const std::string& name);

// Mean or product of the scores at `subset` (all scores when nullopt).
double aggregate(std::span<const double> scores, AggregateMode mode,
                 const std::optional<std::vector<std::size_t>>& subset = std::nullopt);

struct MetricConfig {
  BinConfig bins;
  AlignmentMode alignment = AlignmentMode::kInjective;
  NkOptions nk;
  bool compute_probes = true;
  std::optional<std::vector<std::size_t>> subset;
  AggregateMode aggregate = AggregateMode::kMean;
};

struct MetricAggregate {
  double mean = 0.0;
  // Aggregate over config.subset with config.aggregate; equals `mean` when
  // no subset is configured and the mode is mean.
  double subset = 0.0;
};

struct MetricReport {
  std::vector<std::string> factor_names;
  std::size_t num_samples = 0;
  ImportanceMatrix importance;
  std::vector<double> entropies;
  Alignment alignment;
  Alignment greedy;  // the per-factor argmax alignment, for comparison
  SncResult snc;
  std::vector<double> mig;
  SapResult sap;
  DciResult dci;
  // Present when config.compute_probes is set.
  std::optional<std::vector<NkFactor>> nk;
  std::optional<std::vector<double>> linear;  // adjusted held-out accuracy, all neurons
  std::optional<std::vector<double>> mlp;     // adjusted held-out accuracy, all neurons
  MetricConfig config;

  MetricAggregate aggregate_of(std::span<const double> scores) const;
};

MetricReport compute_metric_report(const RepresentationSet& set, const MetricConfig& config);

}  // namespace detangle
