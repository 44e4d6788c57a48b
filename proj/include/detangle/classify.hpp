#pragma once

// Probe classifiers trained from scratch: a multinomial linear model and a
// one-hidden-layer ReLU MLP, both fit with Adam on softmax cross-entropy.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "detangle/matrix.hpp"

namespace detangle {

enum class ProbeKind { kLinear, kMlp };

const char* to_string(ProbeKind kind);
ProbeKind parse_probe_kind(const std::string& name);

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int epochs = 75;
  int hidden_units = 256;
  int batch_size = 128;
  std::uint64_t seed = 0;
  double epsilon = 1e-8;

  void validate() const;
};

struct ProbeModel {
  ProbeKind kind = ProbeKind::kMlp;
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::size_t hidden_units = 0;  // 0 for linear probes

  // Inputs are standardized with training-split statistics before the first
  // layer: x' = (x - mean) / scale.
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;

  // MLP only: input_dim x hidden_units, input-major.
  std::vector<double> hidden_weights;
  std::vector<double> hidden_bias;
  // num_classes x fan_in, class-major; fan_in is hidden_units for the MLP and
  // input_dim for the linear probe.
  std::vector<double> output_weights;
  std::vector<double> output_bias;

  TrainConfig config;

  std::vector<double> logits(std::span<const double> features) const;
  std::vector<double> probabilities(std::span<const double> features) const;
  // Argmax of the logits, lowest class index on ties.
  int predict(std::span<const double> features) const;

  bool all_finite() const;
};

// Deterministic for fixed (features, labels, kind, config). num_classes = 0
// means max(label) + 1.
ProbeModel train_probe(const Matrix& features, std::span<const int> labels, ProbeKind kind, const TrainConfig& config,
                       std::size_t num_classes = 0);

struct ProbeGradients {
  std::vector<double> hidden_weights;
  std::vector<double> hidden_bias;
  std::vector<double> output_weights;
  std::vector<double> output_bias;
};

// Mean cross-entropy over all rows and its gradient with respect to every
// parameter of `model` (standardization is treated as fixed).
double probe_loss_and_gradients(const ProbeModel& model, const Matrix& features, std::span<const int> labels,
                                ProbeGradients* gradients);

double accuracy(const ProbeModel& model, const Matrix& features, std::span<const int> labels);

// Sum of squared empirical class frequencies.
double chance_rate(std::span<const int> labels);

// max(0, (a - r) / (1 - r)). r == 1 is a single-class degenerate case and
// yields 0 with a warning.
double adjusted_accuracy(double accuracy, double chance);

}  // namespace detangle
