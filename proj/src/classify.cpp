#include "detangle/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detangle/error.hpp"
#include "detangle/random.hpp"
#include "detangle/simd/kernels.hpp"

namespace detangle {

const char* to_string(ProbeKind kind) { return kind == ProbeKind::kLinear ? "linear" : "mlp"; }

ProbeKind parse_probe_kind(const std::string& name) {
  if (name == "linear") return ProbeKind::kLinear;
  if (name == "mlp") return ProbeKind::kMlp;
  throw Error("unknown probe kind '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw Error("Adam betas must lie in [0, 1)");
  if (epochs < 1) throw Error("epochs must be at least 1");
  if (hidden_units < 1) throw Error("hidden units must be at least 1");
  if (batch_size < 1) throw Error("batch size must be at least 1");
  if (!(epsilon > 0.0)) throw Error("Adam epsilon must be positive");
}

namespace {

// Scratch buffers for one forward/backward pass.
struct Workspace {
  std::vector<double> input;
  std::vector<double> hidden;
  std::vector<double> hidden_grad;
  std::vector<double> logits;

  explicit Workspace(const ProbeModel& m)
      : input(m.input_dim), hidden(m.hidden_units), hidden_grad(m.hidden_units), logits(m.num_classes) {}
};

void standardize(const ProbeModel& m, std::span<const double> raw, std::span<double> out) {
  for (std::size_t k = 0; k < m.input_dim; ++k) out[k] = (raw[k] - m.feature_mean[k]) / m.feature_scale[k];
}

// Fills ws.logits from ws.input (already standardized).
void forward(const ProbeModel& m, Workspace& ws) {
  const std::size_t c_count = m.num_classes;
  if (m.kind == ProbeKind::kMlp) {
    const std::size_t h = m.hidden_units;
    std::copy(m.hidden_bias.begin(), m.hidden_bias.end(), ws.hidden.begin());
    for (std::size_t k = 0; k < m.input_dim; ++k)
      simd::axpy(ws.input[k], std::span<const double>(m.hidden_weights.data() + k * h, h), ws.hidden);
    simd::relu(ws.hidden);
    for (std::size_t c = 0; c < c_count; ++c)
      ws.logits[c] = m.output_bias[c] + simd::dot(std::span<const double>(m.output_weights.data() + c * h, h), ws.hidden);
  } else {
    const std::size_t d = m.input_dim;
    for (std::size_t c = 0; c < c_count; ++c)
      ws.logits[c] = m.output_bias[c] + simd::dot(std::span<const double>(m.output_weights.data() + c * d, d), ws.input);
  }
}

// Converts ws.logits to softmax probabilities in place; returns -log p[label].
double softmax_cross_entropy(std::vector<double>& logits, int label) {
  const double hi = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& v : logits) {
    v = std::exp(v - hi);
    z += v;
  }
  for (double& v : logits) v /= z;
  const double p = logits[static_cast<std::size_t>(label)];
  return -(std::log(p));
}

// Accumulates scale * d(loss)/d(params) for one sample whose softmax output
// sits in ws.logits.
void backward(const ProbeModel& m, Workspace& ws, int label, double scale, ProbeGradients& g) {
  const std::size_t c_count = m.num_classes;
  for (std::size_t c = 0; c < c_count; ++c) {
    ws.logits[c] -= (static_cast<int>(c) == label) ? 1.0 : 0.0;
    ws.logits[c] *= scale;
  }
  if (m.kind == ProbeKind::kMlp) {
    const std::size_t h = m.hidden_units;
    std::fill(ws.hidden_grad.begin(), ws.hidden_grad.end(), 0.0);
    for (std::size_t c = 0; c < c_count; ++c) {
      const double delta = ws.logits[c];
      g.output_bias[c] += delta;
      simd::axpy(delta, ws.hidden, std::span<double>(g.output_weights.data() + c * h, h));
      simd::axpy(delta, std::span<const double>(m.output_weights.data() + c * h, h), ws.hidden_grad);
    }
    simd::relu_backward(ws.hidden, ws.hidden_grad);
    simd::axpy(1.0, ws.hidden_grad, g.hidden_bias);
    for (std::size_t k = 0; k < m.input_dim; ++k)
      simd::axpy(ws.input[k], ws.hidden_grad, std::span<double>(g.hidden_weights.data() + k * h, h));
  } else {
    const std::size_t d = m.input_dim;
    for (std::size_t c = 0; c < c_count; ++c) {
      const double delta = ws.logits[c];
      g.output_bias[c] += delta;
      simd::axpy(delta, ws.input, std::span<double>(g.output_weights.data() + c * d, d));
    }
  }
}

ProbeGradients zero_gradients(const ProbeModel& m) {
  ProbeGradients g;
  g.hidden_weights.assign(m.hidden_weights.size(), 0.0);
  g.hidden_bias.assign(m.hidden_bias.size(), 0.0);
  g.output_weights.assign(m.output_weights.size(), 0.0);
  g.output_bias.assign(m.output_bias.size(), 0.0);
  return g;
}

void reset(ProbeGradients& g) {
  for (auto* v : {&g.hidden_weights, &g.hidden_bias, &g.output_weights, &g.output_bias})
    std::fill(v->begin(), v->end(), 0.0);
}

void check_inputs(const Matrix& features, std::span<const int> labels) {
  if (features.rows != labels.size())
    throw Error("feature rows (" + std::to_string(features.rows) + ") do not match label count (" +
                std::to_string(labels.size()) + ")");
}

void init_uniform(Rng& rng, std::vector<double>& w, double bound) {
  for (double& x : w) x = rng.uniform(-bound, bound);
}

}  // namespace

std::vector<double> ProbeModel::logits(std::span<const double> features) const {
  if (features.size() != input_dim) throw Error("feature width does not match probe input dimension");
  Workspace ws(*this);
  standardize(*this, features, ws.input);
  forward(*this, ws);
  return ws.logits;
}

std::vector<double> ProbeModel::probabilities(std::span<const double> features) const {
  auto out = logits(features);
  softmax_cross_entropy(out, 0);
  return out;
}

int ProbeModel::predict(std::span<const double> features) const {
  auto out = logits(features);
  return static_cast<int>(std::max_element(out.begin(), out.end()) - out.begin());
}

bool ProbeModel::all_finite() const {
  for (const auto* v : {&hidden_weights, &hidden_bias, &output_weights, &output_bias})
    for (double x : *v)
      if (!std::isfinite(x)) return false;
  return true;
}

ProbeModel train_probe(const Matrix& features, std::span<const int> labels, ProbeKind kind, const TrainConfig& config,
                       std::size_t num_classes) {
  config.validate();
  check_inputs(features, labels);
  const std::size_t n_rows = features.rows;
  const std::size_t d = features.cols;
  if (d == 0) throw Error("probe needs at least one input feature");
  if (n_rows == 0) throw Error("probe needs at least one training sample");
  for (double x : features.data)
    if (!std::isfinite(x)) throw Error("probe features contain non-finite values");
  int max_label = -1;
  for (int y : labels) {
    if (y < 0) throw Error("labels must be nonnegative");
    max_label = std::max(max_label, y);
  }
  if (num_classes == 0) num_classes = static_cast<std::size_t>(max_label + 1);
  if (static_cast<std::size_t>(max_label) >= num_classes) throw Error("label exceeds class count");
  if (std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels[0]; }))
    throw Error("probe labels contain a single class");

  ProbeModel m;
  m.kind = kind;
  m.input_dim = d;
  m.num_classes = num_classes;
  m.hidden_units = kind == ProbeKind::kMlp ? static_cast<std::size_t>(config.hidden_units) : 0;
  m.config = config;

  m.feature_mean.assign(d, 0.0);
  m.feature_scale.assign(d, 1.0);
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) mean += features(r, k);
    mean /= static_cast<double>(n_rows);
    double var = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) var += (features(r, k) - mean) * (features(r, k) - mean);
    var /= static_cast<double>(n_rows);
    m.feature_mean[k] = mean;
    m.feature_scale[k] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  // Initialization and shuffling draw from separate streams.
  Rng init_rng(config.seed);
  Rng shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  if (kind == ProbeKind::kMlp) {
    const std::size_t h = m.hidden_units;
    m.hidden_weights.resize(d * h);
    m.hidden_bias.assign(h, 0.0);
    m.output_weights.resize(num_classes * h);
    m.output_bias.assign(num_classes, 0.0);
    init_uniform(init_rng, m.hidden_weights, std::sqrt(6.0 / static_cast<double>(d)));
    init_uniform(init_rng, m.output_weights, 1.0 / std::sqrt(static_cast<double>(h)));
  } else {
    m.output_weights.resize(num_classes * d);
    m.output_bias.assign(num_classes, 0.0);
    init_uniform(init_rng, m.output_weights, 1.0 / std::sqrt(static_cast<double>(d)));
  }

  Matrix x(n_rows, d);
  for (std::size_t r = 0; r < n_rows; ++r) standardize(m, features.row(r), x.row(r));

  ProbeGradients grads = zero_gradients(m);
  ProbeGradients first = zero_gradients(m);
  ProbeGradients second = zero_gradients(m);
  Workspace ws(m);
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n_rows);
  double bias1 = 1.0;
  double bias2 = 1.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_rows; start += batch) {
      const std::size_t stop = std::min(n_rows, start + batch);
      const double scale = 1.0 / static_cast<double>(stop - start);
      reset(grads);
      for (std::size_t p = start; p < stop; ++p) {
        const std::size_t r = order[p];
        std::copy(x.row(r).begin(), x.row(r).end(), ws.input.begin());
        forward(m, ws);
        epoch_loss += softmax_cross_entropy(ws.logits, labels[r]);
        backward(m, ws, labels[r], scale, grads);
      }
      bias1 *= config.beta1;
      bias2 *= config.beta2;
      const simd::AdamCoefficients coeffs{config.learning_rate, config.beta1, config.beta2, config.epsilon,
                                          1.0 - bias1, 1.0 - bias2};
      simd::adam_step(m.output_weights, grads.output_weights, first.output_weights, second.output_weights, coeffs);
      simd::adam_step(m.output_bias, grads.output_bias, first.output_bias, second.output_bias, coeffs);
      if (kind == ProbeKind::kMlp) {
        simd::adam_step(m.hidden_weights, grads.hidden_weights, first.hidden_weights, second.hidden_weights, coeffs);
        simd::adam_step(m.hidden_bias, grads.hidden_bias, first.hidden_bias, second.hidden_bias, coeffs);
      }
    }
    if (!std::isfinite(epoch_loss)) throw TrainingError(epoch, "cross-entropy loss is not finite");
  }
  if (!m.all_finite()) throw TrainingError(config.epochs, "weights are not finite");
  return m;
}

double probe_loss_and_gradients(const ProbeModel& model, const Matrix& features, std::span<const int> labels,
                                ProbeGradients* gradients) {
  check_inputs(features, labels);
  if (features.rows == 0) throw Error("no samples");
  if (gradients != nullptr) *gradients = zero_gradients(model);
  Workspace ws(model);
  const double scale = 1.0 / static_cast<double>(features.rows);
  double loss = 0.0;
  for (std::size_t r = 0; r < features.rows; ++r) {
    standardize(model, features.row(r), ws.input);
    forward(model, ws);
    loss += softmax_cross_entropy(ws.logits, labels[r]);
    if (gradients != nullptr) backward(model, ws, labels[r], scale, *gradients);
  }
  return loss * scale;
}

double accuracy(const ProbeModel& model, const Matrix& features, std::span<const int> labels) {
  check_inputs(features, labels);
  if (features.cols != model.input_dim) throw Error("feature width does not match probe input dimension");
  if (features.rows == 0) throw Error("accuracy of an empty set");
  Workspace ws(model);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < features.rows; ++r) {
    standardize(model, features.row(r), ws.input);
    forward(model, ws);
    auto best = static_cast<int>(std::max_element(ws.logits.begin(), ws.logits.end()) - ws.logits.begin());
    if (best == labels[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(features.rows);
}

double chance_rate(std::span<const int> labels) {
  if (labels.empty()) throw Error("chance rate of an empty label vector");
  std::vector<std::uint64_t> counts;
  for (int y : labels) {
    if (y < 0) throw Error("labels must be nonnegative");
    if (static_cast<std::size_t>(y) >= counts.size()) counts.resize(static_cast<std::size_t>(y) + 1, 0);
    ++counts[static_cast<std::size_t>(y)];
  }
  const double n = static_cast<double>(labels.size());
  double r = 0.0;
  for (auto c : counts) r += (static_cast<double>(c) / n) * (static_cast<double>(c) / n);
  return r;
}

double adjusted_accuracy(double accuracy, double chance) {
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw Error("accuracy must lie in [0, 1]");
  if (!(chance > 0.0 && chance <= 1.0)) throw Error("chance rate must lie in (0, 1]");
  if (chance >= 1.0) {
    warn("chance rate is 1 (single class); adjusted accuracy defined as 0");
    return 0.0;
  }
  return std::max(0.0, (accuracy - chance) / (1.0 - chance));
}

}  // namespace detangle
