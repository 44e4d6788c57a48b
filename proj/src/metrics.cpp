#include "detangle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detangle/assignment.hpp"
#include "detangle/error.hpp"
#include "detangle/parallel.hpp"

namespace detangle {

SingleNeuronFit single_neuron_classification(std::span<const double> neuron, std::span<const int> labels,
                                             int num_classes, BinStrategy strategy) {
  if (neuron.size() != labels.size()) throw Error("neuron and label lengths differ");
  if (num_classes < 2) throw Error("single-neuron classification needs at least two classes");
  const auto k = static_cast<std::size_t>(num_classes);
  if (k > neuron.size())
    throw Error("factor cardinality " + std::to_string(k) + " exceeds sample count " + std::to_string(neuron.size()));
  auto binned = discretize_neuron(neuron, num_classes, strategy);

  std::vector<double> counts(k * k, 0.0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || labels[r] >= num_classes) throw Error("label outside factor cardinality");
    counts[static_cast<std::size_t>(binned.bins[r]) * k + static_cast<std::size_t>(labels[r])] += 1.0;
  }
  auto best = max_weight_assignment(k, k, counts);

  SingleNeuronFit fit;
  fit.bin_to_class.assign(best.columns.begin(), best.columns.end());
  fit.accuracy = best.objective / static_cast<double>(labels.size());
  fit.chance = chance_rate(labels);
  fit.adjusted = adjusted_accuracy(fit.accuracy, fit.chance);
  return fit;
}

SncResult snc(const RepresentationSet& set, const Alignment& alignment, BinStrategy strategy) {
  const std::size_t n = set.num_factors();
  if (alignment.assignment.size() != n) throw Error("alignment does not cover every factor");
  SncResult out;
  out.scores.resize(n);
  out.fits.resize(n);
  parallel_for(n, [&](std::size_t j) {
    if (alignment.assignment[j] >= set.num_neurons()) throw Error("alignment names a neuron out of range");
    auto fit = single_neuron_classification(set.neuron(alignment.assignment[j]), set.factor_labels(j),
                                            set.schema().cardinality(j), strategy);
    out.scores[j] = fit.adjusted;
    out.fits[j] = std::move(fit);
  });
  return out;
}

const char* to_string(NkAccuracy mode) { return mode == NkAccuracy::kRaw ? "raw" : "adjusted"; }

std::vector<NkFactor> nk(const RepresentationSet& set, const Alignment& alignment, const NkOptions& options) {
  const std::size_t n = set.num_factors();
  const std::size_t m = set.num_neurons();
  if (m < 2) throw Error("neuron knockout needs at least two neurons");
  if (alignment.assignment.size() != n) throw Error("alignment does not cover every factor");
  Split split = make_split(set, RandomSplit{options.test_fraction, options.split_seed});

  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Matrix train_all = split.train.select_neurons(all);
  const Matrix test_all = split.test.select_neurons(all);

  std::vector<NkFactor> out(n);
  parallel_for(n, [&](std::size_t j) {
    const std::size_t knocked = alignment.assignment[j];
    if (knocked >= m) throw Error("alignment names a neuron out of range");
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < m; ++i)
      if (i != knocked) rest.push_back(i);
    const auto k = static_cast<std::size_t>(set.schema().cardinality(j));
    const auto y_train = split.train.factor_labels(j);
    const auto y_test = split.test.factor_labels(j);
    const double chance = chance_rate(set.factor_labels(j));

    TrainConfig cfg = options.train;
    cfg.seed = options.train.seed + 2 * j;
    auto full = train_probe(train_all, y_train, ProbeKind::kMlp, cfg, k);
    cfg.seed = options.train.seed + 2 * j + 1;
    auto knocked_out = train_probe(split.train.select_neurons(rest), y_train, ProbeKind::kMlp, cfg, k);

    NkFactor f;
    f.accuracy_all = accuracy(full, test_all, y_test);
    f.accuracy_without = accuracy(knocked_out, split.test.select_neurons(rest), y_test);
    f.adjusted_all = adjusted_accuracy(f.accuracy_all, chance);
    f.adjusted_without = adjusted_accuracy(f.accuracy_without, chance);
    f.score = options.accuracy == NkAccuracy::kRaw ? std::max(0.0, f.accuracy_all - f.accuracy_without)
                                                   : std::max(0.0, f.adjusted_all - f.adjusted_without);
    out[j] = f;
  });
  return out;
}

std::vector<double> mig(const ImportanceMatrix& imp, std::span<const double> factor_entropies) {
  if (imp.num_neurons < 2) throw Error("MIG needs at least two neurons");
  if (factor_entropies.size() != imp.num_factors) throw Error("one entropy per factor required");
  std::vector<double> out(imp.num_factors);
  for (std::size_t j = 0; j < imp.num_factors; ++j) {
    if (!(factor_entropies[j] > 0.0)) throw Error("factor " + std::to_string(j) + " has zero entropy");
    std::vector<double> row(imp.row(j).begin(), imp.row(j).end());
    std::partial_sort(row.begin(), row.begin() + 2, row.end(), std::greater<>());
    out[j] = std::clamp((row[0] - row[1]) / factor_entropies[j], 0.0, 1.0);
  }
  return out;
}

SapResult sap(const RepresentationSet& set, BinStrategy strategy) {
  const std::size_t n = set.num_factors();
  const std::size_t m = set.num_neurons();
  if (m < 2) throw Error("SAP needs at least two neurons");
  SapResult out;
  out.scores.resize(n);
  out.neuron_accuracy.assign(n * m, 0.0);
  std::vector<std::vector<double>> neurons(m);
  for (std::size_t i = 0; i < m; ++i) neurons[i] = set.neuron(i);
  parallel_for(n, [&](std::size_t j) {
    const auto labels = set.factor_labels(j);
    for (std::size_t i = 0; i < m; ++i)
      out.neuron_accuracy[j * m + i] =
          single_neuron_classification(neurons[i], labels, set.schema().cardinality(j), strategy).accuracy;
    std::vector<double> row(out.neuron_accuracy.begin() + static_cast<std::ptrdiff_t>(j * m),
                            out.neuron_accuracy.begin() + static_cast<std::ptrdiff_t>((j + 1) * m));
    std::partial_sort(row.begin(), row.begin() + 2, row.end(), std::greater<>());
    out.scores[j] = std::max(0.0, row[0] - row[1]);
  });
  return out;
}

namespace {

// 1 - H(p) / log(base) for an unnormalized nonnegative vector.
double one_minus_normalized_entropy(std::span<const double> weights, std::size_t base) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) return 0.0;
  if (base < 2) return 1.0;
  double h = 0.0;
  for (double w : weights)
    if (w > 0.0) {
      double p = w / total;
      h -= p * std::log(p);
    }
  return std::clamp(1.0 - h / std::log(static_cast<double>(base)), 0.0, 1.0);
}

}  // namespace

DciResult dci(const ImportanceMatrix& imp, std::span<const double> informativeness) {
  const std::size_t n = imp.num_factors;
  const std::size_t m = imp.num_neurons;
  if (n == 0 || m == 0) throw Error("importance matrix is empty");
  if (!informativeness.empty() && informativeness.size() != n) throw Error("one informativeness score per factor required");
  DciResult out;
  if (!informativeness.empty())
    out.informativeness =
        std::accumulate(informativeness.begin(), informativeness.end(), 0.0) / static_cast<double>(n);

  double total = 0.0;
  for (double v : imp.values) total += v;
  out.neuron_disentanglement.assign(m, 0.0);
  out.neuron_weight.assign(m, 0.0);
  out.factor_completeness.assign(n, 0.0);
  if (!(total > 0.0)) {
    out.degenerate = true;
    return out;
  }

  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> column(n);
    for (std::size_t j = 0; j < n; ++j) column[j] = imp(j, i);
    const double col_sum = std::accumulate(column.begin(), column.end(), 0.0);
    out.neuron_weight[i] = col_sum / total;
    out.neuron_disentanglement[i] = one_minus_normalized_entropy(column, n);
    out.disentanglement += out.neuron_weight[i] * out.neuron_disentanglement[i];
  }
  for (std::size_t j = 0; j < n; ++j) {
    out.factor_completeness[j] = one_minus_normalized_entropy(imp.row(j), m);
    out.completeness += out.factor_completeness[j];
  }
  out.completeness /= static_cast<double>(n);
  out.average_dc = 0.5 * (out.disentanglement + out.completeness);
  return out;
}

const char* to_string(AggregateMode mode) { return mode == AggregateMode::kMean ? "mean" : "product"; }

AggregateMode parse_aggregate_mode(const std::string& name) {
  if (name == "mean") return AggregateMode::kMean;
  if (name == "product") return AggregateMode::kProduct;
  throw Error("unknown aggregate mode '" + name + "'");
}

double aggregate(std::span<const double> scores, AggregateMode mode,
                 const std::optional<std::vector<std::size_t>>& subset) {
  std::vector<double> picked;
  if (subset) {
    if (subset->empty()) throw Error("aggregate over an empty subset");
    for (std::size_t j : *subset) {
      if (j >= scores.size()) throw Error("subset index " + std::to_string(j) + " out of range");
      picked.push_back(scores[j]);
    }
  } else {
    picked.assign(scores.begin(), scores.end());
  }
  if (picked.empty()) throw Error("aggregate of no scores");
  if (mode == AggregateMode::kMean)
    return std::accumulate(picked.begin(), picked.end(), 0.0) / static_cast<double>(picked.size());
  return std::accumulate(picked.begin(), picked.end(), 1.0, std::multiplies<>());
}

MetricAggregate MetricReport::aggregate_of(std::span<const double> scores) const {
  MetricAggregate a;
  a.mean = aggregate(scores, AggregateMode::kMean);
  a.subset = aggregate(scores, config.aggregate, config.subset);
  return a;
}

MetricReport compute_metric_report(const RepresentationSet& set, const MetricConfig& config) {
  MetricReport r;
  r.config = config;
  r.num_samples = set.num_samples();
  for (const auto& f : set.schema().factors()) r.factor_names.push_back(f.name);
  r.importance = importance_matrix(set, config.bins);
  r.entropies = factor_entropies(set);
  r.greedy = greedy_alignment(r.importance);
  r.alignment = config.alignment == AlignmentMode::kGreedy ? r.greedy : injective_alignment(r.importance);
  r.snc = snc(set, r.alignment, config.bins.strategy);
  r.mig = mig(r.importance, r.entropies);
  r.sap = sap(set, config.bins.strategy);

  if (config.compute_probes) {
    r.nk = nk(set, r.alignment, config.nk);
    std::vector<double> mlp_scores;
    for (const auto& f : *r.nk) mlp_scores.push_back(f.adjusted_all);
    r.mlp = mlp_scores;

    Split split = make_split(set, RandomSplit{config.nk.test_fraction, config.nk.split_seed});
    std::vector<double> linear_scores(set.num_factors());
    parallel_for(set.num_factors(), [&](std::size_t j) {
      TrainConfig cfg = config.nk.train;
      cfg.seed = config.nk.train.seed + 7919 + j;
      auto model = train_probe(split.train.latents(), split.train.factor_labels(j), ProbeKind::kLinear, cfg,
                               static_cast<std::size_t>(set.schema().cardinality(j)));
      double acc = accuracy(model, split.test.latents(), split.test.factor_labels(j));
      linear_scores[j] = adjusted_accuracy(acc, chance_rate(set.factor_labels(j)));
    });
    r.linear = linear_scores;
    r.dci = dci(r.importance, *r.mlp);
  } else {
    r.dci = dci(r.importance);
  }
  return r;
}

}  // namespace detangle
