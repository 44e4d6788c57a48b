#pragma once

// Pearson correlation with Student-t significance, and the correlation of
// metric scores against compositional-generalization performance.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detangle/cgtask.hpp"
#include "detangle/metrics.hpp"

namespace detangle {

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct CorrelationResult {
  double r = 0.0;
  std::size_t n = 0;
  // r * sqrt(n - 2) / sqrt(1 - r^2); +/-inf when |r| == 1.
  double t = 0.0;
  // Floored at the smallest normal double, so always in (0, 1].
  double p = 1.0;
};

// t and p for a given coefficient and sample count (n >= 3).
CorrelationResult correlation_significance(double r, std::size_t n);

CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

// Per-run metric values in the shape needed for correlation.
struct MetricSummary {
  std::string run_id;
  std::map<std::string, std::vector<double>> per_factor;  // snc, nk, mig, sap, linear, mlp
  std::map<std::string, double> scalars;                  // dci_d, dci_c, dci_i, dci_avg
};

MetricSummary summarize(const std::string& run_id, const MetricReport& report);

struct CgSummary {
  std::string run_id;
  double score = 0.0;  // average adjusted "both" accuracy on held-out combinations
};

CgSummary summarize(const std::string& run_id, const CgSuiteResult& suite, ProbeKind kind = ProbeKind::kMlp);

enum class BaselineAggregation { kMeanAll, kMeanSubset, kProductSubset };

const char* to_string(BaselineAggregation mode);

struct CorrelationOptions {
  // Factors relevant to the CG task. SNC and NK use the product over these.
  std::vector<std::size_t> subset{0, 1};
  BaselineAggregation baseline = BaselineAggregation::kMeanAll;
  // Column names to correlate; empty means every column available in all runs.
  std::vector<std::string> columns;
};

struct CorrelationTable {
  std::vector<std::string> run_ids;
  std::vector<double> cg_scores;
  // column name -> (metric values, correlation)
  std::vector<std::string> columns;
  std::map<std::string, std::vector<double>> values;
  std::map<std::string, CorrelationResult> results;
};

// The scalar each run contributes to `column` under `options`.
double metric_value(const MetricSummary& summary, const std::string& column, const CorrelationOptions& options);

CorrelationTable correlate_metrics_with_cg(const std::vector<MetricSummary>& metrics,
                                           const std::vector<CgSummary>& cg, const CorrelationOptions& options);

}  // namespace detangle
