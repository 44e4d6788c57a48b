#include "detangle/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "detangle/error.hpp"

namespace detangle {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw Error("incomplete beta needs positive shape parameters");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete beta argument outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fastest on the side of the mean.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error("degrees of freedom must be positive");
  if (std::isnan(t)) throw Error("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

CorrelationResult correlation_significance(double r, std::size_t n) {
  if (n < 3) throw Error("correlation significance needs at least 3 samples");
  if (!(r >= -1.0 && r <= 1.0)) throw Error("correlation coefficient outside [-1, 1]");
  CorrelationResult out;
  out.r = r;
  out.n = n;
  const double df = static_cast<double>(n) - 2.0;
  if (std::fabs(r) == 1.0) {
    out.t = std::copysign(std::numeric_limits<double>::infinity(), r);
    out.p = std::numeric_limits<double>::min();
    return out;
  }
  out.t = r * std::sqrt(df) / std::sqrt(1.0 - r * r);
  out.p = std::clamp(student_t_two_sided_p(out.t, df), std::numeric_limits<double>::min(), 1.0);
  return out;
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson inputs differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw Error("pearson needs at least 3 samples");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error("pearson inputs must be finite");
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error("pearson input has zero variance");
  const double r = std::clamp(sxy / (std::sqrt(sxx * syy)), -1.0, 1.0);
  return correlation_significance(r, n);
}

MetricSummary summarize(const std::string& run_id, const MetricReport& report) {
  MetricSummary s;
  s.run_id = run_id;
  s.per_factor["snc"] = report.snc.scores;
  s.per_factor["mig"] = report.mig;
  s.per_factor["sap"] = report.sap.scores;
  if (report.nk) {
    std::vector<double> v;
    for (const auto& f : *report.nk) v.push_back(f.score);
    s.per_factor["nk"] = v;
  }
  if (report.linear) s.per_factor["linear"] = *report.linear;
  if (report.mlp) s.per_factor["mlp"] = *report.mlp;
  s.scalars["dci_d"] = report.dci.disentanglement;
  s.scalars["dci_c"] = report.dci.completeness;
  s.scalars["dci_avg"] = report.dci.average_dc;
  if (report.dci.informativeness) s.scalars["dci_i"] = *report.dci.informativeness;
  return s;
}

CgSummary summarize(const std::string& run_id, const CgSuiteResult& suite, ProbeKind kind) {
  for (const auto& avg : suite.averages)
    if (avg.kind == kind) return {run_id, avg.both_adjusted};
  throw Error("CG suite has no results for probe kind " + std::string(to_string(kind)));
}

const char* to_string(BaselineAggregation mode) {
  switch (mode) {
    case BaselineAggregation::kMeanAll: return "mean_all";
    case BaselineAggregation::kMeanSubset: return "mean_subset";
    case BaselineAggregation::kProductSubset: return "product_subset";
  }
  return "unknown";
}

double metric_value(const MetricSummary& summary, const std::string& column, const CorrelationOptions& options) {
  if (auto it = summary.scalars.find(column); it != summary.scalars.end()) return it->second;
  auto it = summary.per_factor.find(column);
  if (it == summary.per_factor.end()) throw Error("run " + summary.run_id + " has no '" + column + "' scores");
  const auto& scores = it->second;
  if (column == "snc" || column == "nk") return aggregate(scores, AggregateMode::kProduct, options.subset);
  switch (options.baseline) {
    case BaselineAggregation::kMeanAll: return aggregate(scores, AggregateMode::kMean);
    case BaselineAggregation::kMeanSubset: return aggregate(scores, AggregateMode::kMean, options.subset);
    case BaselineAggregation::kProductSubset: return aggregate(scores, AggregateMode::kProduct, options.subset);
  }
  throw Error("unknown baseline aggregation");
}

CorrelationTable correlate_metrics_with_cg(const std::vector<MetricSummary>& metrics,
                                           const std::vector<CgSummary>& cg, const CorrelationOptions& options) {
  if (metrics.size() != cg.size())
    throw Error("misaligned runs: " + std::to_string(metrics.size()) + " metric reports vs " +
                std::to_string(cg.size()) + " CG results");
  if (metrics.size() < 3) throw Error("correlation needs at least 3 runs");
  CorrelationTable table;
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    if (metrics[k].run_id != cg[k].run_id)
      throw Error("misaligned runs at position " + std::to_string(k) + ": '" + metrics[k].run_id + "' vs '" +
                  cg[k].run_id + "'");
    table.run_ids.push_back(metrics[k].run_id);
    table.cg_scores.push_back(cg[k].score);
  }

  if (std::all_of(table.cg_scores.begin(), table.cg_scores.end(),
                  [&](double v) { return v == table.cg_scores.front(); }))
    throw Error("CG scores have zero variance across runs");

  std::vector<std::string> columns = options.columns;
  if (columns.empty()) {
    for (const char* name : {"snc", "nk", "linear", "mlp", "mig", "sap", "dci_d", "dci_c", "dci_i", "dci_avg"}) {
      bool everywhere = std::all_of(metrics.begin(), metrics.end(), [&](const MetricSummary& s) {
        return s.per_factor.count(name) != 0 || s.scalars.count(name) != 0;
      });
      if (everywhere) columns.push_back(name);
    }
  }
  for (const auto& column : columns) {
    std::vector<double> values;
    for (const auto& s : metrics) values.push_back(metric_value(s, column, options));
    CorrelationResult res;
    try {
      res = pearson(values, table.cg_scores);
    } catch (const Error& e) {
      throw Error("column '" + column + "': " + e.what());
    }
    table.columns.push_back(column);
    table.values[column] = std::move(values);
    table.results[column] = res;
  }
  return table;
}

}  // namespace detangle
