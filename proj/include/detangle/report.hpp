#pragma once

// JSON serialization and plain-text tables for metric, CG and correlation
// results.

#include <string>
#include <vector>

#include <json.hpp>

#include "detangle/analysis.hpp"
#include "detangle/cgtask.hpp"
#include "detangle/classify.hpp"
#include "detangle/metrics.hpp"

namespace detangle {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kProbeFormatVersion = 1;

Json to_json(const ImportanceMatrix& imp, const std::vector<std::string>& factor_names = {});
Json to_json(const Alignment& alignment);
Json to_json(const CorrelationResult& result);

// Versioned weight dump; probe_from_json rejects other versions.
Json to_json(const ProbeModel& model);
ProbeModel probe_from_json(const Json& j);

Json to_json(const MetricReport& report);
MetricSummary metric_summary_from_json(const Json& j, const std::string& run_id);

Json to_json(const CgSuiteResult& suite, const FactorSchema& schema);
CgSummary cg_summary_from_json(const Json& j, const std::string& run_id, ProbeKind kind = ProbeKind::kMlp);

Json to_json(const CorrelationTable& table, const CorrelationOptions& options);

// Rows SNC, linear, MLP, NK, MIG, SAP; one column per factor plus the mean
// and, when configured, the subset aggregate. DCI and alignment follow.
std::string metric_table(const MetricReport& report);

// Rows CG, linear CG, normal test set; columns are the excluded factors and
// "both".
std::string cg_table(const CgSuiteResult& suite, const FactorSchema& schema);

std::string correlation_table(const CorrelationTable& table);

// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& j);

}  // namespace detangle
