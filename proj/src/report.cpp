#include "detangle/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "detangle/error.hpp"

namespace detangle {

namespace {

// NaN and infinities have no JSON literal.
Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error("expected a number in JSON, got " + j.dump());
}

Json numbers(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

std::vector<double> read_numbers(const Json& j) {
  if (!j.is_array()) throw Error("expected a JSON array of numbers");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(read_number(x));
  return out;
}

Json scored(std::span<const double> scores, const MetricReport& report) {
  const MetricAggregate agg = report.aggregate_of(scores);
  return {{"scores", numbers(scores)}, {"mean", number(agg.mean)}, {"subset", number(agg.subset)}};
}

Json scores_json(const CgScores& s) {
  return {{"factor_raw", numbers(s.factor_raw)},
          {"factor_adjusted", numbers(s.factor_adjusted)},
          {"both_raw", number(s.both_raw)},
          {"both_adjusted", number(s.both_adjusted)}};
}

std::string fixed(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Left-aligned first column, right-aligned rest.
std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], row[c].size());
    }
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      line += c == 0 ? row[c] + pad : "  " + pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const ImportanceMatrix& imp, const std::vector<std::string>& factor_names) {
  Json rows = Json::array();
  for (std::size_t j = 0; j < imp.num_factors; ++j) rows.push_back(numbers(imp.row(j)));
  Json out = {{"num_factors", imp.num_factors},
              {"num_neurons", imp.num_neurons},
              {"bins", imp.bin_config.bins},
              {"strategy", to_string(imp.bin_config.strategy)},
              {"units", "bits"},
              {"values", rows}};
  if (!factor_names.empty()) out["factors"] = factor_names;
  return out;
}

Json to_json(const Alignment& alignment) {
  return {{"mode", to_string(alignment.mode)},
          {"assignment", alignment.assignment},
          {"objective", number(alignment.objective)},
          {"degenerate", alignment.degenerate}};
}

Json to_json(const CorrelationResult& result) {
  Json out = {{"r", number(result.r)}, {"n", result.n}, {"t", number(result.t)}, {"p", number(result.p)}};
  out["t_infinite"] = std::isinf(result.t);
  return out;
}

Json to_json(const ProbeModel& model) {
  const TrainConfig& c = model.config;
  return {{"format", "detangle-probe"},
          {"version", kProbeFormatVersion},
          {"kind", to_string(model.kind)},
          {"input_dim", model.input_dim},
          {"num_classes", model.num_classes},
          {"hidden_units", model.hidden_units},
          {"feature_mean", numbers(model.feature_mean)},
          {"feature_scale", numbers(model.feature_scale)},
          {"hidden_weights", numbers(model.hidden_weights)},
          {"hidden_bias", numbers(model.hidden_bias)},
          {"output_weights", numbers(model.output_weights)},
          {"output_bias", numbers(model.output_bias)},
          {"config",
           {{"learning_rate", c.learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"epochs", c.epochs},
            {"hidden_units", c.hidden_units},
            {"batch_size", c.batch_size},
            {"seed", c.seed}}}};
}

ProbeModel probe_from_json(const Json& j) {
  try {
    if (j.at("format") != "detangle-probe") throw Error("not a probe weight dump");
    if (j.at("version").get<int>() != kProbeFormatVersion)
      throw Error("unsupported probe format version " + j.at("version").dump());
    ProbeModel m;
    m.kind = parse_probe_kind(j.at("kind").get<std::string>());
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.num_classes = j.at("num_classes").get<std::size_t>();
    m.hidden_units = j.at("hidden_units").get<std::size_t>();
    m.feature_mean = read_numbers(j.at("feature_mean"));
    m.feature_scale = read_numbers(j.at("feature_scale"));
    m.hidden_weights = read_numbers(j.at("hidden_weights"));
    m.hidden_bias = read_numbers(j.at("hidden_bias"));
    m.output_weights = read_numbers(j.at("output_weights"));
    m.output_bias = read_numbers(j.at("output_bias"));
    const Json& c = j.at("config");
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.beta1 = c.at("beta1").get<double>();
    m.config.beta2 = c.at("beta2").get<double>();
    m.config.epsilon = c.at("epsilon").get<double>();
    m.config.epochs = c.at("epochs").get<int>();
    m.config.hidden_units = c.at("hidden_units").get<int>();
    m.config.batch_size = c.at("batch_size").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    const std::size_t fan_in = m.kind == ProbeKind::kMlp ? m.hidden_units : m.input_dim;
    if (m.feature_mean.size() != m.input_dim || m.feature_scale.size() != m.input_dim ||
        m.hidden_weights.size() != m.input_dim * m.hidden_units || m.hidden_bias.size() != m.hidden_units ||
        m.output_weights.size() != m.num_classes * fan_in || m.output_bias.size() != m.num_classes)
      throw Error("probe weight dump has inconsistent shapes");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed probe weight dump: ") + e.what());
  }
}

Json to_json(const MetricReport& report) {
  const MetricConfig& cfg = report.config;
  Json config = {{"bins", cfg.bins.bins},
                 {"bin_strategy", to_string(cfg.bins.strategy)},
                 {"alignment", to_string(cfg.alignment)},
                 {"probes", cfg.compute_probes},
                 {"nk_accuracy", to_string(cfg.nk.accuracy)},
                 {"test_fraction", cfg.nk.test_fraction},
                 {"split_seed", cfg.nk.split_seed},
                 {"train_seed", cfg.nk.train.seed},
                 {"epochs", cfg.nk.train.epochs},
                 {"aggregate", to_string(cfg.aggregate)}};
  config["subset"] = cfg.subset ? Json(*cfg.subset) : Json(nullptr);

  Json fits = Json::array();
  for (const auto& f : report.snc.fits)
    fits.push_back({{"accuracy", number(f.accuracy)},
                    {"chance", number(f.chance)},
                    {"adjusted", number(f.adjusted)},
                    {"bin_to_class", f.bin_to_class}});
  Json snc = scored(report.snc.scores, report);
  snc["fits"] = fits;

  Json sap = scored(report.sap.scores, report);
  const std::size_t m = report.importance.num_neurons;
  Json sap_rows = Json::array();
  for (std::size_t j = 0; j < report.factor_names.size(); ++j)
    sap_rows.push_back(numbers(std::span<const double>(report.sap.neuron_accuracy).subspan(j * m, m)));
  sap["neuron_accuracy"] = sap_rows;

  const DciResult& d = report.dci;
  Json dci = {{"disentanglement", number(d.disentanglement)},
              {"completeness", number(d.completeness)},
              {"average_dc", number(d.average_dc)},
              {"neuron_disentanglement", numbers(d.neuron_disentanglement)},
              {"neuron_weight", numbers(d.neuron_weight)},
              {"factor_completeness", numbers(d.factor_completeness)},
              {"degenerate", d.degenerate}};
  dci["informativeness"] = d.informativeness ? number(*d.informativeness) : Json(nullptr);

  Json out = {{"schema_version", kReportSchemaVersion},
              {"num_samples", report.num_samples},
              {"factors", report.factor_names},
              {"config", config},
              {"importance", to_json(report.importance, report.factor_names)},
              {"entropies", numbers(report.entropies)},
              {"alignment", to_json(report.alignment)},
              {"greedy_alignment", to_json(report.greedy)},
              {"snc", snc},
              {"mig", scored(report.mig, report)},
              {"sap", sap},
              {"dci", dci}};
  if (report.nk) {
    std::vector<double> scores;
    Json factors = Json::array();
    for (const auto& f : *report.nk) {
      scores.push_back(f.score);
      factors.push_back({{"score", number(f.score)},
                         {"accuracy_all", number(f.accuracy_all)},
                         {"accuracy_without", number(f.accuracy_without)},
                         {"adjusted_all", number(f.adjusted_all)},
                         {"adjusted_without", number(f.adjusted_without)}});
    }
    Json nk = scored(scores, report);
    nk["factors"] = factors;
    out["nk"] = nk;
  }
  if (report.linear) out["linear"] = scored(*report.linear, report);
  if (report.mlp) out["mlp"] = scored(*report.mlp, report);
  return out;
}

MetricSummary metric_summary_from_json(const Json& j, const std::string& run_id) {
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw Error("unsupported report schema_version " + j.at("schema_version").dump());
    MetricSummary s;
    s.run_id = run_id;
    for (const char* key : {"snc", "nk", "mig", "sap", "linear", "mlp"})
      if (j.contains(key)) s.per_factor[key] = read_numbers(j.at(key).at("scores"));
    const Json& dci = j.at("dci");
    s.scalars["dci_d"] = read_number(dci.at("disentanglement"));
    s.scalars["dci_c"] = read_number(dci.at("completeness"));
    s.scalars["dci_avg"] = read_number(dci.at("average_dc"));
    if (!dci.at("informativeness").is_null()) s.scalars["dci_i"] = read_number(dci.at("informativeness"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error("report " + run_id + " is malformed: " + e.what());
  }
}

Json to_json(const CgSuiteResult& suite, const FactorSchema& schema) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < schema.size(); ++j) names.push_back(schema[j].name);
  Json runs = Json::array();
  for (const auto& r : suite.runs) {
    Json run = {{"pair",
                 {{"factor_a", schema[r.pair.factor_a].name},
                  {"value_a", r.pair.value_a},
                  {"factor_b", schema[r.pair.factor_b].name},
                  {"value_b", r.pair.value_b}}},
                {"probe", to_string(r.kind)},
                {"novel", scores_json(r.novel)},
                {"train_rows", r.train_rows},
                {"test_rows", r.test_rows},
                {"leaked_rows", r.leaked_rows}};
    run["control"] = r.control ? scores_json(*r.control) : Json(nullptr);
    runs.push_back(run);
  }
  Json averages = Json::array();
  for (const auto& a : suite.averages) {
    Json avg = {{"probe", to_string(a.kind)},
                {"factor_adjusted", numbers(a.factor_adjusted)},
                {"both_adjusted", number(a.both_adjusted)}};
    avg["control_factor_adjusted"] = a.control_factor_adjusted ? numbers(*a.control_factor_adjusted) : Json(nullptr);
    avg["control_both_adjusted"] = a.control_both_adjusted ? number(*a.control_both_adjusted) : Json(nullptr);
    averages.push_back(avg);
  }
  return {{"schema_version", kReportSchemaVersion}, {"factors", names}, {"runs", runs}, {"averages", averages}};
}

CgSummary cg_summary_from_json(const Json& j, const std::string& run_id, ProbeKind kind) {
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw Error("unsupported CG schema_version " + j.at("schema_version").dump());
    for (const auto& a : j.at("averages"))
      if (a.at("probe") == to_string(kind)) return {run_id, read_number(a.at("both_adjusted"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error("CG result " + run_id + " is malformed: " + e.what());
  }
  throw Error("CG result " + run_id + " has no " + to_string(kind) + " averages");
}

Json to_json(const CorrelationTable& table, const CorrelationOptions& options) {
  Json columns = Json::array();
  for (const auto& name : table.columns) {
    Json c = to_json(table.results.at(name));
    c["column"] = name;
    c["values"] = numbers(table.values.at(name));
    columns.push_back(c);
  }
  return {{"schema_version", kReportSchemaVersion},
          {"runs", table.run_ids},
          {"cg", numbers(table.cg_scores)},
          {"subset", options.subset},
          {"baseline_aggregation", to_string(options.baseline)},
          {"columns", columns}};
}

std::string metric_table(const MetricReport& report) {
  const auto& names = report.factor_names;
  const bool subset = report.config.subset.has_value();
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{""};
  header.insert(header.end(), names.begin(), names.end());
  header.push_back("mean");
  if (subset) header.push_back(std::string(to_string(report.config.aggregate)) + "(subset)");
  rows.push_back(header);

  auto add = [&](const std::string& label, std::span<const double> scores) {
    std::vector<std::string> row{label};
    for (double v : scores) row.push_back(fixed(v));
    const MetricAggregate agg = report.aggregate_of(scores);
    row.push_back(fixed(agg.mean));
    if (subset) row.push_back(fixed(agg.subset));
    rows.push_back(row);
  };
  add("SNC", report.snc.scores);
  if (report.linear) add("linear", *report.linear);
  if (report.mlp) add("MLP", *report.mlp);
  if (report.nk) {
    std::vector<double> scores;
    for (const auto& f : *report.nk) scores.push_back(f.score);
    add("NK", scores);
  }
  add("MIG", report.mig);
  add("SAP", report.sap.scores);

  std::ostringstream out;
  out << render(rows);
  const DciResult& d = report.dci;
  out << "\nDCI  D " << fixed(d.disentanglement) << "  C " << fixed(d.completeness) << "  I "
      << (d.informativeness ? fixed(*d.informativeness) : std::string("-")) << "  avg(D,C) " << fixed(d.average_dc)
      << '\n';
  auto describe = [&](const Alignment& a) {
    std::string s;
    for (std::size_t j = 0; j < a.assignment.size(); ++j)
      s += (j ? ", " : "") + names[j] + "->z" + std::to_string(a.assignment[j]);
    return s;
  };
  out << "alignment (" << to_string(report.alignment.mode) << "): " << describe(report.alignment) << '\n';
  out << "alignment (greedy): " << describe(report.greedy) << '\n';
  return out.str();
}

std::string cg_table(const CgSuiteResult& suite, const FactorSchema& schema) {
  std::vector<std::size_t> factors;
  for (const auto& r : suite.runs)
    for (std::size_t f : {r.pair.factor_a, r.pair.factor_b})
      if (std::find(factors.begin(), factors.end(), f) == factors.end()) factors.push_back(f);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{""};
  for (std::size_t f : factors) header.push_back(schema[f].name);
  header.push_back("both");
  rows.push_back(header);

  auto add = [&](const std::string& label, const std::vector<double>& per_factor, double both) {
    std::vector<std::string> row{label};
    for (std::size_t f : factors) row.push_back(fixed(per_factor[f]));
    row.push_back(fixed(both));
    rows.push_back(row);
  };
  const CgAverages* mlp = nullptr;
  const CgAverages* linear = nullptr;
  for (const auto& a : suite.averages) (a.kind == ProbeKind::kMlp ? mlp : linear) = &a;
  if (mlp) add("CG", mlp->factor_adjusted, mlp->both_adjusted);
  if (linear) add("linear CG", linear->factor_adjusted, linear->both_adjusted);
  const CgAverages* control = mlp ? mlp : linear;
  if (control && control->control_factor_adjusted)
    add(mlp ? "normal test set" : "linear normal test set", *control->control_factor_adjusted,
        *control->control_both_adjusted);
  return render(rows);
}

std::string correlation_table(const CorrelationTable& table) {
  std::vector<std::vector<std::string>> rows{{"metric", "r", "t", "p", "n"}};
  for (const auto& name : table.columns) {
    const CorrelationResult& c = table.results.at(name);
    char p[32];
    std::snprintf(p, sizeof p, "%.3g", c.p);
    rows.push_back({name, fixed(c.r), std::isinf(c.t) ? (c.t > 0 ? "inf" : "-inf") : fixed(c.t), p,
                    std::to_string(c.n)});
  }
  return render(rows);
}

}  // namespace detangle
