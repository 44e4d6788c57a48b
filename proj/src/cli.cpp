#include "detangle/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "detangle/align.hpp"
#include "detangle/analysis.hpp"
#include "detangle/cgtask.hpp"
#include "detangle/error.hpp"
#include "detangle/io.hpp"
#include "detangle/metrics.hpp"
#include "detangle/report.hpp"
#include "detangle/synth.hpp"

namespace detangle {

namespace fs = std::filesystem;

namespace {

struct DataArgs {
  std::string data;
  std::string schema;
};

void add_data_options(CLI::App* cmd, DataArgs& args, const std::string& flag = "--data") {
  cmd->add_option(flag, args.data, "directory with data.csv and schema.json, or a CSV file")->required();
  if (flag == "--data") cmd->add_option("--schema", args.schema, "schema JSON (default: schema.json next to the CSV)");
}

RepresentationSet load(const std::string& data, const std::string& schema) {
  fs::path csv = data;
  fs::path json = schema;
  if (fs::is_directory(csv)) {
    if (json.empty()) json = csv / "schema.json";
    csv /= "data.csv";
  } else if (!fs::exists(csv)) {
    throw IoError("cannot open " + csv.string());
  } else if (json.empty()) {
    json = csv.parent_path() / "schema.json";
  }
  return load_representation_set(csv, json);
}

std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::size_t resolve_factor(const std::string& token, const std::vector<std::string>& names) {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == token) return j;
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), idx);
  if (ec != std::errc() || ptr != token.data() + token.size() || idx >= names.size())
    throw Error("unknown factor '" + token + "'");
  return idx;
}

std::vector<std::string> names_of(const FactorSchema& schema) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < schema.size(); ++j) names.push_back(schema[j].name);
  return names;
}

std::vector<std::size_t> parse_subset(const std::string& text, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& tok : split_list(text)) out.push_back(resolve_factor(tok, names));
  if (out.empty()) throw Error("--subset names no factors");
  return out;
}

std::vector<ProbeKind> parse_kinds(const std::string& probe) {
  if (probe == "both") return {ProbeKind::kMlp, ProbeKind::kLinear};
  return {parse_probe_kind(probe)};
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  write_file_atomic(path, content);
}

struct MetricArgs {
  DataArgs data;
  std::string out;
  std::string table;
  std::string align = "injective";
  int bins = 20;
  std::string bin_strategy = "quantile";
  std::uint64_t seed = 0;
  std::string subset;
  std::string aggregate = "mean";
  bool no_probes = false;
  int epochs = 75;
  std::string nk_accuracy = "raw";
  double test_fraction = 0.2;
};

void add_metric_options(CLI::App* cmd, MetricArgs& a) {
  cmd->add_option("--align", a.align, "factor to neuron alignment")->check(CLI::IsMember({"greedy", "injective"}));
  cmd->add_option("--bins", a.bins, "quantization bins for mutual information")->check(CLI::PositiveNumber);
  cmd->add_option("--bin-strategy", a.bin_strategy)->check(CLI::IsMember({"quantile", "equal_width"}));
  cmd->add_option("--seed", a.seed, "seed for probe training and the held-out split");
  cmd->add_option("--subset", a.subset, "factors to aggregate over, e.g. size,shape");
  cmd->add_option("--aggregate", a.aggregate)->check(CLI::IsMember({"mean", "product"}));
  cmd->add_flag("--no-probes", a.no_probes, "skip NK and the linear/MLP probes");
  cmd->add_option("--epochs", a.epochs, "probe training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--nk-accuracy", a.nk_accuracy)->check(CLI::IsMember({"raw", "adjusted"}));
  cmd->add_option("--test-fraction", a.test_fraction)->check(CLI::Range(0.0, 1.0));
}

MetricConfig metric_config(const MetricArgs& a, const FactorSchema& schema) {
  MetricConfig cfg;
  cfg.bins.bins = a.bins;
  cfg.bins.strategy = parse_bin_strategy(a.bin_strategy);
  cfg.alignment = parse_alignment_mode(a.align);
  cfg.compute_probes = !a.no_probes;
  cfg.nk.train.epochs = a.epochs;
  cfg.nk.train.seed = a.seed;
  cfg.nk.split_seed = a.seed;
  cfg.nk.test_fraction = a.test_fraction;
  cfg.nk.accuracy = a.nk_accuracy == "raw" ? NkAccuracy::kRaw : NkAccuracy::kAdjusted;
  cfg.aggregate = parse_aggregate_mode(a.aggregate);
  if (!a.subset.empty()) cfg.subset = parse_subset(a.subset, names_of(schema));
  return cfg;
}

struct CgArgs {
  std::string pairs;
  std::string sample_factors;
  std::size_t sample = 0;
  std::string probe = "both";
  std::uint64_t seed = 0;
  int epochs = 75;
  bool no_control = false;
};

void add_cg_options(CLI::App* cmd, CgArgs& a) {
  cmd->add_option("--pairs", a.pairs, "held-out combinations, e.g. size:0,shape:1;size:2,shape:0");
  cmd->add_option("--sample", a.sample, "draw this many combinations instead of --pairs");
  cmd->add_option("--factors", a.sample_factors, "two factors for --sample (default: the first two)");
  cmd->add_option("--probe", a.probe)->check(CLI::IsMember({"linear", "mlp", "both"}));
  cmd->add_option("--seed", a.seed);
  cmd->add_option("--epochs", a.epochs)->check(CLI::PositiveNumber);
  cmd->add_flag("--no-control", a.no_control, "skip the random-split control");
}

std::vector<CgPair> cg_pairs(const CgArgs& a, const FactorSchema& schema) {
  if (!a.pairs.empty() && a.sample > 0) throw Error("give either --pairs or --sample, not both");
  if (!a.pairs.empty()) return parse_pairs(a.pairs, schema);
  if (a.sample == 0) throw Error("cg needs --pairs or --sample");
  std::size_t fa = 0;
  std::size_t fb = 1;
  if (!a.sample_factors.empty()) {
    auto f = parse_subset(a.sample_factors, names_of(schema));
    if (f.size() != 2) throw Error("--factors needs exactly two factors");
    fa = f[0];
    fb = f[1];
  }
  return sample_pairs(schema, fa, fb, a.sample, a.seed);
}

CgOptions cg_options(const CgArgs& a) {
  CgOptions o;
  o.train.epochs = a.epochs;
  o.train.seed = a.seed;
  o.control = !a.no_control;
  o.control_seed = a.seed;
  return o;
}

std::string run_id(const std::string& path) { return fs::path(path).stem().string(); }

Json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path + ": invalid JSON: " + e.what());
  }
}

int run(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  app.require_subcommand(1);

  // synth
  GeneratorSpec spec;
  std::string kind = "ideal";
  std::string cards;
  bool exact = false;
  bool sampled = false;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic representation set (data.csv + schema.json)");
  synth->add_option("--kind", kind, "table1_a, table1_b, xor, redundant_xor, ideal, rotated, joint_code, noise");
  synth->add_option("--cards", cards, "factor cardinalities, e.g. 3,2");
  synth->add_option("--copies", spec.copies, "rows per combination or repetitions of the exact population");
  auto* exact_flag = synth->add_flag("--exact", exact, "enumerate the exact population (default)");
  synth->add_flag("--sampled", sampled, "draw coins instead of enumerating")->excludes(exact_flag);
  synth->add_option("--sigma", spec.noise_sigma, "noise standard deviation");
  synth->add_option("--angle", spec.angle, "rotation in radians (rotated kind)");
  synth->add_option("--extra", spec.extra_neurons, "additional pure-noise neurons");
  synth->add_option("--seed", spec.seed);
  synth->add_option("--out", synth_out, "output directory")->required();

  // metrics
  MetricArgs margs;
  auto* metrics = app.add_subcommand("metrics", "importance, alignment and SNC/NK/MIG/SAP/DCI");
  add_data_options(metrics, margs.data);
  metrics->add_option("--out", margs.out, "report JSON path");
  metrics->add_option("--table", margs.table, "text table path (default: stdout)");
  add_metric_options(metrics, margs);

  // align
  DataArgs adata;
  std::string align_mode = "injective";
  int align_bins = 20;
  std::string align_out;
  std::string align_json;
  auto* align_cmd = app.add_subcommand("align", "importance matrix, alignment and Hinton diagram");
  add_data_options(align_cmd, adata);
  align_cmd->add_option("--align", align_mode)->check(CLI::IsMember({"greedy", "injective"}));
  align_cmd->add_option("--bins", align_bins)->check(CLI::PositiveNumber);
  align_cmd->add_option("--out", align_out, "Hinton diagram path (.svg or text)");
  align_cmd->add_option("--json", align_json, "importance and alignment JSON path");

  // cg
  DataArgs cdata;
  std::string test_data;
  std::string test_schema;
  CgArgs cargs;
  std::string cg_out;
  auto* cg = app.add_subcommand("cg", "compositional generalization on held-out combinations");
  add_data_options(cg, cdata);
  cg->add_option("--test-data", test_data, "externally encoded test set (same layout as --data)");
  cg->add_option("--test-schema", test_schema);
  add_cg_options(cg, cargs);
  cg->add_option("--out", cg_out, "result JSON path");

  // correlate
  std::vector<std::string> report_paths;
  std::vector<std::string> cg_paths;
  std::string corr_subset = "0,1";
  std::string baseline = "mean_all";
  std::string columns;
  std::string corr_probe = "mlp";
  std::string corr_out;
  auto* correlate = app.add_subcommand("correlate", "Pearson correlation of metrics with CG accuracy");
  correlate->add_option("--reports", report_paths, "metric report JSON files")->required()->delimiter(',');
  correlate->add_option("--cg", cg_paths, "CG result JSON files, same runs in the same order")
      ->required()
      ->delimiter(',');
  correlate->add_option("--subset", corr_subset, "factors for the SNC/NK product");
  correlate->add_option("--aggregate", baseline, "baseline aggregation")
      ->check(CLI::IsMember({"mean_all", "mean_subset", "product_subset"}));
  correlate->add_option("--columns", columns, "metric columns, e.g. snc,nk,mig");
  correlate->add_option("--probe", corr_probe, "CG probe kind")->check(CLI::IsMember({"linear", "mlp"}));
  correlate->add_option("--out", corr_out, "result JSON path");

  // report
  MetricArgs rargs;
  CgArgs rcg;
  std::string report_out;
  auto* report = app.add_subcommand("report", "metrics and CG for one representation set");
  add_data_options(report, rargs.data);
  add_metric_options(report, rargs);
  report->add_option("--pairs", rcg.pairs);
  report->add_option("--sample", rcg.sample);
  report->add_option("--factors", rcg.sample_factors);
  report->add_option("--probe", rcg.probe)->check(CLI::IsMember({"linear", "mlp", "both"}));
  report->add_option("--out", report_out, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  if (*synth) {
    spec.kind = parse_generator_kind(kind);
    if (!cards.empty())
      for (const auto& tok : split_list(cards)) {
        int c = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), c);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) throw Error("bad cardinality '" + tok + "'");
        spec.cardinalities.push_back(c);
      }
    spec.exact_population = !sampled;
    RepresentationSet set = generate(spec);
    fs::create_directories(synth_out);
    write_representation_set(set, fs::path(synth_out) / "data.csv", fs::path(synth_out) / "schema.json");
    out << "wrote " << set.num_samples() << " rows to " << synth_out << '\n';
    return 0;
  }

  if (*metrics) {
    RepresentationSet set = load(margs.data.data, margs.data.schema);
    MetricReport r = compute_metric_report(set, metric_config(margs, set.schema()));
    if (!margs.out.empty()) write_file_atomic(margs.out, dump(to_json(r)));
    write_output(margs.table, metric_table(r), out);
    return 0;
  }

  if (*align_cmd) {
    RepresentationSet set = load(adata.data, adata.schema);
    BinConfig bins;
    bins.bins = align_bins;
    ImportanceMatrix imp = importance_matrix(set, bins);
    Alignment a = align(imp, parse_alignment_mode(align_mode));
    const auto names = names_of(set.schema());
    if (!align_out.empty()) export_hinton(imp, a, align_out, names);
    if (!align_json.empty())
      write_file_atomic(align_json, dump({{"schema_version", kReportSchemaVersion},
                                          {"importance", to_json(imp, names)},
                                          {"alignment", to_json(a)}}));
    out << hinton_text(imp, a, names);
    return 0;
  }

  if (*cg) {
    RepresentationSet set = load(cdata.data, cdata.schema);
    const auto pairs = cg_pairs(cargs, set.schema());
    const auto kinds = parse_kinds(cargs.probe);
    CgSuiteResult suite = test_data.empty()
                              ? run_cg_suite(set, pairs, kinds, cg_options(cargs))
                              : run_cg_external_suite(set, load(test_data, test_schema), pairs, kinds,
                                                      cg_options(cargs));
    if (!cg_out.empty()) write_file_atomic(cg_out, dump(to_json(suite, set.schema())));
    out << cg_table(suite, set.schema());
    return 0;
  }

  if (*correlate) {
    std::vector<MetricSummary> summaries;
    std::vector<std::string> factor_names;
    for (const auto& p : report_paths) {
      Json j = read_json(p);
      if (factor_names.empty() && j.contains("factors")) factor_names = j["factors"].get<std::vector<std::string>>();
      summaries.push_back(metric_summary_from_json(j, run_id(p)));
    }
    std::vector<CgSummary> cgs;
    for (const auto& p : cg_paths) cgs.push_back(cg_summary_from_json(read_json(p), run_id(p), parse_probe_kind(corr_probe)));
    CorrelationOptions options;
    options.subset = parse_subset(corr_subset, factor_names);
    options.baseline = baseline == "mean_all"      ? BaselineAggregation::kMeanAll
                       : baseline == "mean_subset" ? BaselineAggregation::kMeanSubset
                                                   : BaselineAggregation::kProductSubset;
    options.columns = split_list(columns);
    CorrelationTable table = correlate_metrics_with_cg(summaries, cgs, options);
    if (!corr_out.empty()) write_file_atomic(corr_out, dump(to_json(table, options)));
    out << correlation_table(table);
    return 0;
  }

  if (*report) {
    RepresentationSet set = load(rargs.data.data, rargs.data.schema);
    MetricReport r = compute_metric_report(set, metric_config(rargs, set.schema()));
    std::string text = metric_table(r);
    Json combined = {{"schema_version", kReportSchemaVersion}, {"metrics", to_json(r)}};
    if (!rcg.pairs.empty() || rcg.sample > 0) {
      rcg.seed = rargs.seed;
      rcg.epochs = rargs.epochs;
      CgSuiteResult suite = run_cg_suite(set, cg_pairs(rcg, set.schema()), parse_kinds(rcg.probe), cg_options(rcg));
      combined["cg"] = to_json(suite, set.schema());
      text += "\n" + cg_table(suite, set.schema());
    }
    if (!report_out.empty()) {
      fs::create_directories(report_out);
      write_file_atomic(fs::path(report_out) / "report.json", dump(combined));
      write_file_atomic(fs::path(report_out) / "report.txt", text);
    }
    out << text;
    return 0;
  }
  return 1;
}

}  // namespace

int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluate latent representations against ground-truth generative factors", "detangle"};
  try {
    return run(app, args, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli(args, std::cout, std::cerr);
}

}  // namespace detangle
