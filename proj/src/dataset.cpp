#include "detangle/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string_view>

#include <json.hpp>

#include "detangle/error.hpp"
#include "detangle/io.hpp"
#include "detangle/random.hpp"

namespace detangle {

using nlohmann::json;

FactorSchema::FactorSchema(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.cardinality < 2)
      throw DataError(DataErrorKind::kSchemaInvalid, 0, f.name,
                      "factor '" + f.name + "' has cardinality " + std::to_string(f.cardinality) + " (< 2)");
    if (!seen.insert(f.name).second)
      throw DataError(DataErrorKind::kSchemaInvalid, 0, f.name, "duplicate factor name '" + f.name + "'");
  }
}

std::optional<std::size_t> FactorSchema::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < factors_.size(); ++j)
    if (factors_[j].name == name) return j;
  return std::nullopt;
}

FactorSchema FactorSchema::from_cardinalities(std::span<const int> cardinalities) {
  std::vector<Factor> factors;
  for (std::size_t j = 0; j < cardinalities.size(); ++j)
    factors.push_back({"g" + std::to_string(j), cardinalities[j]});
  return FactorSchema(std::move(factors));
}

RepresentationSet::RepresentationSet(Matrix latents, std::vector<int> labels, FactorSchema schema,
                                     std::vector<std::size_t> row_ids)
    : latents_(std::move(latents)), labels_(std::move(labels)), schema_(std::move(schema)), row_ids_(std::move(row_ids)) {
  const std::size_t n_rows = latents_.rows;
  const std::size_t n = schema_.size();
  if (n_rows == 0) throw Error("representation set is empty");
  if (n == 0) throw Error("representation set has no factors");
  if (latents_.data.size() != n_rows * latents_.cols) throw Error("latent matrix storage does not match its shape");
  if (latents_.cols < n)
    throw Error("representation has " + std::to_string(latents_.cols) + " neurons for " + std::to_string(n) +
                " factors; need at least as many neurons as factors");
  if (labels_.size() != n_rows * n) throw Error("label table does not match N x n");
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t i = 0; i < latents_.cols; ++i)
      if (!std::isfinite(latents_(r, i)))
        throw DataError(DataErrorKind::kNonFinite, r + 1, "z" + std::to_string(i),
                        "non-finite latent at row " + std::to_string(r + 1) + ", column z" + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      int v = labels_[r * n + j];
      if (v < 0 || v >= schema_.cardinality(j))
        throw DataError(DataErrorKind::kLabelOutOfRange, r + 1, "g" + std::to_string(j),
                        "label " + std::to_string(v) + " at row " + std::to_string(r + 1) + ", column g" +
                            std::to_string(j) + " outside [0, " + std::to_string(schema_.cardinality(j)) + ")");
    }
  }
  if (row_ids_.empty()) {
    row_ids_.resize(n_rows);
    std::iota(row_ids_.begin(), row_ids_.end(), std::size_t{0});
  } else if (row_ids_.size() != n_rows) {
    throw Error("row id count does not match sample count");
  }
}

std::vector<double> RepresentationSet::neuron(std::size_t i) const {
  std::vector<double> out(num_samples());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = latents_(r, i);
  return out;
}

std::vector<int> RepresentationSet::factor_labels(std::size_t j) const {
  std::vector<int> out(num_samples());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = label(r, j);
  return out;
}

Matrix RepresentationSet::select_neurons(std::span<const std::size_t> neurons) const {
  Matrix out(num_samples(), neurons.size());
  for (std::size_t r = 0; r < num_samples(); ++r)
    for (std::size_t c = 0; c < neurons.size(); ++c) out(r, c) = latents_(r, neurons[c]);
  return out;
}

RepresentationSet RepresentationSet::select_rows(std::span<const std::size_t> positions) const {
  const std::size_t m = num_neurons();
  const std::size_t n = num_factors();
  Matrix lat(positions.size(), m);
  std::vector<int> lab(positions.size() * n);
  std::vector<std::size_t> ids(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k) {
    std::size_t r = positions[k];
    std::copy_n(latents_.data.begin() + static_cast<std::ptrdiff_t>(r * m), m,
                lat.data.begin() + static_cast<std::ptrdiff_t>(k * m));
    std::copy_n(labels_.begin() + static_cast<std::ptrdiff_t>(r * n), n, lab.begin() + static_cast<std::ptrdiff_t>(k * n));
    ids[k] = row_ids_[r];
  }
  return RepresentationSet(std::move(lat), std::move(lab), schema_, std::move(ids));
}

bool RepresentationSet::operator==(const RepresentationSet& other) const {
  return latents_.rows == other.latents_.rows && latents_.cols == other.latents_.cols &&
         latents_.data == other.latents_.data && labels_ == other.labels_ && schema_ == other.schema_;
}

// ---------------------------------------------------------------------------
// File formats

FactorSchema parse_schema_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(DataErrorKind::kSchemaInvalid, 0, "", std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("factors") || !doc["factors"].is_array())
    throw DataError(DataErrorKind::kSchemaInvalid, 0, "", "schema must be an object with a \"factors\" array");
  std::vector<Factor> factors;
  for (const auto& f : doc["factors"]) {
    if (!f.is_object() || !f.contains("name") || !f["name"].is_string() || !f.contains("cardinality") ||
        !f["cardinality"].is_number_integer())
      throw DataError(DataErrorKind::kSchemaInvalid, 0, "",
                      "each factor needs a string \"name\" and an integer \"cardinality\"");
    factors.push_back({f["name"].get<std::string>(), f["cardinality"].get<int>()});
  }
  if (factors.empty()) throw DataError(DataErrorKind::kSchemaInvalid, 0, "", "schema lists no factors");
  return FactorSchema(std::move(factors));
}

std::string schema_to_json(const FactorSchema& schema) {
  json doc;
  doc["factors"] = json::array();
  for (const auto& f : schema.factors()) doc["factors"].push_back({{"name", f.name}, {"cardinality", f.cardinality}});
  return doc.dump(2) + "\n";
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

RepresentationSet load_representation_set(const std::filesystem::path& data_path,
                                          const std::filesystem::path& schema_path) {
  FactorSchema schema = parse_schema_json(read_file(schema_path));
  const std::string text = read_file(data_path);

  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      std::size_t nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  }
  if (lines.empty()) throw DataError(DataErrorKind::kMalformedCsv, 0, "", "data file has no header");

  auto header = split_fields(lines[0]);
  std::size_t m = 0;
  while (m < header.size() && trim(header[m]) == "z" + std::to_string(m)) ++m;
  const std::size_t n = schema.size();
  if (m == 0) throw DataError(DataErrorKind::kHeaderMismatch, 0, "", "header must start with z0");
  if (header.size() != m + n)
    throw DataError(DataErrorKind::kHeaderMismatch, 0, "",
                    "header has " + std::to_string(header.size() - m) + " label columns, schema lists " +
                        std::to_string(n) + " factors");
  for (std::size_t j = 0; j < n; ++j)
    if (trim(header[m + j]) != "g" + std::to_string(j))
      throw DataError(DataErrorKind::kHeaderMismatch, 0, std::string(trim(header[m + j])),
                      "expected header column g" + std::to_string(j) + ", found '" +
                          std::string(trim(header[m + j])) + "'");

  const std::size_t n_rows = lines.size() - 1;
  if (n_rows == 0) throw DataError(DataErrorKind::kMalformedCsv, 0, "", "data file has no rows");
  Matrix latents(n_rows, m);
  std::vector<int> labels(n_rows * n);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t row = r + 1;
    auto fields = split_fields(lines[r + 1]);
    if (fields.size() != m + n)
      throw DataError(DataErrorKind::kMalformedCsv, row, "",
                      "row " + std::to_string(row) + " has " + std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(m + n));
    for (std::size_t i = 0; i < m; ++i) {
      std::string_view f = trim(fields[i]);
      const std::string col = "z" + std::to_string(i);
      double v = 0.0;
      auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || end != f.data() + f.size() || f.empty())
        throw DataError(DataErrorKind::kMalformedCsv, row, col,
                        "cannot parse '" + std::string(f) + "' at row " + std::to_string(row) + ", column " + col);
      if (!std::isfinite(v))
        throw DataError(DataErrorKind::kNonFinite, row, col,
                        "non-finite latent at row " + std::to_string(row) + ", column " + col);
      latents(r, i) = v;
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::string_view f = trim(fields[m + j]);
      const std::string col = "g" + std::to_string(j);
      long v = 0;
      auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || end != f.data() + f.size() || f.empty())
        throw DataError(DataErrorKind::kMalformedCsv, row, col,
                        "cannot parse label '" + std::string(f) + "' at row " + std::to_string(row) + ", column " + col);
      if (v < 0 || v >= schema.cardinality(j))
        throw DataError(DataErrorKind::kLabelOutOfRange, row, col,
                        "label " + std::to_string(v) + " at row " + std::to_string(row) + ", column " + col +
                            " outside [0, " + std::to_string(schema.cardinality(j)) + ")");
      labels[r * n + j] = static_cast<int>(v);
    }
  }
  return RepresentationSet(std::move(latents), std::move(labels), std::move(schema));
}

void write_representation_set(const RepresentationSet& set, const std::filesystem::path& data_path,
                              const std::filesystem::path& schema_path) {
  const std::size_t m = set.num_neurons();
  const std::size_t n = set.num_factors();
  std::string out;
  for (std::size_t i = 0; i < m; ++i) out += (i ? ",z" : "z") + std::to_string(i);
  for (std::size_t j = 0; j < n; ++j) out += ",g" + std::to_string(j);
  out += '\n';
  for (std::size_t r = 0; r < set.num_samples(); ++r) {
    for (std::size_t i = 0; i < m; ++i) {
      if (i) out += ',';
      out += format_double(set.latent(r, i));
    }
    for (std::size_t j = 0; j < n; ++j) {
      out += ',';
      out += std::to_string(set.label(r, j));
    }
    out += '\n';
  }
  write_file_atomic(data_path, out);
  write_file_atomic(schema_path, schema_to_json(set.schema()));
}

// ---------------------------------------------------------------------------
// Binning

const char* to_string(BinStrategy strategy) {
  return strategy == BinStrategy::kQuantile ? "quantile" : "equal_width";
}

BinStrategy parse_bin_strategy(const std::string& name) {
  if (name == "quantile") return BinStrategy::kQuantile;
  if (name == "equal_width") return BinStrategy::kEqualWidth;
  throw Error("unknown bin strategy '" + name + "'");
}

DiscretizedNeuron discretize_neuron(std::span<const double> values, int num_bins, BinStrategy strategy) {
  if (num_bins < 1) throw Error("bin count must be positive");
  if (values.empty()) throw Error("cannot discretize an empty neuron");
  const std::size_t n = values.size();
  const auto b = static_cast<std::size_t>(num_bins);
  for (double v : values)
    if (!std::isfinite(v)) throw Error("cannot discretize non-finite values");

  DiscretizedNeuron out;
  out.strategy = strategy;
  out.num_bins = num_bins;
  out.boundaries.assign(b - 1, std::numeric_limits<double>::infinity());

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> levels = sorted;
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  if (levels.size() <= b) {
    // Already discrete with no more levels than bins: levels map to bins
    // 0..L-1 in sorted order.
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) out.boundaries[k] = levels[k];
    out.degenerate = levels.size() == 1 && b > 1;
  } else if (strategy == BinStrategy::kQuantile) {
    for (std::size_t k = 1; k < b; ++k) out.boundaries[k - 1] = sorted[(k * n) / b - 1];
  } else {
    const double lo = sorted.front();
    const double width = (sorted.back() - lo) / static_cast<double>(b);
    for (std::size_t k = 1; k < b; ++k) out.boundaries[k - 1] = lo + static_cast<double>(k) * width;
  }

  out.bins.resize(n);
  for (std::size_t r = 0; r < n; ++r)
    out.bins[r] = static_cast<int>(std::lower_bound(out.boundaries.begin(), out.boundaries.end(), values[r]) -
                                   out.boundaries.begin());
  return out;
}

// ---------------------------------------------------------------------------
// Splits

namespace {

Split finish_split(const RepresentationSet& set, std::vector<std::size_t> train_rows,
                   std::vector<std::size_t> test_rows) {
  if (test_rows.empty()) throw Error("split leaves the test set empty");
  if (train_rows.empty()) throw Error("split leaves the train set empty");
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  RepresentationSet train = set.select_rows(train_rows);
  RepresentationSet test = set.select_rows(test_rows);
  return Split{std::move(train), std::move(test), std::move(train_rows), std::move(test_rows)};
}

}  // namespace

Split make_split(const RepresentationSet& set, const SplitSpec& spec) {
  const std::size_t n_rows = set.num_samples();
  if (const auto* rnd = std::get_if<RandomSplit>(&spec)) {
    if (!(rnd->test_fraction > 0.0 && rnd->test_fraction < 1.0))
      throw Error("test fraction must lie in (0, 1)");
    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(rnd->seed);
    rng.shuffle(order.begin(), order.end());
    auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n_rows) * rnd->test_fraction));
    std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    return finish_split(set, std::move(train), std::move(test));
  }
  const auto& ex = std::get<ExclusionSplit>(spec);
  const std::size_t n = set.num_factors();
  if (ex.factor_a >= n || ex.factor_b >= n) throw Error("excluded factor index out of range");
  if (ex.factor_a == ex.factor_b) throw Error("excluded factors must be distinct");
  if (ex.value_a < 0 || ex.value_a >= set.schema().cardinality(ex.factor_a) || ex.value_b < 0 ||
      ex.value_b >= set.schema().cardinality(ex.factor_b))
    throw Error("excluded value outside factor cardinality");
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (std::size_t r = 0; r < n_rows; ++r) {
    bool held_out = set.label(r, ex.factor_a) == ex.value_a && set.label(r, ex.factor_b) == ex.value_b;
    (held_out ? test : train).push_back(r);
  }
  return finish_split(set, std::move(train), std::move(test));
}

}  // namespace detangle
