#include "detangle/cgtask.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "detangle/error.hpp"
#include "detangle/parallel.hpp"
#include "detangle/random.hpp"

namespace detangle {

std::string CgPair::label() const {
  return std::to_string(factor_a) + ":" + std::to_string(value_a) + "," + std::to_string(factor_b) + ":" +
         std::to_string(value_b);
}

namespace {

std::size_t resolve_factor(const std::string& token, const FactorSchema& schema) {
  if (auto idx = schema.index_of(token)) return *idx;
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(token, &pos);
  } catch (const std::exception&) {
    throw Error("unknown factor '" + token + "'");
  }
  if (pos != token.size() || v >= schema.size()) throw Error("unknown factor '" + token + "'");
  return v;
}

void check_pair(const CgPair& p, const FactorSchema& schema) {
  if (p.factor_a >= schema.size() || p.factor_b >= schema.size())
    throw Error("pair " + p.label() + " names a factor out of range");
  if (p.factor_a == p.factor_b) throw Error("pair " + p.label() + " repeats a factor");
  if (p.value_a < 0 || p.value_a >= schema.cardinality(p.factor_a) || p.value_b < 0 ||
      p.value_b >= schema.cardinality(p.factor_b))
    throw Error("pair " + p.label() + " has a value outside the factor cardinality");
}

bool carries(const RepresentationSet& s, std::size_t r, const CgPair& p) {
  return s.label(r, p.factor_a) == p.value_a && s.label(r, p.factor_b) == p.value_b;
}

std::vector<int> paired_labels(const RepresentationSet& s, const CgPair& p) {
  const int kb = s.schema().cardinality(p.factor_b);
  std::vector<int> out(s.num_samples());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = s.label(r, p.factor_a) * kb + s.label(r, p.factor_b);
  return out;
}

// Chance rates come from the label distribution of the whole data.
struct ChanceRates {
  std::vector<double> factor;
  double both = 0.0;
};

ChanceRates chance_rates(const std::vector<const RepresentationSet*>& parts, const CgPair& pair) {
  const std::size_t n = parts.front()->num_factors();
  ChanceRates out;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<int> all;
    for (const auto* s : parts) {
      auto l = s->factor_labels(j);
      all.insert(all.end(), l.begin(), l.end());
    }
    out.factor.push_back(chance_rate(all));
  }
  std::vector<int> joint;
  for (const auto* s : parts) {
    auto l = paired_labels(*s, pair);
    joint.insert(joint.end(), l.begin(), l.end());
  }
  out.both = chance_rate(joint);
  return out;
}

CgScores score_split(const RepresentationSet& train, const RepresentationSet& test, const CgPair& pair, ProbeKind kind,
                     const TrainConfig& base, const ChanceRates& chance) {
  const std::size_t n = train.num_factors();
  CgScores s;
  s.factor_raw.resize(n);
  s.factor_adjusted.resize(n);
  std::vector<std::vector<int>> predictions(n);
  for (std::size_t j = 0; j < n; ++j) {
    TrainConfig cfg = base;
    cfg.seed = base.seed + j;
    const auto k = static_cast<std::size_t>(train.schema().cardinality(j));
    auto model = train_probe(train.latents(), train.factor_labels(j), kind, cfg, k);
    predictions[j].resize(test.num_samples());
    std::size_t hits = 0;
    for (std::size_t r = 0; r < test.num_samples(); ++r) {
      predictions[j][r] = model.predict(test.latents().row(r));
      if (predictions[j][r] == test.label(r, j)) ++hits;
    }
    s.factor_raw[j] = static_cast<double>(hits) / static_cast<double>(test.num_samples());
    s.factor_adjusted[j] = adjusted_accuracy(s.factor_raw[j], chance.factor[j]);
  }
  std::size_t both = 0;
  for (std::size_t r = 0; r < test.num_samples(); ++r)
    if (predictions[pair.factor_a][r] == test.label(r, pair.factor_a) &&
        predictions[pair.factor_b][r] == test.label(r, pair.factor_b))
      ++both;
  s.both_raw = static_cast<double>(both) / static_cast<double>(test.num_samples());
  s.both_adjusted = adjusted_accuracy(s.both_raw, chance.both);
  return s;
}

}  // namespace

std::vector<CgPair> parse_pairs(const std::string& text, const FactorSchema& schema) {
  std::vector<CgPair> out;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    if (group.empty()) continue;
    std::vector<std::string> sides;
    std::stringstream parts(group);
    for (std::string side; std::getline(parts, side, ',');) sides.push_back(side);
    if (sides.size() != 2) throw Error("pair '" + group + "' must look like factor:value,factor:value");
    const std::string& first = sides[0];
    const std::string& second = sides[1];
    auto parse_side = [&](const std::string& side, std::size_t& factor, int& value) {
      auto colon = side.rfind(':');
      if (colon == std::string::npos) throw Error("pair side '" + side + "' must look like factor:value");
      factor = resolve_factor(side.substr(0, colon), schema);
      try {
        std::size_t pos = 0;
        value = std::stoi(side.substr(colon + 1), &pos);
        if (pos != side.size() - colon - 1) throw Error("");
      } catch (const std::exception&) {
        throw Error("pair side '" + side + "' has a non-integer value");
      }
    };
    CgPair p;
    parse_side(first, p.factor_a, p.value_a);
    parse_side(second, p.factor_b, p.value_b);
    check_pair(p, schema);
    out.push_back(p);
  }
  if (out.empty()) throw Error("no pairs given");
  return out;
}

std::vector<CgPair> sample_pairs(const FactorSchema& schema, std::size_t factor_a, std::size_t factor_b,
                                 std::size_t count, std::uint64_t seed) {
  CgPair probe{factor_a, 0, factor_b, 0};
  check_pair(probe, schema);
  const auto ka = static_cast<std::size_t>(schema.cardinality(factor_a));
  const auto kb = static_cast<std::size_t>(schema.cardinality(factor_b));
  if (count > ka * kb) throw Error("cannot sample more pairs than value combinations");
  std::vector<std::size_t> cells(ka * kb);
  for (std::size_t c = 0; c < cells.size(); ++c) cells[c] = c;
  Rng rng(seed);
  rng.shuffle(cells.begin(), cells.end());
  std::vector<CgPair> out;
  for (std::size_t c = 0; c < count; ++c)
    out.push_back({factor_a, static_cast<int>(cells[c] / kb), factor_b, static_cast<int>(cells[c] % kb)});
  return out;
}

std::size_t audit_exclusion(const RepresentationSet& train, const RepresentationSet& test, const CgPair& pair) {
  std::set<std::size_t> test_ids(test.row_ids().begin(), test.row_ids().end());
  std::size_t leaked = 0;
  for (std::size_t r = 0; r < train.num_samples(); ++r)
    if (carries(train, r, pair) || test_ids.count(train.row_ids()[r]) != 0) ++leaked;
  return leaked;
}

CgRunResult run_cg(const RepresentationSet& set, const CgPair& pair, ProbeKind kind, const CgOptions& options) {
  check_pair(pair, set.schema());
  Split split = [&] {
    try {
      return make_split(set, pair.split());
    } catch (const Error& e) {
      throw Error("pair " + pair.label() + ": " + e.what());
    }
  }();
  const ChanceRates chance = chance_rates({&set}, pair);

  CgRunResult out;
  out.pair = pair;
  out.kind = kind;
  out.train_rows = split.train.num_samples();
  out.test_rows = split.test.num_samples();
  out.leaked_rows = audit_exclusion(split.train, split.test, pair);
  out.novel = score_split(split.train, split.test, pair, kind, options.train, chance);
  if (options.control) {
    double fraction = static_cast<double>(out.test_rows) / static_cast<double>(set.num_samples());
    // floor(N * fraction) must not round below the held-out size.
    fraction = std::min(0.999999, fraction + 0.5 / static_cast<double>(set.num_samples()));
    Split random = make_split(set, RandomSplit{fraction, options.control_seed});
    out.control = score_split(random.train, random.test, pair, kind, options.train, chance);
  }
  return out;
}

CgRunResult run_cg_external(const RepresentationSet& train, const RepresentationSet& test, const CgPair& pair,
                            ProbeKind kind, const CgOptions& options) {
  check_pair(pair, train.schema());
  if (!(train.schema() == test.schema())) throw Error("train and test schemas differ");
  if (train.num_neurons() != test.num_neurons()) throw Error("train and test latent widths differ");
  std::vector<std::size_t> held;
  for (std::size_t r = 0; r < test.num_samples(); ++r)
    if (carries(test, r, pair)) held.push_back(r);
  if (held.empty()) throw Error("pair " + pair.label() + ": test set has no rows with the held-out combination");
  RepresentationSet novel = test.select_rows(held);
  const ChanceRates chance = chance_rates({&train, &test}, pair);

  CgRunResult out;
  out.pair = pair;
  out.kind = kind;
  out.train_rows = train.num_samples();
  out.test_rows = novel.num_samples();
  std::size_t leaked = 0;
  for (std::size_t r = 0; r < train.num_samples(); ++r)
    if (carries(train, r, pair)) ++leaked;
  out.leaked_rows = leaked;
  if (leaked > 0) warn("training encodings contain " + std::to_string(leaked) + " rows with the held-out combination");
  out.novel = score_split(train, novel, pair, kind, options.train, chance);
  if (options.control) {
    std::vector<std::size_t> rest;
    for (std::size_t r = 0; r < test.num_samples(); ++r)
      if (!carries(test, r, pair)) rest.push_back(r);
    if (!rest.empty()) out.control = score_split(train, test.select_rows(rest), pair, kind, options.train, chance);
  }
  return out;
}

namespace {

// Runs are pair-major with kinds in input order.
std::vector<CgAverages> average_runs(const std::vector<CgRunResult>& runs, std::size_t num_pairs,
                                     const std::vector<ProbeKind>& kinds, std::size_t n) {
  std::vector<CgAverages> result;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    CgAverages avg;
    avg.kind = kinds[k];
    avg.factor_adjusted.assign(n, 0.0);
    std::vector<double> control_factor(n, 0.0);
    double control_both = 0.0;
    bool have_control = true;
    for (std::size_t p = 0; p < num_pairs; ++p) {
      const auto& run = runs[p * kinds.size() + k];
      for (std::size_t j = 0; j < n; ++j) avg.factor_adjusted[j] += run.novel.factor_adjusted[j];
      avg.both_adjusted += run.novel.both_adjusted;
      if (run.control) {
        for (std::size_t j = 0; j < n; ++j) control_factor[j] += run.control->factor_adjusted[j];
        control_both += run.control->both_adjusted;
      } else {
        have_control = false;
      }
    }
    const auto count = static_cast<double>(num_pairs);
    for (double& v : avg.factor_adjusted) v /= count;
    avg.both_adjusted /= count;
    if (have_control) {
      for (double& v : control_factor) v /= count;
      avg.control_factor_adjusted = control_factor;
      avg.control_both_adjusted = control_both / count;
    }
    result.push_back(std::move(avg));
  }
  return result;
}

}  // namespace

CgSuiteResult run_cg_suite(const RepresentationSet& set, const std::vector<CgPair>& pairs,
                           const std::vector<ProbeKind>& kinds, const CgOptions& options) {
  if (pairs.empty()) throw Error("CG suite needs at least one pair");
  if (kinds.empty()) throw Error("CG suite needs at least one probe kind");
  for (const auto& p : pairs) {
    check_pair(p, set.schema());
    std::size_t held = 0;
    for (std::size_t r = 0; r < set.num_samples(); ++r)
      if (carries(set, r, p)) ++held;
    if (held == 0) throw Error("pair " + p.label() + ": no rows carry the held-out combination");
    if (held == set.num_samples()) throw Error("pair " + p.label() + ": every row carries the held-out combination");
  }

  CgSuiteResult out;
  out.runs.resize(pairs.size() * kinds.size());
  parallel_for(out.runs.size(), [&](std::size_t idx) {
    out.runs[idx] = run_cg(set, pairs[idx / kinds.size()], kinds[idx % kinds.size()], options);
  });

  out.averages = average_runs(out.runs, pairs.size(), kinds, set.num_factors());
  return out;
}

CgSuiteResult run_cg_external_suite(const RepresentationSet& train, const RepresentationSet& test,
                                    const std::vector<CgPair>& pairs, const std::vector<ProbeKind>& kinds,
                                    const CgOptions& options) {
  if (pairs.empty()) throw Error("CG suite needs at least one pair");
  if (kinds.empty()) throw Error("CG suite needs at least one probe kind");
  for (const auto& p : pairs) check_pair(p, train.schema());
  CgSuiteResult out;
  out.runs.resize(pairs.size() * kinds.size());
  parallel_for(out.runs.size(), [&](std::size_t idx) {
    const CgPair& pair = pairs[idx / kinds.size()];
    try {
      out.runs[idx] = run_cg_external(train, test, pair, kinds[idx % kinds.size()], options);
    } catch (const Error& e) {
      const std::string what = e.what();
      if (what.rfind("pair ", 0) == 0) throw;
      throw Error("pair " + pair.label() + ": " + what);
    }
  });
  out.averages = average_runs(out.runs, pairs.size(), kinds, train.num_factors());
  return out;
}

}  // namespace detangle
