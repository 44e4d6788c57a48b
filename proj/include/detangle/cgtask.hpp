#pragma once

// Compositional-generalization harness: hold out one combination of two
// factor values, train probes on the remaining encodings, and score how well
// the held-out combination is recognized.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "detangle/classify.hpp"
#include "detangle/dataset.hpp"

namespace detangle {

struct CgPair {
  std::size_t factor_a = 0;
  int value_a = 0;
  std::size_t factor_b = 1;
  int value_b = 0;

  std::string label() const;
  ExclusionSplit split() const { return {factor_a, value_a, factor_b, value_b}; }
  bool operator==(const CgPair&) const = default;
};

// Parses "a:va,b:vb;c:vc,d:vd". Factors may be given by name or index.
std::vector<CgPair> parse_pairs(const std::string& text, const FactorSchema& schema);

// `count` distinct value combinations for the two factors, drawn from `seed`.
std::vector<CgPair> sample_pairs(const FactorSchema& schema, std::size_t factor_a, std::size_t factor_b,
                                 std::size_t count, std::uint64_t seed);

struct CgScores {
  std::vector<double> factor_raw;       // per factor, test-set accuracy
  std::vector<double> factor_adjusted;  // chance-adjusted with full-data rates
  double both_raw = 0.0;       // both excluded factors right at once
  double both_adjusted = 0.0;  // adjusted with the chance rate of the paired label
};

struct CgRunResult {
  CgPair pair;
  ProbeKind kind = ProbeKind::kMlp;
  CgScores novel;
  // Same probes trained and tested on a random split of matching size.
  std::optional<CgScores> control;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  // Training rows that carry the held-out combination or share a row id with
  // the test set. Always 0 for splits made here.
  std::size_t leaked_rows = 0;
};

struct CgOptions {
  TrainConfig train;
  bool control = true;
  std::uint64_t control_seed = 0;
};

CgRunResult run_cg(const RepresentationSet& set, const CgPair& pair, ProbeKind kind, const CgOptions& options);

// Externally encoded train/test sets. Probes train on all of `train` and are
// scored on the rows of `test` that carry the pair's combination.
CgRunResult run_cg_external(const RepresentationSet& train, const RepresentationSet& test, const CgPair& pair,
                            ProbeKind kind, const CgOptions& options);

std::size_t audit_exclusion(const RepresentationSet& train, const RepresentationSet& test, const CgPair& pair);

struct CgAverages {
  ProbeKind kind = ProbeKind::kMlp;
  std::vector<double> factor_adjusted;
  double both_adjusted = 0.0;
  std::optional<std::vector<double>> control_factor_adjusted;
  std::optional<double> control_both_adjusted;
};

struct CgSuiteResult {
  std::vector<CgRunResult> runs;  // pair-major, kinds in input order
  std::vector<CgAverages> averages;  // one per probe kind
};

// Every pair is checked before any probe trains; a pair whose split would
// leave train or test empty fails the whole suite.
CgSuiteResult run_cg_suite(const RepresentationSet& set, const std::vector<CgPair>& pairs,
                           const std::vector<ProbeKind>& kinds, const CgOptions& options);

// run_cg_external over every pair and probe kind. The control scores the
// test rows outside each held-out combination.
CgSuiteResult run_cg_external_suite(const RepresentationSet& train, const RepresentationSet& test,
                                    const std::vector<CgPair>& pairs, const std::vector<ProbeKind>& kinds,
                                    const CgOptions& options);

}  // namespace detangle
