#pragma once

// Factor -> neuron alignments built from an importance matrix, and Hinton
// diagram rendering.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "detangle/infotheory.hpp"

namespace detangle {

enum class AlignmentMode { kGreedy, kInjective };

const char* to_string(AlignmentMode mode);
AlignmentMode parse_alignment_mode(const std::string& name);

struct Alignment {
  // assignment[j] = neuron aligned to factor j.
  std::vector<std::size_t> assignment;
  AlignmentMode mode = AlignmentMode::kInjective;
  // Sum over factors of importance[j, assignment[j]].
  double objective = 0.0;
  // Set when every importance entry is zero.
  bool degenerate = false;
};

// Per-factor argmax, lowest neuron index on ties. Several factors may land
// on the same neuron.
Alignment greedy_alignment(const ImportanceMatrix& imp);

// Maximizes total importance over injective factor -> neuron maps, breaking
// ties toward the lexicographically smallest assignment. An all-zero matrix
// yields the identity prefix, flagged degenerate.
Alignment injective_alignment(const ImportanceMatrix& imp);

Alignment align(const ImportanceMatrix& imp, AlignmentMode mode);

// Square side proportional to importance / max entry; aligned cells are
// outlined. Output is byte-identical for identical inputs.
std::string hinton_svg(const ImportanceMatrix& imp, const Alignment& alignment,
                       const std::vector<std::string>& factor_names = {});

// One row per factor, one 8-character cell per neuron filled with
// round(8 * value / max) '#'; aligned cells are bracketed.
std::string hinton_text(const ImportanceMatrix& imp, const Alignment& alignment,
                        const std::vector<std::string>& factor_names = {});

void export_hinton(const ImportanceMatrix& imp, const Alignment& alignment, const std::filesystem::path& path,
                   const std::vector<std::string>& factor_names = {});

}  // namespace detangle
