#pragma once

// Deterministic generators of factor grids and synthetic encoders with known
// ground truth.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "detangle/dataset.hpp"

namespace detangle {

enum class GeneratorKind {
  kTable1A,       // z1 codes colour and shape at 75%, z2 is a fair coin
  kTable1B,       // z1 as above, z2 agrees with shape 70% of the time
  kXor,           // g0 = z0 xor z1, each neuron alone uninformative
  kRedundantXor,  // z0 = g0 plus the xor pair
  kIdeal,         // z_j = g_j + noise
  kRotated,       // ideal over two factors, latent plane rotated
  kJointCode,     // one neuron enumerates the factor tuple
  kNoise,         // latents independent of the factors
};

const char* to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(const std::string& name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::kIdeal;
  // Factor cardinalities; empty selects the kind's default ((2,2) for the
  // table and rotated kinds, (2) for the xor kinds, (3,2) otherwise).
  std::vector<int> cardinalities;
  // Rows per grid cell (sampled mode) or repetitions of the exact outcome
  // list (exact mode).
  std::size_t copies = 1;
  // Table and xor kinds: enumerate every outcome with exact multiplicity
  // instead of drawing coins. The continuous kinds always lay out the factor
  // grid and draw their noise from `seed`.
  bool exact_population = true;
  double noise_sigma = 0.1;
  double angle = 0.0;  // radians in [0, 2*pi), rotated kind only
  std::size_t extra_neurons = 0;  // additional pure-noise neurons
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultGridCap = 10'000'000;

// Rows produced by factor_grid; throws on overflow or when above `cap`.
std::size_t grid_size(std::span<const int> cardinalities, std::size_t copies, std::size_t cap = kDefaultGridCap);

// N x n label table: every combination `copies` times, lexicographic order
// (last factor varies fastest).
std::vector<int> factor_grid(std::span<const int> cardinalities, std::size_t copies,
                             std::size_t cap = kDefaultGridCap);

RepresentationSet generate(const GeneratorSpec& spec);

}  // namespace detangle
