#include "detangle/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "detangle/error.hpp"
#include "detangle/random.hpp"

namespace detangle {

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kTable1A: return "table1_a";
    case GeneratorKind::kTable1B: return "table1_b";
    case GeneratorKind::kXor: return "xor";
    case GeneratorKind::kRedundantXor: return "redundant_xor";
    case GeneratorKind::kIdeal: return "ideal";
    case GeneratorKind::kRotated: return "rotated";
    case GeneratorKind::kJointCode: return "joint_code";
    case GeneratorKind::kNoise: return "noise";
  }
  return "unknown";
}

GeneratorKind parse_generator_kind(const std::string& name) {
  for (auto k : {GeneratorKind::kTable1A, GeneratorKind::kTable1B, GeneratorKind::kXor, GeneratorKind::kRedundantXor,
                 GeneratorKind::kIdeal, GeneratorKind::kRotated, GeneratorKind::kJointCode, GeneratorKind::kNoise})
    if (name == to_string(k)) return k;
  throw Error("unknown generator kind '" + name + "'");
}

std::size_t grid_size(std::span<const int> cardinalities, std::size_t copies, std::size_t cap) {
  if (copies < 1) throw Error("copies must be at least 1");
  std::size_t rows = copies;
  for (int k : cardinalities) {
    if (k < 1) throw Error("cardinalities must be positive");
    const auto uk = static_cast<std::size_t>(k);
    if (rows > std::numeric_limits<std::size_t>::max() / uk) throw Error("factor grid size overflows");
    rows *= uk;
  }
  if (rows > cap) throw Error("factor grid of " + std::to_string(rows) + " rows exceeds cap of " + std::to_string(cap));
  return rows;
}

std::vector<int> factor_grid(std::span<const int> cardinalities, std::size_t copies, std::size_t cap) {
  const std::size_t rows = grid_size(cardinalities, copies, cap);
  const std::size_t n = cardinalities.size();
  std::vector<int> out(rows * n);
  std::vector<int> digits(n, 0);
  std::size_t r = 0;
  while (r < rows) {
    for (std::size_t c = 0; c < copies; ++c, ++r)
      for (std::size_t j = 0; j < n; ++j) out[r * n + j] = digits[j];
    for (std::size_t j = n; j-- > 0;) {
      if (++digits[j] < cardinalities[j]) break;
      digits[j] = 0;
    }
  }
  return out;
}

namespace {

std::vector<int> default_cardinalities(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kTable1A:
    case GeneratorKind::kTable1B:
    case GeneratorKind::kRotated: return {2, 2};
    case GeneratorKind::kXor:
    case GeneratorKind::kRedundantXor: return {2};
    default: return {3, 2};
  }
}

struct Builder {
  std::size_t m;
  std::size_t n;
  std::vector<double> latents;
  std::vector<int> labels;

  void add(std::span<const double> z, std::span<const int> g, std::size_t times = 1) {
    for (std::size_t t = 0; t < times; ++t) {
      latents.insert(latents.end(), z.begin(), z.end());
      labels.insert(labels.end(), g.begin(), g.end());
    }
  }

  RepresentationSet finish(FactorSchema schema) {
    Matrix lat;
    lat.rows = labels.size() / n;
    lat.cols = m;
    lat.data = std::move(latents);
    return RepresentationSet(std::move(lat), std::move(labels), std::move(schema));
  }
};

// Table-1 neuron: 0 on blue square, 1 on yellow circle, the coin elsewhere.
double table1_z1(int colour, int shape, int coin) {
  if (colour == 0 && shape == 0) return 0.0;
  if (colour == 1 && shape == 1) return 1.0;
  return static_cast<double>(coin);
}

RepresentationSet generate_table1(const GeneratorSpec& spec, bool variant_b) {
  FactorSchema schema({{"colour", 2}, {"shape", 2}});
  Builder b{2 + spec.extra_neurons, 2, {}, {}};
  Rng rng(spec.seed);
  auto emit = [&](double z1, double z2, int colour, int shape, std::size_t times) {
    std::vector<double> z{z1, z2};
    for (std::size_t e = 0; e < spec.extra_neurons; ++e) z.push_back(rng.normal());
    const int g[2] = {colour, shape};
    b.add(z, g, times);
  };
  for (int colour = 0; colour < 2; ++colour)
    for (int shape = 0; shape < 2; ++shape) {
      if (spec.exact_population) {
        for (int coin = 0; coin < 2; ++coin) {
          const double z1 = table1_z1(colour, shape, coin);
          if (!variant_b) {
            // z2 ranges over both values for each z1 outcome, so it is
            // independent of z1 as well as of the factors.
            for (int z2 = 0; z2 < 2; ++z2) emit(z1, static_cast<double>(z2), colour, shape, spec.copies);
          } else {
            // 7 of every 10 rows carry z2 == shape.
            for (int t = 0; t < 10; ++t)
              emit(z1, static_cast<double>(t < 7 ? shape : 1 - shape), colour, shape, spec.copies);
          }
        }
      } else {
        for (std::size_t c = 0; c < spec.copies; ++c) {
          const double z1 = table1_z1(colour, shape, rng.coin() ? 1 : 0);
          double z2 = variant_b ? static_cast<double>(rng.uniform() < 0.7 ? shape : 1 - shape)
                                : static_cast<double>(rng.coin() ? 1 : 0);
          emit(z1, z2, colour, shape, 1);
        }
      }
    }
  return b.finish(std::move(schema));
}

RepresentationSet generate_xor(const GeneratorSpec& spec, bool redundant) {
  FactorSchema schema({{"g0", 2}});
  const std::size_t base = redundant ? 3 : 2;
  Builder b{base + spec.extra_neurons, 1, {}, {}};
  Rng rng(spec.seed);
  auto emit = [&](int g0, int z1, std::size_t times) {
    std::vector<double> z;
    if (redundant) z.push_back(static_cast<double>(g0));
    z.push_back(static_cast<double>(z1));
    z.push_back(static_cast<double>(g0 ^ z1));
    for (std::size_t e = 0; e < spec.extra_neurons; ++e) z.push_back(rng.normal());
    b.add(z, std::span<const int>(&g0, 1), times);
  };
  for (int g0 = 0; g0 < 2; ++g0) {
    if (spec.exact_population) {
      for (int z1 = 0; z1 < 2; ++z1) emit(g0, z1, spec.copies);
    } else {
      for (std::size_t c = 0; c < spec.copies; ++c) emit(g0, rng.coin() ? 1 : 0, 1);
    }
  }
  return b.finish(std::move(schema));
}

RepresentationSet generate_grid_kind(const GeneratorSpec& spec, const std::vector<int>& cards) {
  const std::size_t n = cards.size();
  FactorSchema schema = FactorSchema::from_cardinalities(cards);
  const std::vector<int> grid = factor_grid(cards, spec.copies);
  const std::size_t rows = grid.size() / n;
  const std::size_t m = n + spec.extra_neurons;
  Rng rng(spec.seed);
  Matrix lat(rows, m);

  std::size_t cells = 1;
  for (int k : cards) cells *= static_cast<std::size_t>(k);
  const double cos_a = std::cos(spec.angle);
  const double sin_a = std::sin(spec.angle);

  for (std::size_t r = 0; r < rows; ++r) {
    const int* g = grid.data() + r * n;
    switch (spec.kind) {
      case GeneratorKind::kIdeal:
      case GeneratorKind::kRotated:
        for (std::size_t j = 0; j < n; ++j) lat(r, j) = static_cast<double>(g[j]) + spec.noise_sigma * rng.normal();
        if (spec.kind == GeneratorKind::kRotated) {
          const double a = lat(r, 0);
          const double c = lat(r, 1);
          lat(r, 0) = cos_a * a - sin_a * c;
          lat(r, 1) = sin_a * a + cos_a * c;
        }
        break;
      case GeneratorKind::kJointCode: {
        std::size_t index = 0;
        for (std::size_t j = 0; j < n; ++j) index = index * static_cast<std::size_t>(cards[j]) + static_cast<std::size_t>(g[j]);
        lat(r, 0) = cells > 1 ? static_cast<double>(index) / static_cast<double>(cells - 1) : 0.0;
        for (std::size_t j = 1; j < n; ++j) lat(r, j) = rng.normal();
        break;
      }
      case GeneratorKind::kNoise:
        for (std::size_t j = 0; j < n; ++j) lat(r, j) = rng.normal();
        break;
      default: throw Error("internal: not a grid generator");
    }
    for (std::size_t e = 0; e < spec.extra_neurons; ++e) lat(r, n + e) = rng.normal();
  }
  return RepresentationSet(std::move(lat), grid, std::move(schema));
}

}  // namespace

RepresentationSet generate(const GeneratorSpec& spec) {
  std::vector<int> cards = spec.cardinalities.empty() ? default_cardinalities(spec.kind) : spec.cardinalities;
  if (spec.copies < 1) throw Error("copies must be at least 1");
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) throw Error("noise sigma must be finite and >= 0");
  switch (spec.kind) {
    case GeneratorKind::kTable1A:
    case GeneratorKind::kTable1B:
      if (cards != std::vector<int>{2, 2})
        throw Error(std::string(to_string(spec.kind)) + " requires two binary factors (colour, shape)");
      return generate_table1(spec, spec.kind == GeneratorKind::kTable1B);
    case GeneratorKind::kXor:
    case GeneratorKind::kRedundantXor:
      if (cards != std::vector<int>{2})
        throw Error(std::string(to_string(spec.kind)) + " requires a single binary factor");
      return generate_xor(spec, spec.kind == GeneratorKind::kRedundantXor);
    case GeneratorKind::kRotated:
      if (cards.size() != 2) throw Error("rotated generator requires exactly two factors");
      if (!(spec.angle >= 0.0 && spec.angle < 2.0 * std::numbers::pi)) throw Error("angle must lie in [0, 2*pi)");
      return generate_grid_kind(spec, cards);
    case GeneratorKind::kIdeal:
    case GeneratorKind::kJointCode:
    case GeneratorKind::kNoise:
      if (cards.empty()) throw Error("generator needs at least one factor");
      return generate_grid_kind(spec, cards);
  }
  throw Error("unknown generator kind");
}

}  // namespace detangle
