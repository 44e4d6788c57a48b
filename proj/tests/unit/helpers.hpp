#pragma once

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "detangle/dataset.hpp"

namespace testing {

inline detangle::RepresentationSet make_set(std::size_t m, const std::vector<double>& latents,
                                            const std::vector<int>& labels, const std::vector<int>& cards) {
  detangle::Matrix z(latents.size() / m, m);
  z.data = latents;
  return detangle::RepresentationSet(std::move(z), labels, detangle::FactorSchema::from_cardinalities(cards));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("detangle_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace testing
