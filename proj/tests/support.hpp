#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "unhaze/image.hpp"

namespace testing {

inline unhaze::Image random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  unhaze::Image img(h, w);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("unhaze_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
