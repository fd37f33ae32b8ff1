#pragma once

// Haze synthesis, dark channel prior, procedural scenes and image files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "unhaze/image.hpp"

namespace unhaze::imaging {

/// Atmospheric scattering: I(x,c) = J(x,c) t(x) + A_c (1 - t(x)).
Image synthesize_haze(const HazeScene& scene);

/// Beer-Lambert transmission t = exp(-beta * depth).
TransmissionMap transmission_from_depth(const Grid& depth, double beta);

/// Per-pixel minimum over channels and over the (2r+1)^2 window centred on
/// the pixel. The window is clipped at the image border.
Grid dark_channel(const Image& img, std::size_t patch_radius);

// ---------------------------------------------------------------------------
// Procedural scenes

/// Parameter ranges for synthetic haze.
struct SceneRanges {
  double airlight_min = 0.7;
  double airlight_max = 1.0;
  double beta_min = 0.6;
  double beta_max = 1.8;
};

/// A fully specified synthetic sample: the scene plus the scalars that
/// produced it.
struct SyntheticSample {
  HazeScene scene;
  Grid depth;
  double beta = 0.0;
  Image hazy;
};

/// Clean image of random saturated shapes over a sky/ground gradient.
Image random_clean_image(std::size_t height, std::size_t width, std::uint64_t seed);

/// Smooth depth in [0, ~1.3]: low-frequency noise plus a vertical ramp
/// (far at the top, near at the bottom).
Grid random_depth_field(std::size_t height, std::size_t width, std::uint64_t seed);

SyntheticSample random_sample(std::size_t height, std::size_t width, std::uint64_t seed,
                              const SceneRanges& ranges = {});

// ---------------------------------------------------------------------------
// Unpaired data

/// Two independent pools of images. Index i on one side has no relation to
/// index i on the other.
class UnpairedDataset {
 public:
  UnpairedDataset(std::vector<Image> hazy, std::vector<Image> clean);

  /// Loads every readable image file in each directory (sorted by name).
  static UnpairedDataset from_directories(const std::filesystem::path& hazy_dir,
                                          const std::filesystem::path& clean_dir);

  const std::vector<Image>& hazy() const noexcept { return hazy_; }
  const std::vector<Image>& clean() const noexcept { return clean_; }
  std::size_t min_side() const noexcept { return min_side_; }

 private:
  std::vector<Image> hazy_;
  std::vector<Image> clean_;
  std::size_t min_side_ = 0;
};

struct UnpairedBatch {
  Image hazy;
  Image clean;
};

/// Draws one hazy and one clean image independently and crops each at an
/// independent random offset. Deterministic in `seed`.
UnpairedBatch sample_unpaired_batch(const UnpairedDataset& ds, std::size_t crop, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Files

/// Reads PNG or JPEG into [0,1]. Grayscale is expanded to three channels and
/// alpha is dropped.
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG (values rounded to the nearest k/255).
void save_image(const Image& img, const std::filesystem::path& path);

/// Sorted list of files in `dir` with an image extension (.png .jpg .jpeg).
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace unhaze::imaging
