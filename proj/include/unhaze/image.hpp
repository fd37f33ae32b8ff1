#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace unhaze {

/// H x W x 3 intensity grid, interleaved (HWC) storage, values in [0,1].
///
/// The [0,1] range is the external convention used for files, metrics and
/// haze synthesis. Networks consume the [-1,1] convention; see
/// networks::to_network_tensor.
class Image {
 public:
  static constexpr std::size_t kChannels = 3;

  Image() = default;
  Image(std::size_t height, std::size_t width, double fill = 0.0);
  /// Takes ownership of HWC data. Throws InvalidInput on size mismatch or
  /// values outside [0,1].
  Image(std::size_t height, std::size_t width, std::vector<double> hwc);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return height_ * width_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t y, std::size_t x, std::size_t c) { return data_[(y * width_ + x) * kChannels + c]; }
  double operator()(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * width_ + x) * kChannels + c];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  /// Sub-image starting at (top, left).
  Image crop(std::size_t top, std::size_t left, std::size_t height, std::size_t width) const;

  /// Clamps every value into [0,1] in place.
  void clamp();

  bool operator==(const Image&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Single-channel H x W grid of reals. Used for transmission maps, depth
/// fields and dark channels.
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, double fill = 0.0)
      : height_(height), width_(width), data_(height * width, fill) {}

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  double& operator()(std::size_t y, std::size_t x) { return data_[y * width_ + x]; }
  double operator()(std::size_t y, std::size_t x) const { return data_[y * width_ + x]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Per-pixel transmission t(x) in [0,1].
struct TransmissionMap {
  Grid values;
};

using Airlight = std::array<double, 3>;

/// Ground truth for one synthetic hazy observation.
struct HazeScene {
  Image clean;
  TransmissionMap transmission;
  Airlight airlight{1.0, 1.0, 1.0};
};

}  // namespace unhaze
