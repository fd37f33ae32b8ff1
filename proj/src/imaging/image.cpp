#include "unhaze/image.hpp"

#include <algorithm>
#include <string>

#include "unhaze/errors.hpp"

namespace unhaze {

Image::Image(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width * kChannels, fill) {
  if (height == 0 || width == 0) throw InvalidInput("image dimensions must be positive");
  if (!(fill >= 0.0 && fill <= 1.0)) throw InvalidInput("image fill value outside [0,1]");
}

Image::Image(std::size_t height, std::size_t width, std::vector<double> hwc)
    : height_(height), width_(width), data_(std::move(hwc)) {
  if (height == 0 || width == 0) throw InvalidInput("image dimensions must be positive");
  if (data_.size() != height * width * kChannels) {
    throw InvalidInput("image buffer holds " + std::to_string(data_.size()) + " values, expected " +
                       std::to_string(height * width * kChannels));
  }
  for (double v : data_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("image value outside [0,1]: " + std::to_string(v));
  }
}

Image Image::crop(std::size_t top, std::size_t left, std::size_t height, std::size_t width) const {
  if (height == 0 || width == 0 || top + height > height_ || left + width > width_) {
    throw InvalidInput("crop window exceeds image bounds");
  }
  std::vector<double> out;
  out.reserve(height * width * kChannels);
  for (std::size_t y = top; y < top + height; ++y) {
    auto row = data_.begin() + static_cast<std::ptrdiff_t>((y * width_ + left) * kChannels);
    out.insert(out.end(), row, row + static_cast<std::ptrdiff_t>(width * kChannels));
  }
  return Image(height, width, std::move(out));
}

void Image::clamp() {
  for (double& v : data_) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace unhaze
