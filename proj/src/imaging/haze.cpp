#include <cmath>

#include "unhaze/errors.hpp"
#include "unhaze/imaging.hpp"

namespace unhaze::imaging {

Image synthesize_haze(const HazeScene& scene) {
  const Image& clean = scene.clean;
  const Grid& t = scene.transmission.values;
  if (clean.empty()) throw InvalidInput("haze synthesis needs a non-empty clean image");
  if (t.height() != clean.height() || t.width() != clean.width()) {
    throw InvalidInput("transmission map and clean image differ in size");
  }
  for (double a : scene.airlight) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidInput("airlight component outside [0,1]");
  }
  for (double v : t.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("transmission value outside [0,1]");
  }

  Image out(clean.height(), clean.width());
  for (std::size_t y = 0; y < clean.height(); ++y) {
    for (std::size_t x = 0; x < clean.width(); ++x) {
      const double tx = t(y, x);
      for (std::size_t c = 0; c < Image::kChannels; ++c) {
        out(y, x, c) = clean(y, x, c) * tx + scene.airlight[c] * (1.0 - tx);
      }
    }
  }
  // A convex combination of [0,1] values; clamp only absorbs rounding.
  out.clamp();
  return out;
}

TransmissionMap transmission_from_depth(const Grid& depth, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput("scattering coefficient must be >= 0");
  TransmissionMap t{Grid(depth.height(), depth.width())};
  auto src = depth.values();
  auto dst = t.values.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!(src[i] >= 0.0) || !std::isfinite(src[i])) throw InvalidInput("depth must be finite and >= 0");
    dst[i] = std::exp(-beta * src[i]);
  }
  return t;
}

}  // namespace unhaze::imaging
