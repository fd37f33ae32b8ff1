#include <algorithm>
#include <vector>

#include "unhaze/errors.hpp"
#include "unhaze/imaging.hpp"

namespace unhaze::imaging {

Grid dark_channel(const Image& img, std::size_t patch_radius) {
  if (img.empty()) throw InvalidInput("dark channel of an empty image");
  const std::size_t h = img.height();
  const std::size_t w = img.width();

  Grid channel_min(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      channel_min(y, x) = std::min({img(y, x, 0), img(y, x, 1), img(y, x, 2)});
    }
  }

  // A rectangular min filter separates into a row pass and a column pass.
  Grid rows(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t lo = x > patch_radius ? x - patch_radius : 0;
      const std::size_t hi = std::min(w - 1, x + patch_radius);
      double m = channel_min(y, lo);
      for (std::size_t k = lo + 1; k <= hi; ++k) m = std::min(m, channel_min(y, k));
      rows(y, x) = m;
    }
  }
  Grid out(h, w);
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t lo = y > patch_radius ? y - patch_radius : 0;
    const std::size_t hi = std::min(h - 1, y + patch_radius);
    for (std::size_t x = 0; x < w; ++x) {
      double m = rows(lo, x);
      for (std::size_t k = lo + 1; k <= hi; ++k) m = std::min(m, rows(k, x));
      out(y, x) = m;
    }
  }
  return out;
}

}  // namespace unhaze::imaging
