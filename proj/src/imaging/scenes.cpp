#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "unhaze/errors.hpp"
#include "unhaze/imaging.hpp"
#include "unhaze/seeding.hpp"

namespace unhaze::imaging {
namespace {

using Rgb = std::array<double, 3>;

Rgb hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(h, 1.0) * 6.0;
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

// Bilinearly upsampled coarse uniform noise in [0,1].
Grid smooth_noise(std::size_t height, std::size_t width, std::size_t cells, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = cells + 1;
  std::vector<double> knots(n * n);
  for (double& k : knots) k = u(rng);

  Grid out(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = height > 1 ? static_cast<double>(y) / static_cast<double>(height - 1) * cells : 0.0;
    const std::size_t y0 = std::min(static_cast<std::size_t>(fy), cells - 1);
    const double ty = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = width > 1 ? static_cast<double>(x) / static_cast<double>(width - 1) * cells : 0.0;
      const std::size_t x0 = std::min(static_cast<std::size_t>(fx), cells - 1);
      const double tx = fx - static_cast<double>(x0);
      const double a = knots[y0 * n + x0];
      const double b = knots[y0 * n + x0 + 1];
      const double c = knots[(y0 + 1) * n + x0];
      const double d = knots[(y0 + 1) * n + x0 + 1];
      out(y, x) = (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
    }
  }
  return out;
}

}  // namespace

Image random_clean_image(std::size_t height, std::size_t width, std::uint64_t seed) {
  if (height == 0 || width == 0) throw InvalidInput("scene dimensions must be positive");
  std::mt19937_64 rng(mix_seed(seed, 0x5CE7E));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double H = static_cast<double>(height);
  const double W = static_cast<double>(width);

  Image img(height, width);
  const Rgb sky = hsv_to_rgb(0.5 + 0.15 * u(rng), 0.15 + 0.4 * u(rng), 0.65 + 0.3 * u(rng));
  const Rgb ground = hsv_to_rgb(u(rng), 0.4 + 0.5 * u(rng), 0.2 + 0.5 * u(rng));
  const double horizon = (0.25 + 0.35 * u(rng)) * H;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double yy = static_cast<double>(y);
      const Rgb& base = yy < horizon ? sky : ground;
      // Sky brightens toward the horizon, ground darkens toward the viewer.
      const double shade = yy < horizon ? 0.85 + 0.15 * yy / std::max(horizon, 1.0)
                                        : 1.0 - 0.35 * (yy - horizon) / std::max(H - horizon, 1.0);
      for (std::size_t c = 0; c < 3; ++c) img(y, x, c) = base[c] * shade;
    }
  }

  std::uniform_int_distribution<int> shape_count(5, 12);
  const int shapes = shape_count(rng);
  for (int s = 0; s < shapes; ++s) {
    const Rgb color = hsv_to_rgb(u(rng), 0.45 + 0.55 * u(rng), 0.1 + 0.8 * u(rng));
    const bool ellipse = u(rng) < 0.5;
    const double cy = horizon * 0.6 + u(rng) * (H - horizon * 0.6);
    const double cx = u(rng) * W;
    const double ry = (0.05 + 0.2 * u(rng)) * H;
    const double rx = (0.05 + 0.2 * u(rng)) * W;
    const double light = 0.5 + 0.5 * u(rng);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const double dy = (static_cast<double>(y) - cy) / ry;
        const double dx = (static_cast<double>(x) - cx) / rx;
        const bool inside = ellipse ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (!inside) continue;
        // Directional shading across the shape.
        const double shade = light + (1.0 - light) * 0.5 * (1.0 - dx);
        for (std::size_t c = 0; c < 3; ++c) img(y, x, c) = color[c] * std::clamp(shade, 0.0, 1.0);
      }
    }
  }

  const Grid texture = smooth_noise(height, width, std::max<std::size_t>(2, width / 4), rng);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double n = 0.08 * (texture(y, x) - 0.5);
      for (std::size_t c = 0; c < 3; ++c) img(y, x, c) += n;
    }
  }
  img.clamp();
  return img;
}

Grid random_depth_field(std::size_t height, std::size_t width, std::uint64_t seed) {
  if (height == 0 || width == 0) throw InvalidInput("depth field dimensions must be positive");
  std::mt19937_64 rng(mix_seed(seed, 0xDE7));
  const Grid noise = smooth_noise(height, width, 3, rng);
  Grid depth(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    const double ramp = height > 1 ? 1.0 - static_cast<double>(y) / static_cast<double>(height - 1) : 0.5;
    for (std::size_t x = 0; x < width; ++x) depth(y, x) = 0.9 * ramp + 0.4 * noise(y, x);
  }
  return depth;
}

SyntheticSample random_sample(std::size_t height, std::size_t width, std::uint64_t seed, const SceneRanges& ranges) {
  if (!(ranges.airlight_min >= 0.0 && ranges.airlight_min <= ranges.airlight_max && ranges.airlight_max <= 1.0)) {
    throw InvalidInput("airlight range must lie within [0,1]");
  }
  if (!(ranges.beta_min >= 0.0 && ranges.beta_min <= ranges.beta_max)) {
    throw InvalidInput("beta range must be non-negative and ordered");
  }
  std::mt19937_64 rng(mix_seed(seed, 0xA1));
  std::uniform_real_distribution<double> air(ranges.airlight_min, ranges.airlight_max);
  std::uniform_real_distribution<double> beta(ranges.beta_min, ranges.beta_max);

  SyntheticSample s;
  s.scene.clean = random_clean_image(height, width, seed);
  s.depth = random_depth_field(height, width, seed);
  s.beta = beta(rng);
  s.scene.airlight = {air(rng), air(rng), air(rng)};
  s.scene.transmission = transmission_from_depth(s.depth, s.beta);
  s.hazy = synthesize_haze(s.scene);
  return s;
}

}  // namespace unhaze::imaging
