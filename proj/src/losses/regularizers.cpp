#include <cmath>

#include "unhaze/errors.hpp"
#include "unhaze/imaging.hpp"
#include "unhaze/losses.hpp"

namespace unhaze::losses {

namespace F = torch::nn::functional;

torch::Tensor tv_loss(const torch::Tensor& img) {
  if (img.dim() < 2) throw InvalidInput("total variation needs at least a 2-D tensor");
  const std::int64_t h = img.size(-2);
  const std::int64_t w = img.size(-1);
  torch::Tensor total = torch::zeros({}, img.options());
  if (w > 1) total = total + (img.narrow(-1, 1, w - 1) - img.narrow(-1, 0, w - 1)).abs().sum();
  if (h > 1) total = total + (img.narrow(-2, 1, h - 1) - img.narrow(-2, 0, h - 1)).abs().sum();
  return total;
}

double tv_loss(const Image& img) {
  double total = 0.0;
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      for (std::size_t c = 0; c < Image::kChannels; ++c) {
        if (x + 1 < img.width()) total += std::abs(img(y, x + 1, c) - img(y, x, c));
        if (y + 1 < img.height()) total += std::abs(img(y + 1, x, c) - img(y, x, c));
      }
    }
  }
  return total;
}

torch::Tensor dark_channel(const torch::Tensor& img, std::int64_t radius) {
  if (img.dim() != 4 || img.size(1) != 3) throw InvalidInput("dark channel expects a [B,3,H,W] tensor");
  if (radius < 0) throw InvalidInput("dark channel radius must be >= 0");
  const torch::Tensor channel_min = std::get<0>(img.min(1, true));
  // Max pooling pads with -inf, so negated it is a min filter whose window
  // is clipped at the border.
  return -F::max_pool2d(-channel_min, F::MaxPool2dFuncOptions(2 * radius + 1).stride(1).padding(radius));
}

torch::Tensor dark_channel_loss(const torch::Tensor& img, std::int64_t radius) {
  return dark_channel(img, radius).abs().mean();
}

double dark_channel_loss(const Image& img, std::size_t radius) {
  const Grid d = imaging::dark_channel(img, radius);
  double total = 0.0;
  for (double v : d.values()) total += std::abs(v);
  return total / static_cast<double>(d.values().size());
}

torch::Tensor gan_loss(const torch::Tensor& scores, GanTarget target) {
  const double label = target == GanTarget::Real ? 1.0 : 0.0;
  return (scores - label).pow(2).mean();
}

torch::Tensor cycle_loss(const torch::Tensor& a, const torch::Tensor& b) {
  if (a.sizes() != b.sizes()) throw InvalidInput("cycle loss operands differ in shape");
  return (a - b).abs().mean();
}

double cycle_loss(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw InvalidInput("cycle loss operands differ in shape");
  auto va = a.values();
  auto vb = b.values();
  double total = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) total += std::abs(va[i] - vb[i]);
  return total / static_cast<double>(va.size());
}

}  // namespace unhaze::losses
