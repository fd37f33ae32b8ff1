#include <algorithm>

#include "unhaze/errors.hpp"
#include "unhaze/networks.hpp"

namespace unhaze::networks {

namespace nn = torch::nn;

PatchDiscriminatorImpl::PatchDiscriminatorImpl(std::int64_t base_width, std::int64_t layers, bool instance_norm) {
  if (base_width < 1 || layers < 1) throw InvalidInput("discriminator width and depth must be >= 1");
  auto conv = [](std::int64_t in, std::int64_t out, std::int64_t stride, bool bias) {
    return nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(stride).padding(1).bias(bias));
  };
  auto lrelu = [] { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)); };

  nn::Sequential body;
  body->push_back(conv(3, base_width, 2, true));
  body->push_back(lrelu());
  std::int64_t ch = base_width;
  for (std::int64_t i = 1; i <= layers; ++i) {
    const std::int64_t next = base_width * std::min<std::int64_t>(std::int64_t{1} << i, 8);
    const std::int64_t stride = i < layers ? 2 : 1;
    body->push_back(conv(ch, next, stride, !instance_norm));
    if (instance_norm) body->push_back(nn::InstanceNorm2d(next));
    body->push_back(lrelu());
    ch = next;
  }
  body->push_back(conv(ch, 1, 1, true));
  body_ = register_module("body", body);
}

torch::Tensor PatchDiscriminatorImpl::forward(const torch::Tensor& x) {
  if (x.dim() != 4 || x.size(1) != 3) throw InvalidInput("discriminator expects a [B,3,H,W] tensor");
  return body_->forward(x);
}

}  // namespace unhaze::networks
