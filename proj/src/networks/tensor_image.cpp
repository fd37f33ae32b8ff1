#include <algorithm>

#include "unhaze/errors.hpp"
#include "unhaze/networks.hpp"

namespace unhaze::networks {

torch::Tensor to_network_tensor(const Image& img, torch::Dtype dtype) {
  if (img.empty()) throw InvalidInput("cannot convert an empty image");
  const auto h = static_cast<std::int64_t>(img.height());
  const auto w = static_cast<std::int64_t>(img.width());
  auto values = img.values();
  torch::Tensor hwc = torch::from_blob(const_cast<double*>(values.data()), {h, w, 3}, torch::kFloat64);
  return (hwc.permute({2, 0, 1}).unsqueeze(0) * 2.0 - 1.0).to(dtype).contiguous();
}

Image from_network_tensor(const torch::Tensor& t) {
  torch::Tensor x = t.detach();
  if (x.dim() == 4) {
    if (x.size(0) != 1) throw InvalidInput("expected a single image tensor");
    x = x.squeeze(0);
  }
  if (x.dim() != 3 || x.size(0) != 3) throw InvalidInput("expected a [3,H,W] tensor");
  torch::Tensor hwc = ((x.to(torch::kFloat64) + 1.0) * 0.5).clamp(0.0, 1.0).permute({1, 2, 0}).contiguous();
  const auto h = static_cast<std::size_t>(hwc.size(0));
  const auto w = static_cast<std::size_t>(hwc.size(1));
  const double* p = hwc.data_ptr<double>();
  return Image(h, w, std::vector<double>(p, p + h * w * 3));
}

}  // namespace unhaze::networks
