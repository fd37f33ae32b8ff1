#include "unhaze/errors.hpp"
#include "unhaze/networks.hpp"

namespace unhaze::networks {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

namespace {

torch::Tensor unit_rows(const torch::Tensor& x) { return F::normalize(x, F::NormalizeFuncOptions().p(2).dim(1)); }

// [B,C,h,w] -> [B*h*w, C]
torch::Tensor flatten_locations(const torch::Tensor& map) {
  return map.permute({0, 2, 3, 1}).reshape({-1, map.size(1)});
}

}  // namespace

std::vector<torch::Tensor> sample_locations(const FeatureStack& fs, std::int64_t count, torch::Generator& gen) {
  if (count < 1) throw InvalidInput("need at least one sampled location");
  std::vector<torch::Tensor> out;
  out.reserve(fs.maps.size());
  for (const auto& map : fs.maps) {
    const std::int64_t total = map.size(0) * map.size(2) * map.size(3);
    torch::Tensor perm = torch::randperm(total, gen, torch::TensorOptions().dtype(torch::kLong));
    out.push_back(perm.slice(0, 0, std::min(count, total)));
  }
  return out;
}

ProjectionHeadImpl::ProjectionHeadImpl(const std::vector<std::int64_t>& tap_channels, std::int64_t embed_dim)
    : embed_dim_(embed_dim), in_channels_(tap_channels) {
  if (embed_dim < 1) throw InvalidInput("embedding dimension must be >= 1");
  for (std::size_t i = 0; i < tap_channels.size(); ++i) {
    mlps_.push_back(register_module("mlp" + std::to_string(i),
                                    nn::Sequential(nn::Linear(tap_channels[i], embed_dim), nn::ReLU(),
                                                   nn::Linear(embed_dim, embed_dim))));
  }
}

std::vector<torch::Tensor> ProjectionHeadImpl::project(const FeatureStack& fs,
                                                       const std::vector<torch::Tensor>& locations) {
  if (fs.maps.size() != mlps_.size() || locations.size() != mlps_.size()) {
    throw InvalidInput("projection head expects one feature map and one location set per tap");
  }
  std::vector<torch::Tensor> out;
  out.reserve(mlps_.size());
  for (std::size_t i = 0; i < mlps_.size(); ++i) {
    const torch::Tensor& map = fs.maps[i];
    if (map.dim() != 4 || map.size(1) != in_channels_[i]) {
      throw InvalidInput("tap " + std::to_string(i) + " has an unexpected channel count");
    }
    const torch::Tensor flat = flatten_locations(map);
    const torch::Tensor& idx = locations[i];
    if (idx.numel() == 0) throw InvalidInput("empty location set for tap " + std::to_string(i));
    if (idx.min().item<std::int64_t>() < 0 || idx.max().item<std::int64_t>() >= flat.size(0)) {
      throw InvalidInput("location index out of range for tap " + std::to_string(i));
    }
    out.push_back(unit_rows(mlps_[i]->forward(flat.index_select(0, idx))));
  }
  return out;
}

torch::Tensor draw_noise(std::int64_t count, std::int64_t dim, torch::Generator& gen, torch::Dtype dtype) {
  return torch::randn({count, dim}, gen, torch::TensorOptions().dtype(torch::kFloat64)).to(dtype);
}

NegativeGeneratorImpl::NegativeGeneratorImpl(std::size_t taps, std::int64_t embed_dim, std::int64_t noise_dim)
    : embed_dim_(embed_dim), noise_dim_(noise_dim) {
  if (embed_dim < 1 || noise_dim < 1) throw InvalidInput("negative generator dimensions must be >= 1");
  for (std::size_t i = 0; i < taps; ++i) {
    mlps_.push_back(register_module("mlp" + std::to_string(i),
                                    nn::Sequential(nn::Linear(embed_dim + noise_dim, embed_dim), nn::ReLU(),
                                                   nn::Linear(embed_dim, embed_dim))));
  }
}

torch::Tensor NegativeGeneratorImpl::forward(std::size_t tap, const torch::Tensor& mean_feat,
                                             const torch::Tensor& noise) {
  if (tap >= mlps_.size()) throw InvalidInput("negative generator has no tap " + std::to_string(tap));
  if (mean_feat.dim() != 1 || mean_feat.size(0) != embed_dim_) {
    throw InvalidInput("mean feature must be a vector of the embedding dimension");
  }
  if (noise.dim() != 2 || noise.size(1) != noise_dim_) {
    throw InvalidInput("noise must be [N, " + std::to_string(noise_dim_) + "]");
  }
  const torch::Tensor cond = mean_feat.unsqueeze(0).expand({noise.size(0), embed_dim_});
  return unit_rows(mlps_[tap]->forward(torch::cat({cond, noise}, 1)));
}

NegativeBank NegativeGeneratorImpl::bank(const std::vector<torch::Tensor>& mean_feats,
                                         const std::vector<torch::Tensor>& noise) {
  if (mean_feats.size() != mlps_.size() || noise.size() != mlps_.size()) {
    throw InvalidInput("negative bank needs one mean feature and one noise batch per tap");
  }
  NegativeBank b;
  for (std::size_t i = 0; i < mlps_.size(); ++i) b.per_tap.push_back(forward(i, mean_feats[i], noise[i]));
  return b;
}

}  // namespace unhaze::networks
