#pragma once

// Translation generators with tapped encoders, projection heads, negative
// generators and patch discriminators.

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "unhaze/image.hpp"

namespace unhaze::networks {

// ---------------------------------------------------------------------------
// Image <-> tensor

/// [0,1] HWC image to a [1,3,H,W] tensor in the network range [-1,1] (2v-1).
torch::Tensor to_network_tensor(const Image& img, torch::Dtype dtype = torch::kFloat32);

/// Inverse of to_network_tensor. Accepts [1,3,H,W] or [3,H,W]; clamps to [0,1].
Image from_network_tensor(const torch::Tensor& t);

// ---------------------------------------------------------------------------
// Generator

/// Architecture of a ResNet translation generator.
///
/// Encoder layers are counted 1-based in execution order: reflection pad,
/// 7x7 conv, norm, relu, then (conv, norm, relu) per downsampling stage, then
/// one entry per residual block. With two stages this puts residual block k at
/// layer 10 + k, and the default taps {1,5,9,13,17} pick the padded input, the
/// first strided conv, the norm after the second strided conv and the outputs
/// of residual blocks 3 and 7.
struct GeneratorSpec {
  std::int64_t base_width = 64;
  std::int64_t res_blocks = 9;
  std::int64_t downsample = 2;
  std::vector<std::int64_t> taps{1, 5, 9, 13, 17};

  std::int64_t encoder_depth() const noexcept { return 4 + 3 * downsample + res_blocks; }
  /// Total spatial reduction factor of the encoder.
  std::int64_t stride() const noexcept { return std::int64_t{1} << downsample; }
  /// Throws InvalidInput when the spec is inconsistent.
  void validate() const;
  /// Canonical text form, used for checkpoint hashing.
  std::string describe() const;
};

/// Activations captured at the tap layers, in tap order.
struct FeatureStack {
  std::vector<torch::Tensor> maps;  // each [B, C, h, w]
};

class ResidualBlockImpl : public torch::nn::Module {
 public:
  explicit ResidualBlockImpl(std::int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(ResidualBlock);

class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(GeneratorSpec spec);

  struct Output {
    torch::Tensor image;
    FeatureStack features;
  };

  /// Full translation plus the encoder taps gathered on the way.
  Output forward(const torch::Tensor& x);
  /// Runs the encoder only as far as the deepest tap.
  FeatureStack encode(const torch::Tensor& x);
  /// Translation without keeping the taps.
  torch::Tensor translate(const torch::Tensor& x);

  const GeneratorSpec& spec() const noexcept { return spec_; }
  /// Channel count of each tap, in tap order.
  std::vector<std::int64_t> tap_channels() const;

 private:
  void check_input(const torch::Tensor& x) const;

  GeneratorSpec spec_;
  std::vector<torch::nn::AnyModule> encoder_;
  std::vector<std::int64_t> encoder_channels_;
  torch::nn::Sequential decoder_{nullptr};
};
TORCH_MODULE(Generator);

// ---------------------------------------------------------------------------
// Embeddings

/// Per-tap query and positive embeddings, each [Q, d] with unit rows.
struct EmbeddingSet {
  std::vector<torch::Tensor> queries;
  std::vector<torch::Tensor> positives;
};

/// Per-tap adversarial negatives, each [N, d] with unit rows.
struct NegativeBank {
  std::vector<torch::Tensor> per_tap;
  std::int64_t size() const { return per_tap.empty() ? 0 : per_tap.front().size(0); }
};

/// Draws `count` distinct flat spatial indices per tap (fewer if the map is
/// smaller). Indices address the flattened [B*h*w] grid.
std::vector<torch::Tensor> sample_locations(const FeatureStack& fs, std::int64_t count, torch::Generator& gen);

/// Two-layer MLP per tap (linear, relu, linear) followed by L2 normalisation.
class ProjectionHeadImpl : public torch::nn::Module {
 public:
  ProjectionHeadImpl(const std::vector<std::int64_t>& tap_channels, std::int64_t embed_dim);

  /// Embeds the features at `locations` (one index tensor per tap).
  std::vector<torch::Tensor> project(const FeatureStack& fs, const std::vector<torch::Tensor>& locations);

  std::int64_t embed_dim() const noexcept { return embed_dim_; }
  std::size_t taps() const noexcept { return mlps_.size(); }

 private:
  std::int64_t embed_dim_;
  std::vector<std::int64_t> in_channels_;
  std::vector<torch::nn::Sequential> mlps_;
};
TORCH_MODULE(ProjectionHead);

/// Standard-normal noise for the negative generators.
torch::Tensor draw_noise(std::int64_t count, std::int64_t dim, torch::Generator& gen,
                         torch::Dtype dtype = torch::kFloat32);

/// Maps [mean feature ; noise] to a unit embedding, one perceptron per tap.
class NegativeGeneratorImpl : public torch::nn::Module {
 public:
  NegativeGeneratorImpl(std::size_t taps, std::int64_t embed_dim, std::int64_t noise_dim);

  /// mean_feat: [d]; noise: [N, noise_dim]  ->  [N, d] unit rows.
  torch::Tensor forward(std::size_t tap, const torch::Tensor& mean_feat, const torch::Tensor& noise);

  /// One forward per tap with that tap's noise draws.
  NegativeBank bank(const std::vector<torch::Tensor>& mean_feats, const std::vector<torch::Tensor>& noise);

  std::int64_t noise_dim() const noexcept { return noise_dim_; }
  std::int64_t embed_dim() const noexcept { return embed_dim_; }
  std::size_t taps() const noexcept { return mlps_.size(); }

 private:
  std::int64_t embed_dim_;
  std::int64_t noise_dim_;
  std::vector<torch::nn::Sequential> mlps_;
};
TORCH_MODULE(NegativeGenerator);

// ---------------------------------------------------------------------------
// Discriminator

/// PatchGAN: `layers` strided 4x4 convs, one stride-1 conv, one 1-channel head.
/// With layers = 3 the receptive field is 70 px and a 64x64 input yields 6x6 scores.
class PatchDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit PatchDiscriminatorImpl(std::int64_t base_width = 64, std::int64_t layers = 3, bool instance_norm = true);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

// ---------------------------------------------------------------------------
// Parameters

/// Seeded initialisation: weights ~ N(0, std^2), biases zero. Parameters are
/// visited in registration order so the result depends only on the seed.
void init_parameters(torch::nn::Module& module, std::uint64_t seed, double std = 0.02);

/// Concatenation of every parameter, flattened, in registration order.
torch::Tensor flatten_parameters(const torch::nn::Module& module);

}  // namespace unhaze::networks
