#include <algorithm>
#include <sstream>

#include "unhaze/errors.hpp"
#include "unhaze/networks.hpp"

namespace unhaze::networks {

namespace nn = torch::nn;

void GeneratorSpec::validate() const {
  if (base_width < 1) throw InvalidInput("generator base width must be >= 1");
  if (res_blocks < 1) throw InvalidInput("generator needs at least one residual block");
  if (downsample < 1 || downsample > 6) throw InvalidInput("generator downsampling stages must be in [1,6]");
  if (taps.empty()) throw InvalidInput("generator needs at least one tap layer");
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (taps[i] < 1 || taps[i] > encoder_depth()) {
      throw InvalidInput("tap layer " + std::to_string(taps[i]) + " outside encoder depth " +
                         std::to_string(encoder_depth()));
    }
    if (i > 0 && taps[i] <= taps[i - 1]) throw InvalidInput("tap layers must be strictly increasing");
  }
}

std::string GeneratorSpec::describe() const {
  std::ostringstream os;
  os << "resnet(width=" << base_width << ",blocks=" << res_blocks << ",down=" << downsample << ",taps=";
  for (std::size_t i = 0; i < taps.size(); ++i) os << (i ? ":" : "") << taps[i];
  os << ")";
  return os.str();
}

ResidualBlockImpl::ResidualBlockImpl(std::int64_t channels) {
  body_ = register_module(
      "body", nn::Sequential(nn::ReflectionPad2d(1), nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).bias(false)),
                             nn::InstanceNorm2d(channels), nn::ReLU(),
                             nn::ReflectionPad2d(1), nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).bias(false)),
                             nn::InstanceNorm2d(channels)));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) { return x + body_->forward(x); }

GeneratorImpl::GeneratorImpl(GeneratorSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const std::int64_t w = spec_.base_width;

  // Convolutions feeding an instance norm carry no bias: the norm removes it.
  auto push = [this](nn::AnyModule m, std::int64_t out_channels) {
    const std::string name = "enc" + std::to_string(encoder_.size() + 1);
    encoder_.push_back(std::move(m));
    encoder_channels_.push_back(out_channels);
    register_module(name, encoder_.back().ptr());
  };
  push(nn::AnyModule(nn::ReflectionPad2d(3)), 3);
  push(nn::AnyModule(nn::Conv2d(nn::Conv2dOptions(3, w, 7).bias(false))), w);
  push(nn::AnyModule(nn::InstanceNorm2d(w)), w);
  push(nn::AnyModule(nn::ReLU()), w);
  std::int64_t ch = w;
  for (std::int64_t s = 0; s < spec_.downsample; ++s) {
    push(nn::AnyModule(nn::Conv2d(nn::Conv2dOptions(ch, ch * 2, 3).stride(2).padding(1).bias(false))), ch * 2);
    ch *= 2;
    push(nn::AnyModule(nn::InstanceNorm2d(ch)), ch);
    push(nn::AnyModule(nn::ReLU()), ch);
  }
  for (std::int64_t b = 0; b < spec_.res_blocks; ++b) push(nn::AnyModule(ResidualBlock(ch)), ch);

  nn::Sequential dec;
  for (std::int64_t s = 0; s < spec_.downsample; ++s) {
    dec->push_back(nn::ConvTranspose2d(
        nn::ConvTranspose2dOptions(ch, ch / 2, 3).stride(2).padding(1).output_padding(1).bias(false)));
    ch /= 2;
    dec->push_back(nn::InstanceNorm2d(ch));
    dec->push_back(nn::ReLU());
  }
  dec->push_back(nn::ReflectionPad2d(3));
  dec->push_back(nn::Conv2d(nn::Conv2dOptions(ch, 3, 7)));
  dec->push_back(nn::Tanh());
  decoder_ = register_module("decoder", dec);
}

void GeneratorImpl::check_input(const torch::Tensor& x) const {
  if (x.dim() != 4 || x.size(1) != 3) throw InvalidInput("generator expects a [B,3,H,W] tensor");
  const std::int64_t s = spec_.stride();
  if (x.size(2) % s != 0 || x.size(3) % s != 0) {
    throw InvalidInput("image size " + std::to_string(x.size(2)) + "x" + std::to_string(x.size(3)) +
                       " is not divisible by the encoder stride " + std::to_string(s));
  }
  if (x.size(2) < 4 || x.size(3) < 4) throw InvalidInput("generator input must be at least 4x4");
}

GeneratorImpl::Output GeneratorImpl::forward(const torch::Tensor& x) {
  check_input(x);
  Output out;
  torch::Tensor h = x;
  auto tap = spec_.taps.begin();
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    h = encoder_[i].forward(h);
    if (tap != spec_.taps.end() && *tap == static_cast<std::int64_t>(i + 1)) {
      out.features.maps.push_back(h);
      ++tap;
    }
  }
  out.image = decoder_->forward(h);
  return out;
}

FeatureStack GeneratorImpl::encode(const torch::Tensor& x) {
  check_input(x);
  FeatureStack fs;
  torch::Tensor h = x;
  const auto last = static_cast<std::size_t>(spec_.taps.back());
  auto tap = spec_.taps.begin();
  for (std::size_t i = 0; i < last; ++i) {
    h = encoder_[i].forward(h);
    if (*tap == static_cast<std::int64_t>(i + 1)) {
      fs.maps.push_back(h);
      ++tap;
    }
  }
  return fs;
}

torch::Tensor GeneratorImpl::translate(const torch::Tensor& x) {
  check_input(x);
  torch::Tensor h = x;
  for (auto& layer : encoder_) h = layer.forward(h);
  return decoder_->forward(h);
}

std::vector<std::int64_t> GeneratorImpl::tap_channels() const {
  std::vector<std::int64_t> out;
  for (std::int64_t t : spec_.taps) out.push_back(encoder_channels_[static_cast<std::size_t>(t - 1)]);
  return out;
}

}  // namespace unhaze::networks
