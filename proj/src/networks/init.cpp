#include "unhaze/networks.hpp"

namespace unhaze::networks {

void init_parameters(torch::nn::Module& module, std::uint64_t seed, double std) {
  torch::NoGradGuard no_grad;
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  for (auto& p : module.parameters()) {
    if (p.dim() > 1) {
      // Draw in double so the stream does not depend on the parameter dtype.
      p.copy_(torch::randn(p.sizes(), gen, torch::TensorOptions().dtype(torch::kFloat64)) * std);
    } else {
      p.zero_();
    }
  }
}

torch::Tensor flatten_parameters(const torch::nn::Module& module) {
  std::vector<torch::Tensor> flat;
  for (const auto& p : module.parameters()) flat.push_back(p.detach().reshape(-1).to(torch::kFloat64));
  return flat.empty() ? torch::empty({0}, torch::kFloat64) : torch::cat(flat);
}

}  // namespace unhaze::networks
