#pragma once

#include <algorithm>
#include <functional>

#include <torch/torch.h>

namespace testing {

/// Largest |analytic - numeric| over the input, divided by the largest
/// |numeric| (floored at 1e-8). Central differences with step h; `f` must be
/// a scalar function of a float64 tensor.
inline double gradient_error(const std::function<torch::Tensor(const torch::Tensor&)>& f, torch::Tensor x,
                             double h = 1e-6) {
  x = x.detach().to(torch::kFloat64).clone().requires_grad_(true);
  const torch::Tensor analytic = torch::autograd::grad({f(x)}, {x})[0].detach().reshape(-1);

  torch::NoGradGuard ng;
  torch::Tensor probe = x.detach().clone();
  auto flat = probe.view(-1);
  torch::Tensor numeric = torch::zeros_like(analytic);
  for (std::int64_t i = 0; i < flat.numel(); ++i) {
    const double orig = flat[i].item<double>();
    flat[i] = orig + h;
    const double up = f(probe).item<double>();
    flat[i] = orig - h;
    const double down = f(probe).item<double>();
    flat[i] = orig;
    numeric[i] = (up - down) / (2 * h);
  }
  const double scale = std::max(numeric.abs().max().item<double>(), 1e-8);
  return (analytic - numeric).abs().max().item<double>() / scale;
}

}  // namespace testing
