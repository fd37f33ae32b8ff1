#pragma once

// Scalar objectives. Tensor overloads are differentiable and dtype-generic;
// Image overloads evaluate the same quantity in double precision.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include <torch/torch.h>

#include "unhaze/image.hpp"
#include "unhaze/networks.hpp"

namespace unhaze::losses {

/// Balance weights and temperature. Defaults: lambda1 = lambda2 = 1,
/// lambda3 = 0.1, lambda4 = 1e-3, lambda5 = 1e-2, tau = 0.07.
struct LossWeights {
  double lambda1 = 1.0;   // diversity, in the negative objective
  double lambda2 = 1.0;   // adversarial
  double lambda3 = 0.1;   // cycle
  double lambda4 = 1e-3;  // total variation
  double lambda5 = 1e-2;  // dark channel
  double tau = 0.07;

  void validate() const;
};

/// exp(u.v / (|u| |v| tau)). Throws InvalidInput for a zero vector, a length
/// mismatch or tau <= 0.
double similarity(std::span<const double> u, std::span<const double> v, double tau);

/// InfoNCE term for one tap, averaged over queries:
///   -log( sim(f,f+) / (sim(f,f+) + sum_i sim(f,f-_i)) )
/// queries, positives: [Q,d]; negatives: [N,d] shared by every query.
/// Rows are normalised internally, so the inputs need not be unit length.
torch::Tensor contrastive_term(const torch::Tensor& queries, const torch::Tensor& positives,
                               const torch::Tensor& negatives, double tau);

/// Mean over taps of contrastive_term.
torch::Tensor adversarial_contrastive_loss(const networks::EmbeddingSet& embeddings,
                                           const networks::NegativeBank& negatives, double tau);

using NegativeFn = std::function<torch::Tensor(const torch::Tensor& mean_feat, const torch::Tensor& noise)>;

/// -mean |gen(mean_feat, v1) - gen(mean_feat, v2)|. Never positive.
torch::Tensor diversity_loss(const NegativeFn& gen, const torch::Tensor& mean_feat, const torch::Tensor& v1,
                             const torch::Tensor& v2);
/// Same quantity given both generator outputs directly.
torch::Tensor diversity_loss(const torch::Tensor& out1, const torch::Tensor& out2);

/// Anisotropic total variation, summed over pixels and channels. Differences
/// run along the last two dimensions; a 1x1 input gives 0.
torch::Tensor tv_loss(const torch::Tensor& img);
double tv_loss(const Image& img);

/// Differentiable dark channel of a [B,3,H,W] tensor in [0,1]: channel min
/// followed by a border-clipped (2r+1)^2 min filter. Returns [B,1,H,W].
torch::Tensor dark_channel(const torch::Tensor& img, std::int64_t radius);

/// Mean |dark_channel(img)|.
torch::Tensor dark_channel_loss(const torch::Tensor& img, std::int64_t radius);
double dark_channel_loss(const Image& img, std::size_t radius);

enum class GanTarget { Real, Fake };

/// Least-squares GAN loss: mean (score - label)^2, label 1 for real and 0 for fake.
torch::Tensor gan_loss(const torch::Tensor& scores, GanTarget target);

/// Mean absolute difference.
torch::Tensor cycle_loss(const torch::Tensor& a, const torch::Tensor& b);
double cycle_loss(const Image& a, const Image& b);

// ---------------------------------------------------------------------------
// Composites

template <class T>
struct EncoderTerms {
  T ac;
  T adv;
  T cycle;
  T tv;
  T dc;
};

/// L_enc = L_ac + lambda2 L_adv + lambda3 L_cycle + lambda4 L_tv + lambda5 L_dc
template <class T>
T encoder_objective(const EncoderTerms<T>& t, const LossWeights& w) {
  return t.ac + t.adv * w.lambda2 + t.cycle * w.lambda3 + t.tv * w.lambda4 + t.dc * w.lambda5;
}

/// L_neg = -L_ac + lambda1 L_div
template <class T>
T negative_objective(const T& ac, const T& div, const LossWeights& w) {
  return div * w.lambda1 - ac;
}

/// Per-direction terms. The forward direction is hazy -> clean -> hazy.
struct PathTerms {
  double ac = 0.0;
  double adv = 0.0;
  double cycle = 0.0;
  double div = 0.0;
};

struct LossReport {
  std::int64_t step = 0;
  double lr = 0.0;
  PathTerms forward;
  /// Clean -> hazy -> clean terms; absent when the dual cycle is disabled.
  std::optional<PathTerms> backward;
  double tv = 0.0;
  double dc = 0.0;
  double enc = 0.0;
  double neg = 0.0;
  /// Discriminator objective (not part of the CSV row).
  double disc = 0.0;

  double ac() const noexcept { return forward.ac + (backward ? backward->ac : 0.0); }
  double adv() const noexcept { return forward.adv + (backward ? backward->adv : 0.0); }
  double cycle() const noexcept { return forward.cycle + (backward ? backward->cycle : 0.0); }
  double div() const noexcept { return forward.div + (backward ? backward->div : 0.0); }

  EncoderTerms<double> encoder_terms() const { return {ac(), adv(), cycle(), tv, dc}; }
  /// Fills enc and neg from the terms.
  void finalize(const LossWeights& w);
  bool all_finite() const noexcept;
};

/// "step,ac,adv,cycle,tv,dc,div,enc,neg,lr"
std::string csv_header();
std::string csv_row(const LossReport& r);

}  // namespace unhaze::losses
