#include "unhaze/errors.hpp"
#include "unhaze/losses.hpp"

namespace unhaze::losses {

namespace F = torch::nn::functional;

torch::Tensor contrastive_term(const torch::Tensor& queries, const torch::Tensor& positives,
                               const torch::Tensor& negatives, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("temperature must be > 0");
  if (queries.dim() != 2 || positives.sizes() != queries.sizes()) {
    throw InvalidInput("queries and positives must both be [Q,d]");
  }
  if (negatives.dim() != 2 || negatives.size(0) == 0) throw InvalidInput("negative bank is empty");
  if (negatives.size(1) != queries.size(1)) throw InvalidInput("negative dimension differs from query dimension");

  const auto unit = F::NormalizeFuncOptions().p(2).dim(1);
  const torch::Tensor q = F::normalize(queries, unit);
  const torch::Tensor p = F::normalize(positives, unit);
  const torch::Tensor n = F::normalize(negatives, unit);

  // log of each similarity is its scaled cosine, so the ratio becomes a
  // log-softmax over [positive, negatives].
  const torch::Tensor pos = (q * p).sum(1, true) / tau;  // [Q,1]
  const torch::Tensor neg = q.matmul(n.t()) / tau;       // [Q,N]
  const torch::Tensor logits = torch::cat({pos, neg}, 1);
  return (torch::logsumexp(logits, 1) - pos.squeeze(1)).mean();
}

torch::Tensor adversarial_contrastive_loss(const networks::EmbeddingSet& embeddings,
                                           const networks::NegativeBank& negatives, double tau) {
  const std::size_t taps = embeddings.queries.size();
  if (taps == 0) throw InvalidInput("no tap embeddings");
  if (embeddings.positives.size() != taps || negatives.per_tap.size() != taps) {
    throw InvalidInput("queries, positives and negatives disagree on the number of taps");
  }
  torch::Tensor total = contrastive_term(embeddings.queries[0], embeddings.positives[0], negatives.per_tap[0], tau);
  for (std::size_t i = 1; i < taps; ++i) {
    total = total + contrastive_term(embeddings.queries[i], embeddings.positives[i], negatives.per_tap[i], tau);
  }
  return total / static_cast<double>(taps);
}

torch::Tensor diversity_loss(const NegativeFn& gen, const torch::Tensor& mean_feat, const torch::Tensor& v1,
                             const torch::Tensor& v2) {
  if (v1.sizes() != v2.sizes()) throw InvalidInput("diversity noise vectors differ in shape");
  return diversity_loss(gen(mean_feat, v1), gen(mean_feat, v2));
}

torch::Tensor diversity_loss(const torch::Tensor& out1, const torch::Tensor& out2) {
  if (out1.sizes() != out2.sizes()) throw InvalidInput("diversity outputs differ in shape");
  return -(out1 - out2).abs().mean();
}

}  // namespace unhaze::losses
