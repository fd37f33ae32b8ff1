#include <cmath>

#include "unhaze/errors.hpp"
#include "unhaze/losses.hpp"

namespace unhaze::losses {

void LossWeights::validate() const {
  for (double l : {lambda1, lambda2, lambda3, lambda4, lambda5}) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidInput("loss weights must be finite and >= 0");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("temperature must be > 0");
}

double similarity(std::span<const double> u, std::span<const double> v, double tau) {
  if (!(tau > 0.0)) throw InvalidInput("temperature must be > 0");
  if (u.size() != v.size() || u.empty()) throw InvalidInput("similarity needs equal-length non-empty vectors");
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw InvalidInput("similarity of a zero vector is undefined");
  return std::exp(dot / (std::sqrt(uu) * std::sqrt(vv) * tau));
}

}  // namespace unhaze::losses
