#include <algorithm>
#include <cmath>
#include <random>

#include <torch/torch.h>

#include "unhaze/errors.hpp"
#include "unhaze/evalkit.hpp"

namespace unhaze::evalkit {

namespace {

torch::Tensor to_matrix(const std::vector<std::vector<double>>& data) {
  if (data.empty()) throw InvalidInput("projection of an empty set");
  const auto n = static_cast<std::int64_t>(data.size());
  const auto d = static_cast<std::int64_t>(data.front().size());
  torch::Tensor m = torch::empty({n, d}, torch::kFloat64);
  double* p = m.data_ptr<double>();
  for (const auto& row : data) {
    if (static_cast<std::int64_t>(row.size()) != d) throw InvalidInput("projection rows differ in dimension");
    p = std::copy(row.begin(), row.end(), p);
  }
  return m;
}

}  // namespace

std::vector<Point2> pca_2d(const std::vector<std::vector<double>>& data) {
  const torch::Tensor x = to_matrix(data);
  const torch::Tensor centred = x - x.mean(0, true);
  const torch::Tensor cov = centred.t().matmul(centred) / static_cast<double>(std::max<std::int64_t>(1, x.size(0)));
  // eigh returns ascending eigenvalues.
  auto [values, vectors] = torch::linalg_eigh(cov);
  const std::int64_t d = vectors.size(1);
  std::vector<torch::Tensor> axes;
  for (std::int64_t k = 0; k < 2; ++k) {
    if (d - 1 - k < 0) {
      axes.push_back(torch::zeros({d}, torch::kFloat64));
      continue;
    }
    torch::Tensor v = vectors.select(1, d - 1 - k);
    if (v.index_select(0, v.abs().argmax().reshape({1})).item<double>() < 0.0) v = -v;
    axes.push_back(v);
  }
  const torch::Tensor proj = centred.matmul(torch::stack(axes, 1)).contiguous();
  std::vector<Point2> out(data.size());
  const double* p = proj.data_ptr<double>();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {p[2 * i], p[2 * i + 1]};
  return out;
}

std::vector<Point2> tsne_2d(const std::vector<std::vector<double>>& data, const TsneOptions& opts) {
  const std::size_t n = data.size();
  if (n == 0) throw InvalidInput("t-SNE of an empty set");
  if (!(opts.perplexity > 0.0)) throw InvalidInput("t-SNE perplexity must be > 0");
  if (n == 1) return {Point2{}};

  // Squared distances in the input space.
  std::vector<double> d2(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < data[i].size(); ++k) {
        const double t = data[i][k] - data[j][k];
        s += t * t;
      }
      d2[i * n + j] = d2[j * n + i] = s;
    }
  }

  // Conditional affinities, bandwidth found by bisection on the entropy.
  const double target = std::log(std::min(opts.perplexity, static_cast<double>(n - 1)));
  std::vector<double> p(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 64; ++it) {
      double sum = 0.0, weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double e = std::exp(-beta * d2[i * n + j]);
        p[i * n + j] = e;
        sum += e;
        weighted += e * d2[i * n + j];
      }
      if (sum <= 0.0) {
        hi = beta;
        beta = (lo + beta) / 2.0;
        continue;
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] /= sum;
      if (std::abs(entropy - target) < 1e-5) break;
      if (entropy > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
  }
  // Symmetrise.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = std::max((p[i * n + j] + p[j * n + i]) / (2.0 * static_cast<double>(n)), 1e-12);
      p[i * n + j] = p[j * n + i] = s;
    }
  }

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> init(0.0, 1e-4);
  std::vector<Point2> y(n), velocity(n), grad(n);
  for (auto& pt : y) pt = {init(rng), init(rng)};

  std::vector<double> q(n * n);
  for (int it = 0; it < opts.iterations; ++it) {
    const double exaggeration = it < 100 ? 12.0 : 1.0;
    const double momentum = it < 250 ? 0.5 : 0.8;
    double qsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y[i].x - y[j].x;
        const double dy = y[i].y - y[j].y;
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        q[i * n + j] = q[j * n + i] = v;
        qsum += 2.0 * v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double w = q[i * n + j];
        const double m = (exaggeration * p[i * n + j] - w / qsum) * w;
        gx += m * (y[i].x - y[j].x);
        gy += m * (y[i].y - y[j].y);
      }
      grad[i] = {4.0 * gx, 4.0 * gy};
    }
    for (std::size_t i = 0; i < n; ++i) {
      velocity[i] = {momentum * velocity[i].x - 200.0 * grad[i].x, momentum * velocity[i].y - 200.0 * grad[i].y};
      y[i].x += velocity[i].x;
      y[i].y += velocity[i].y;
    }
  }
  return y;
}

double silhouette(const std::vector<Point2>& points, const std::vector<Domain>& labels) {
  if (points.size() != labels.size()) throw InvalidInput("silhouette needs one label per point");
  const std::size_t n = points.size();
  std::size_t hazy = 0;
  for (Domain d : labels) hazy += d == Domain::Hazy ? 1 : 0;
  if (hazy == 0 || hazy == n) throw InvalidInput("silhouette needs points from both domains");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double same = 0.0, other = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = std::hypot(points[i].x - points[j].x, points[i].y - points[j].y);
      (labels[j] == labels[i] ? same : other) += d;
    }
    const std::size_t own = labels[i] == Domain::Hazy ? hazy : n - hazy;
    if (own <= 1) continue;  // singleton clusters score 0
    const double a = same / static_cast<double>(own - 1);
    const double b = other / static_cast<double>(n - own);
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

Image render_scatter(const std::vector<Point2>& points, const std::vector<Domain>& labels, std::size_t size) {
  if (points.size() != labels.size()) throw InvalidInput("scatter needs one label per point");
  if (size < 16) throw InvalidInput("scatter canvas too small");
  Image canvas(size, size, 1.0);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      canvas(0, i, c) = canvas(size - 1, i, c) = canvas(i, 0, c) = canvas(i, size - 1, c) = 0.6;
    }
  }
  if (points.empty()) return canvas;

  double xmin = points[0].x, xmax = points[0].x, ymin = points[0].y, ymax = points[0].y;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double margin = 8.0;
  const double span = static_cast<double>(size) - 2.0 * margin;
  auto scale = [&](double v, double lo, double hi) {
    return hi > lo ? margin + (v - lo) / (hi - lo) * span : static_cast<double>(size) / 2.0;
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto cx = static_cast<long>(std::lround(scale(points[i].x, xmin, xmax)));
    // Image rows grow downward.
    const auto cy = static_cast<long>(size) - 1 - static_cast<long>(std::lround(scale(points[i].y, ymin, ymax)));
    const std::array<double, 3> colour =
        labels[i] == Domain::Hazy ? std::array<double, 3>{0.85, 0.15, 0.1} : std::array<double, 3>{0.1, 0.3, 0.85};
    for (long dy = -2; dy <= 2; ++dy) {
      for (long dx = -2; dx <= 2; ++dx) {
        if (dx * dx + dy * dy > 5) continue;
        const long y = cy + dy;
        const long x = cx + dx;
        if (y < 0 || x < 0 || y >= static_cast<long>(size) || x >= static_cast<long>(size)) continue;
        for (std::size_t c = 0; c < 3; ++c) canvas(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = colour[c];
      }
    }
  }
  return canvas;
}

}  // namespace unhaze::evalkit
