#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest_torch.hpp"

#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "support.hpp"
#include "unhaze/errors.hpp"
#include "unhaze/imaging.hpp"
#include "unhaze/losses.hpp"

using namespace unhaze;
using namespace unhaze::losses;

namespace {

const auto f64 = torch::TensorOptions().dtype(torch::kFloat64);

torch::Tensor randn(std::vector<std::int64_t> shape, std::uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  return torch::randn(shape, gen, f64);
}

torch::Tensor unit_rows(const torch::Tensor& t) { return t / t.norm(2, 1, true); }

double scalar(const torch::Tensor& t) { return t.item<double>(); }

// Per-query InfoNCE evaluated with plain loops over std::vector.
double contrastive_oracle(const torch::Tensor& q, const torch::Tensor& p, const torch::Tensor& n, double tau) {
  auto row = [](const torch::Tensor& t, std::int64_t i) {
    const auto c = t[i].contiguous();
    return std::vector<double>(c.data_ptr<double>(), c.data_ptr<double>() + c.numel());
  };
  double total = 0.0;
  for (std::int64_t i = 0; i < q.size(0); ++i) {
    const auto qi = row(q, i);
    const double pos = similarity(qi, row(p, i), tau);
    double denom = pos;
    for (std::int64_t j = 0; j < n.size(0); ++j) denom += similarity(qi, row(n, j), tau);
    total += -std::log(pos / denom);
  }
  return total / static_cast<double>(q.size(0));
}

double tv_oracle(const Image& img) {
  double s = 0.0;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        if (x + 1 < img.width()) s += std::abs(img(y, x + 1, c) - img(y, x, c));
        if (y + 1 < img.height()) s += std::abs(img(y + 1, x, c) - img(y, x, c));
      }
  return s;
}

torch::Tensor image_tensor(const Image& img) {
  // [1,3,H,W] holding the [0,1] values exactly.
  std::vector<double> hwc(img.values().begin(), img.values().end());
  const auto h = static_cast<std::int64_t>(img.height());
  const auto w = static_cast<std::int64_t>(img.width());
  return torch::tensor(hwc, f64).view({h, w, 3}).permute({2, 0, 1}).unsqueeze(0).contiguous();
}

}  // namespace

TEST_CASE("similarity: examples") {
  const std::vector<double> u{0.3, -1.2, 2.0};
  CHECK(similarity(u, u, 0.07) == doctest::Approx(std::exp(1.0 / 0.07)).epsilon(1e-12));
  const std::vector<double> a{1.0, 0.0, 0.0};
  const std::vector<double> b{0.0, 2.0, 0.0};
  CHECK(similarity(a, b, 0.07) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> v{0.5, 0.1, -0.7};
  std::vector<double> u2(u);
  for (auto& x : u2) x *= 2.0;
  CHECK(similarity(u2, v, 0.07) == doctest::Approx(similarity(u, v, 0.07)).epsilon(1e-12));
  CHECK(similarity(u, v, 0.5) == doctest::Approx(similarity(v, u, 0.5)).epsilon(1e-15));
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(similarity(zero, v, 0.07), InvalidInput);
  CHECK_THROWS_AS(similarity(u, v, 0.0), InvalidInput);
  CHECK_THROWS_AS(similarity(u, a, -1.0), InvalidInput);
  CHECK_THROWS_AS(similarity(u, std::vector<double>{1.0}, 0.07), InvalidInput);
}

TEST_CASE("contrastive: all-equal embeddings give log(1+N)") {
  for (std::int64_t n : {1, 7, 256}) {
    const auto e = torch::ones({4, 16}, f64) / 4.0;
    const auto l = scalar(contrastive_term(e, e, torch::ones({n, 16}, f64) / 4.0, 0.07));
    CHECK(std::abs(l - std::log1p(static_cast<double>(n))) < 1e-6);
  }
  CHECK(std::abs(std::log(257.0) - 5.549) < 1e-3);
}

TEST_CASE("contrastive: single negative orthogonal to the query, tau = 1") {
  const auto q = torch::tensor({{1.0, 0.0}}, f64);
  const auto n = torch::tensor({{0.0, 1.0}}, f64);
  const double l = scalar(contrastive_term(q, q, n, 1.0));
  CHECK(std::abs(l - 0.31326168751822286) < 1e-12);
  CHECK(std::abs(l - std::log1p(std::exp(-1.0))) < 1e-12);
}

TEST_CASE("contrastive: opposed negatives drive the loss to zero") {
  const auto q = unit_rows(randn({8, 12}, 1));
  const auto n = -q[0].unsqueeze(0).expand({256, 12});
  const auto l = scalar(contrastive_term(q.slice(0, 0, 1), q.slice(0, 0, 1), n, 0.07));
  CHECK(l <= 1e-9);
  CHECK(l > 0.0);
}

TEST_CASE("contrastive: agrees with the scalar oracle and stays positive") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto q = randn({5, 10}, 3 * s);
    const auto p = randn({5, 10}, 3 * s + 1);
    const auto n = randn({9, 10}, 3 * s + 2);
    const double l = scalar(contrastive_term(q, p, n, 0.2));
    CHECK(l == doctest::Approx(contrastive_oracle(q, p, n, 0.2)).epsilon(1e-10));
    CHECK(l > 0.0);
  }
}

TEST_CASE("contrastive: single precision within 1e-4") {
  const auto q = randn({6, 10}, 21);
  const auto p = randn({6, 10}, 22);
  const auto n = randn({16, 10}, 23);
  const double ref = scalar(contrastive_term(q, p, n, 0.07));
  const double low = contrastive_term(q.to(torch::kFloat32), p.to(torch::kFloat32), n.to(torch::kFloat32), 0.07)
                         .item<double>();
  CHECK(std::abs(ref - low) < 1e-4);
}

TEST_CASE("contrastive: averaged over taps, malformed banks rejected") {
  networks::EmbeddingSet e;
  networks::NegativeBank bank;
  std::vector<double> terms;
  for (std::uint64_t t = 0; t < 3; ++t) {
    e.queries.push_back(unit_rows(randn({4, 8}, 10 + t)));
    e.positives.push_back(unit_rows(randn({4, 8}, 20 + t)));
    bank.per_tap.push_back(unit_rows(randn({6, 8}, 30 + t)));
    terms.push_back(scalar(contrastive_term(e.queries.back(), e.positives.back(), bank.per_tap.back(), 0.07)));
  }
  const double mean = std::accumulate(terms.begin(), terms.end(), 0.0) / 3.0;
  CHECK(scalar(adversarial_contrastive_loss(e, bank, 0.07)) == doctest::Approx(mean).epsilon(1e-12));

  networks::NegativeBank empty;
  CHECK_THROWS_AS(adversarial_contrastive_loss(e, empty, 0.07), InvalidInput);
  auto wrong = bank;
  wrong.per_tap[1] = unit_rows(randn({6, 5}, 1));
  CHECK_THROWS_AS(adversarial_contrastive_loss(e, wrong, 0.07), InvalidInput);
  auto short_bank = bank;
  short_bank.per_tap.pop_back();
  CHECK_THROWS_AS(adversarial_contrastive_loss(e, short_bank, 0.07), InvalidInput);
}

TEST_CASE("diversity: examples") {
  const auto stub = [](const torch::Tensor& mean, const torch::Tensor& noise) {
    return mean.unsqueeze(0) + noise.sum(1, true);
  };
  const auto mean = randn({6}, 1);
  const auto v = randn({4, 3}, 2);
  CHECK(scalar(diversity_loss(stub, mean, v, v)) == 0.0);
  const auto v2 = v.clone();
  v2.select(1, 0).add_(0.1);
  CHECK(scalar(diversity_loss(stub, mean, v, v2)) == doctest::Approx(-0.1).epsilon(1e-12));
  for (std::uint64_t s = 0; s < 10; ++s) CHECK(scalar(diversity_loss(randn({5, 4}, s), randn({5, 4}, s + 50))) <= 0.0);
  CHECK_THROWS_AS(diversity_loss(stub, mean, v, randn({4, 2}, 3)), InvalidInput);
}

TEST_CASE("tv: examples") {
  CHECK(tv_loss(Image(5, 4, 0.37)) == 0.0);
  const auto rows = torch::tensor({{0.0, 0.5, 1.0}, {0.0, 0.5, 1.0}}, f64);
  CHECK(scalar(tv_loss(rows)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(scalar(tv_loss(torch::full({1, 1}, 0.4, f64))) == 0.0);
  const Image img = testing::random_image(7, 9, 4);
  CHECK(tv_loss(img) == doctest::Approx(tv_oracle(img)).epsilon(1e-12));
  CHECK(scalar(tv_loss(image_tensor(img))) == doctest::Approx(tv_oracle(img)).epsilon(1e-12));
  const auto t = image_tensor(img);
  CHECK(scalar(tv_loss(t + 0.25)) == doctest::Approx(scalar(tv_loss(t))).epsilon(1e-12));
  CHECK(tv_loss(img) > 0.0);
}

TEST_CASE("tv: zero exactly when every channel is constant") {
  Image img(6, 6);
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 6; ++x) {
      img(y, x, 0) = 0.1;
      img(y, x, 1) = 0.6;
      img(y, x, 2) = 0.9;
    }
  CHECK(tv_loss(img) == 0.0);
  img(3, 2, 1) = 0.61;
  CHECK(tv_loss(img) > 0.0);
}

TEST_CASE("dark channel loss: examples") {
  CHECK(dark_channel_loss(Image(8, 8, 0.0), 7) == 0.0);
  CHECK(dark_channel_loss(Image(8, 8, 0.2), 7) == doctest::Approx(0.2).epsilon(1e-15));
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Image img = testing::random_image(9, 11, s);
    for (std::size_t r : {0, 1, 3}) {
      const Grid dc = imaging::dark_channel(img, r);
      double mean = 0.0;
      for (double v : dc.values()) mean += std::abs(v);
      mean /= static_cast<double>(dc.values().size());
      CHECK(dark_channel_loss(img, r) == doctest::Approx(mean).epsilon(1e-12));
      CHECK(scalar(dark_channel_loss(image_tensor(img), static_cast<std::int64_t>(r))) ==
            doctest::Approx(mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("dark channel: tensor form matches the imaging module") {
  const Image img = testing::random_image(10, 13, 8);
  const auto t = dark_channel(image_tensor(img), 2);
  const Grid ref = imaging::dark_channel(img, 2);
  for (std::size_t y = 0; y < 10; ++y)
    for (std::size_t x = 0; x < 13; ++x)
      CHECK(t[0][0][static_cast<long>(y)][static_cast<long>(x)].item<double>() == ref(y, x));
}

TEST_CASE("gan: least squares examples") {
  CHECK(scalar(gan_loss(torch::ones({1, 1, 6, 6}, f64), GanTarget::Real)) == 0.0);
  CHECK(scalar(gan_loss(torch::zeros({1, 1, 6, 6}, f64), GanTarget::Real)) == 1.0);
  CHECK(scalar(gan_loss(torch::full({1, 1, 6, 6}, 0.5, f64), GanTarget::Fake)) == 0.25);
}

TEST_CASE("cycle: examples and oracle") {
  const Image a = testing::random_image(6, 7, 1);
  CHECK(cycle_loss(a, a) == 0.0);
  Image b = a;
  for (auto& v : b.values()) v = std::min(1.0, v + 0.1);
  Image c(4, 4, 0.3);
  CHECK(cycle_loss(c, Image(4, 4, 0.4)) == doctest::Approx(0.1).epsilon(1e-12));
  const Image d = testing::random_image(6, 7, 2);
  double oracle = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) oracle += std::abs(a.values()[i] - d.values()[i]);
  oracle /= static_cast<double>(a.values().size());
  CHECK(std::abs(cycle_loss(a, d) - oracle) < 1e-7);
  CHECK(std::abs(scalar(cycle_loss(image_tensor(a), image_tensor(d))) - oracle) < 1e-7);
  CHECK_THROWS_AS(cycle_loss(a, Image(6, 6, 0.1)), InvalidInput);
}

TEST_CASE("composites: encoder and negative objectives") {
  const LossWeights w;
  CHECK(encoder_objective(EncoderTerms<double>{1, 1, 1, 1, 1}, w) == doctest::Approx(2.111).epsilon(1e-15));
  CHECK(encoder_objective(EncoderTerms<double>{0, 0, 0, 0, 0}, w) == 0.0);

  LossWeights w2 = w;
  w2.lambda2 *= 2;
  w2.lambda3 *= 2;
  w2.lambda4 *= 2;
  w2.lambda5 *= 2;
  const EncoderTerms<double> t{0.7, 1.3, 0.4, 250.0, 0.08};
  const EncoderTerms<double> t2{1.4, 2.6, 0.8, 500.0, 0.16};
  const double oracle = 1.4 + 4 * (1.3 + 0.1 * 0.4 + 1e-3 * 250.0 + 1e-2 * 0.08);
  CHECK(encoder_objective(t2, w2) == doctest::Approx(oracle).epsilon(1e-14));

  CHECK(negative_objective(2.0, -0.5, w) == -2.5);
  CHECK(negative_objective(0.0, 0.0, w) == 0.0);
  // The tensor instantiation is the same formula.
  CHECK(scalar(negative_objective(torch::tensor(2.0, f64), torch::tensor(-0.5, f64), w)) == -2.5);
}

TEST_CASE("composites: a step on L_neg w.r.t. free negatives raises L_ac") {
  const LossWeights w;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto q = randn({8, 10}, 100 + s);
    const auto p = randn({8, 10}, 200 + s);
    auto n = randn({16, 10}, 300 + s).requires_grad_(true);
    auto objective = [&](const torch::Tensor& neg) {
      const auto ac = contrastive_term(q, p, neg, w.tau);
      const auto div = diversity_loss(neg.slice(0, 0, 8), neg.slice(0, 8, 16));
      return std::make_pair(ac, negative_objective(ac, div, w));
    };
    const auto [ac0, l0] = objective(n);
    const auto g = torch::autograd::grad({l0}, {n})[0];
    const auto n1 = (n - 1e-3 * g).detach();
    CHECK(scalar(objective(n1).first) > scalar(ac0));
  }
}

TEST_CASE("report: composites, finiteness and CSV") {
  LossReport r;
  r.step = 3;
  r.lr = 1e-4;
  r.forward = {2.0, 0.5, 0.3, -0.2};
  r.backward = PathTerms{1.5, 0.4, 0.2, -0.1};
  r.tv = 120.0;
  r.dc = 0.05;
  const LossWeights w;
  r.finalize(w);
  CHECK(std::abs(r.enc - (3.5 + 0.9 + 0.1 * 0.5 + 1e-3 * 120.0 + 1e-2 * 0.05)) < 1e-12);
  CHECK(std::abs(r.neg - (-3.5 + -0.3)) < 1e-12);
  CHECK(r.all_finite());
  CHECK(csv_header() == "step,ac,adv,cycle,tv,dc,div,enc,neg,lr");
  CHECK(csv_row(r).rfind("3,3.5,0.9,", 0) == 0);

  r.backward.reset();
  r.finalize(w);
  CHECK(std::abs(r.enc - (2.0 + 0.5 + 0.03 + 0.12 + 0.0005)) < 1e-12);
  r.tv = std::nan("");
  CHECK_FALSE(r.all_finite());
}

TEST_CASE("weights: validation") {
  LossWeights w;
  CHECK_NOTHROW(w.validate());
  w.tau = 0.0;
  CHECK_THROWS(w.validate());
  w = LossWeights{};
  w.lambda3 = -1.0;
  CHECK_THROWS(w.validate());
}

TEST_CASE("gradients: central differences at double precision") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto q = randn({4, 10}, 10 * s);
    const auto p = randn({4, 10}, 10 * s + 1);
    const auto n = randn({6, 10}, 10 * s + 2);
    CHECK(testing::gradient_error([&](const torch::Tensor& x) { return contrastive_term(x, p, n, 0.5); }, q) <= 1e-5);
    CHECK(testing::gradient_error([&](const torch::Tensor& x) { return contrastive_term(q, x, n, 0.5); }, p) <= 1e-5);
    CHECK(testing::gradient_error([&](const torch::Tensor& x) { return contrastive_term(q, p, x, 0.5); }, n) <= 1e-5);
    const auto other = randn({6, 10}, 10 * s + 3);
    CHECK(testing::gradient_error([&](const torch::Tensor& x) { return diversity_loss(x, other); }, n) <= 1e-5);
    const auto img = torch::rand({1, 3, 8, 8}, at::make_generator<at::CPUGeneratorImpl>(s), f64);
    CHECK(testing::gradient_error([](const torch::Tensor& x) { return tv_loss(x); }, img) <= 1e-5);
    CHECK(testing::gradient_error([](const torch::Tensor& x) { return dark_channel_loss(x, 1); }, img) <= 1e-5);
  }
}
