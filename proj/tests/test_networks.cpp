#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest_torch.hpp"

#include <cmath>

#include "support.hpp"
#include "unhaze/errors.hpp"
#include "unhaze/networks.hpp"
#include "unhaze/trainer.hpp"

using namespace unhaze;
using namespace unhaze::networks;

namespace {

Generator small_generator(std::int64_t width = 8) {
  GeneratorSpec spec;
  spec.base_width = width;
  Generator g(spec);
  init_parameters(*g, 1);
  return g;
}

torch::Tensor random_input(std::int64_t h, std::int64_t w, std::uint64_t seed, torch::Dtype dtype = torch::kFloat32) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  return torch::rand({1, 3, h, w}, gen, torch::TensorOptions().dtype(dtype)) * 2.0 - 1.0;
}

void check_unit_rows(const torch::Tensor& t) {
  const auto norms = t.to(torch::kFloat64).norm(2, 1);
  CHECK((norms - 1.0).abs().max().item<double>() < 1e-5);
}

}  // namespace

TEST_CASE("image tensors: range mapping round trip") {
  const Image img = testing::random_image(5, 6, 3);
  const auto t = to_network_tensor(img, torch::kFloat64);
  CHECK(t.sizes() == torch::IntArrayRef({1, 3, 5, 6}));
  CHECK(t.min().item<double>() >= -1.0);
  CHECK(t.max().item<double>() <= 1.0);
  CHECK(t[0][1][2][3].item<double>() == doctest::Approx(2 * img(2, 3, 1) - 1).epsilon(1e-15));
  const Image back = from_network_tensor(t);
  for (std::size_t i = 0; i < img.values().size(); ++i)
    CHECK(back.values()[i] == doctest::Approx(img.values()[i]).epsilon(1e-14));
}

TEST_CASE("generator spec: validation and layer arithmetic") {
  GeneratorSpec spec;
  CHECK(spec.encoder_depth() == 19);
  CHECK(spec.stride() == 4);
  CHECK_NOTHROW(spec.validate());
  spec.taps = {1, 5, 5};
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec.taps = {1, 20};
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
  spec.taps = {1, 5};
  spec.res_blocks = 0;
  CHECK_THROWS_AS(spec.validate(), InvalidInput);
}

TEST_CASE("generator: 64x64 in, 64x64 out, five taps") {
  auto g = small_generator();
  torch::NoGradGuard ng;
  const auto out = g->forward(random_input(64, 64, 0));
  CHECK(out.image.sizes() == torch::IntArrayRef({1, 3, 64, 64}));
  REQUIRE(out.features.maps.size() == 5);
  const auto channels = g->tap_channels();
  const std::vector<std::int64_t> sides{70, 32, 16, 16, 16};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(out.features.maps[i].size(1) == channels[i]);
    CHECK(out.features.maps[i].size(2) == sides[i]);
    CHECK(out.features.maps[i].size(3) == sides[i]);
  }
  CHECK(channels == std::vector<std::int64_t>{3, 16, 32, 32, 32});
}

TEST_CASE("generator: bounded, deterministic, encode agrees with forward") {
  auto g = small_generator();
  torch::NoGradGuard ng;
  const auto x = random_input(32, 48, 5) * 3.0;
  const auto a = g->forward(x);
  const auto b = g->forward(x);
  CHECK(a.image.min().item<double>() >= -1.0);
  CHECK(a.image.max().item<double>() <= 1.0);
  CHECK(torch::equal(a.image, b.image));
  const auto enc = g->encode(x);
  REQUIRE(enc.maps.size() == a.features.maps.size());
  for (std::size_t i = 0; i < enc.maps.size(); ++i) CHECK(torch::equal(enc.maps[i], a.features.maps[i]));
  CHECK(torch::equal(g->translate(x), a.image));
}

TEST_CASE("generator: spatial size not divisible by the stride is rejected") {
  auto g = small_generator();
  CHECK_THROWS_AS(g->forward(random_input(30, 32, 0)), InvalidInput);
  CHECK_THROWS_AS(g->forward(torch::zeros({1, 1, 32, 32})), InvalidInput);
}

TEST_CASE("projection head: unit norms, cardinality, determinism, range checks") {
  auto g = small_generator();
  ProjectionHead head(g->tap_channels(), 32);
  init_parameters(*head, 2);
  torch::NoGradGuard ng;
  const auto fs = g->encode(random_input(64, 64, 1));
  auto gen = at::make_generator<at::CPUGeneratorImpl>(9);
  const auto locs = sample_locations(fs, 64, gen);
  const auto emb = head->project(fs, locs);
  REQUIRE(emb.size() == 5);
  for (const auto& e : emb) {
    CHECK(e.size(0) == 64);
    CHECK(e.size(1) == 32);
    check_unit_rows(e);
  }
  const auto again = head->project(fs, locs);
  for (std::size_t i = 0; i < emb.size(); ++i) CHECK(torch::equal(emb[i], again[i]));

  auto bad = locs;
  bad[2] = torch::tensor({std::int64_t{16 * 16}});
  CHECK_THROWS_AS(head->project(fs, bad), InvalidInput);
}

TEST_CASE("sample_locations: distinct indices, capped by the map size") {
  FeatureStack fs;
  fs.maps.push_back(torch::zeros({1, 4, 3, 3}));
  fs.maps.push_back(torch::zeros({1, 4, 10, 10}));
  auto gen = at::make_generator<at::CPUGeneratorImpl>(1);
  const auto locs = sample_locations(fs, 20, gen);
  CHECK(locs[0].numel() == 9);
  CHECK(locs[1].numel() == 20);
  CHECK(std::get<0>(torch::_unique(locs[1])).numel() == 20);
}

TEST_CASE("negative generator: unit rows, distinct draws, bank of 256") {
  NegativeGenerator neg(5, 32, 16);
  init_parameters(*neg, 3);
  torch::NoGradGuard ng;
  auto gen = at::make_generator<at::CPUGeneratorImpl>(4);
  const auto mean = torch::randn({32}, gen);
  const auto noise = draw_noise(100, 16, gen);
  const auto out = neg->forward(1, mean, noise);
  check_unit_rows(out);
  const auto gaps = torch::cdist(out, out);
  const auto off_diag = gaps + torch::eye(100) * 10.0;
  CHECK(off_diag.min().item<double>() > 0.0);
  CHECK(torch::equal(out, neg->forward(1, mean, noise)));

  std::vector<torch::Tensor> means(5, mean);
  std::vector<torch::Tensor> noises;
  for (int i = 0; i < 5; ++i) noises.push_back(draw_noise(256, 16, gen));
  const auto bank = neg->bank(means, noises);
  CHECK(bank.size() == 256);
  for (const auto& b : bank.per_tap) {
    CHECK(b.size(0) == 256);
    check_unit_rows(b);
  }
  CHECK_THROWS_AS(neg->forward(0, mean, draw_noise(3, 8, gen)), InvalidInput);
  CHECK_THROWS_AS(neg->forward(0, torch::zeros({31}), noise), InvalidInput);
}

TEST_CASE("discriminator: 64x64 gives a finite 6x6 grid, deterministic") {
  PatchDiscriminator d(16, 3);
  init_parameters(*d, 5);
  torch::NoGradGuard ng;
  const auto x = random_input(64, 64, 2);
  const auto s = d->forward(x);
  CHECK(s.sizes() == torch::IntArrayRef({1, 1, 6, 6}));
  CHECK(torch::isfinite(s).all().item<bool>());
  CHECK(torch::equal(s, d->forward(x)));
}

TEST_CASE("discriminator: shifting the input by the total stride shifts interior scores") {
  // Without instance norm every score depends only on its receptive field.
  // Cell j sees input columns [8j - 23, 8j + 47); for a 152-wide input the
  // padding-free cells are j in [3, 13].
  PatchDiscriminator d(8, 3, false);
  d->to(torch::kFloat64);
  init_parameters(*d, 6);
  torch::NoGradGuard ng;
  const auto x = random_input(160, 160, 3, torch::kFloat64);
  using torch::indexing::Slice;
  const auto a = d->forward(x.index({Slice(), Slice(), Slice(0, 152), Slice(0, 152)}));
  const auto b = d->forward(x.index({Slice(), Slice(), Slice(8, 160), Slice(8, 160)}));
  REQUIRE(a.size(2) == 17);
  const auto inner_a = a.index({0, 0, Slice(4, 14), Slice(4, 14)});
  const auto inner_b = b.index({0, 0, Slice(3, 13), Slice(3, 13)});
  CHECK((inner_a - inner_b).abs().max().item<double>() < 1e-12);
  // Border cells do see the padding.
  CHECK((a.index({0, 0, 1, 1}) - b.index({0, 0, 0, 0})).abs().item<double>() > 0.0);
}

TEST_CASE("init: reproducible, seed-sensitive, finite and small") {
  auto a = small_generator();
  auto b = small_generator();
  CHECK(torch::equal(flatten_parameters(*a), flatten_parameters(*b)));
  GeneratorSpec spec;
  spec.base_width = 8;
  Generator c(spec);
  init_parameters(*c, 2);
  CHECK_FALSE(torch::equal(flatten_parameters(*a), flatten_parameters(*c)));
  const auto flat = flatten_parameters(*a);
  CHECK(torch::isfinite(flat).all().item<bool>());
  CHECK(flat.abs().max().item<double>() < 1.0);
}

TEST_CASE("gradient census: every trainable parameter receives gradient") {
  trainer::TrainConfig cfg;
  cfg.crop = 32;
  cfg.negatives = 16;
  cfg.queries = 32;
  cfg.embed_dim = 32;
  cfg.generator.base_width = 8;
  cfg.disc_width = 8;
  cfg.seed = 11;
  auto nets = trainer::Networks::create(cfg);
  std::vector<imaging::UnpairedBatch> batch{{testing::random_image(32, 32, 1), testing::random_image(32, 32, 2)}};
  const auto obj = trainer::evaluate_objectives(nets, batch, cfg, 0);

  auto census = [](const std::vector<torch::Tensor>& params) {
    std::int64_t total = 0;
    std::int64_t dead = 0;
    for (const auto& p : params) {
      REQUIRE(p.grad().defined());
      CHECK(p.grad().abs().max().item<double>() > 0.0);
      total += p.numel();
      dead += (p.grad() == 0).sum().item<std::int64_t>();
    }
    return static_cast<double>(dead) / static_cast<double>(total);
  };

  obj.enc.backward();
  CHECK(census(nets.representation_parameters()) <= 0.01);
  for (const auto& p : nets.negative_parameters()) CHECK_FALSE(p.grad().defined());

  obj.neg.backward();
  CHECK(census(nets.negative_parameters()) <= 0.01);
}
