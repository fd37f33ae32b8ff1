#include "unhaze/seeding.hpp"
#include "unhaze/trainer.hpp"

namespace unhaze::trainer {

namespace {

void append(std::vector<torch::Tensor>& out, const torch::nn::Module& m) {
  for (const auto& p : m.parameters()) out.push_back(p);
}

torch::optim::AdamOptions adam(double lr, const TrainConfig& cfg) {
  return torch::optim::AdamOptions(lr).betas({cfg.beta1, cfg.beta2});
}

}  // namespace

Networks Networks::create(const TrainConfig& cfg) {
  Networks n;
  n.G = networks::Generator(cfg.generator);
  n.F = networks::Generator(cfg.generator);
  n.D_G = networks::PatchDiscriminator(cfg.disc_width, cfg.disc_layers);
  n.D_F = networks::PatchDiscriminator(cfg.disc_width, cfg.disc_layers);
  const auto tap_channels = n.G->tap_channels();
  n.R_G = networks::ProjectionHead(tap_channels, cfg.embed_dim);
  n.R_F = networks::ProjectionHead(tap_channels, cfg.embed_dim);
  n.N_G = networks::NegativeGenerator(tap_channels.size(), cfg.embed_dim, cfg.noise_dim);
  n.N_F = networks::NegativeGenerator(tap_channels.size(), cfg.embed_dim, cfg.noise_dim);

  std::uint64_t stream = 1;
  const std::vector<std::shared_ptr<torch::nn::Module>> all{n.G.ptr(),   n.F.ptr(),   n.D_G.ptr(), n.D_F.ptr(),
                                                             n.R_G.ptr(), n.R_F.ptr(), n.N_G.ptr(), n.N_F.ptr()};
  for (const auto& m : all) {
    networks::init_parameters(*m, mix_seed(cfg.seed, stream++));
    m->to(cfg.precision);
  }
  return n;
}

std::vector<torch::Tensor> Networks::representation_parameters() const {
  std::vector<torch::Tensor> out;
  append(out, *G);
  append(out, *F);
  append(out, *R_G);
  append(out, *R_F);
  return out;
}

std::vector<torch::Tensor> Networks::discriminator_parameters() const {
  std::vector<torch::Tensor> out;
  append(out, *D_G);
  append(out, *D_F);
  return out;
}

std::vector<torch::Tensor> Networks::negative_parameters() const {
  std::vector<torch::Tensor> out;
  append(out, *N_G);
  append(out, *N_F);
  return out;
}

OptimState::OptimState(const TrainConfig& cfg) : nets(Networks::create(cfg)) {
  opt_R = std::make_unique<torch::optim::Adam>(nets.representation_parameters(), adam(cfg.lr, cfg));
  opt_D = std::make_unique<torch::optim::Adam>(nets.discriminator_parameters(), adam(cfg.lr, cfg));
  opt_N = std::make_unique<torch::optim::Adam>(nets.negative_parameters(), adam(cfg.negative_lr(), cfg));
}

void OptimState::set_lr_factor(double factor, const TrainConfig& cfg) {
  auto apply = [](torch::optim::Adam& opt, double lr) {
    for (auto& group : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
  };
  apply(*opt_R, cfg.lr * factor);
  apply(*opt_D, cfg.lr * factor);
  apply(*opt_N, cfg.negative_lr() * factor);
}

}  // namespace unhaze::trainer
