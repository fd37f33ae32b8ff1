#include <cmath>
#include <sstream>

#include "unhaze/errors.hpp"
#include "unhaze/seeding.hpp"
#include "unhaze/trainer.hpp"

namespace unhaze::trainer {

using torch::Tensor;

namespace {

constexpr double kDivergenceLimit = 1e4;

// One translation direction: real -> fake -> rec, plus the encoder taps of real.
struct Direction {
  Tensor real;
  Tensor fake;
  Tensor rec;
  networks::FeatureStack source;
};

struct Translations {
  Tensor hazy;
  Tensor clean;
  Direction fwd;                 // hazy -> clean -> hazy through G then F
  std::optional<Direction> bwd;  // clean -> hazy -> clean through F then G
};

struct DirectionSampling {
  std::vector<Tensor> locations;
  std::vector<Tensor> noise;            // adversarial: [N, noise_dim] per tap
  std::vector<Tensor> pair_noise;       // adversarial with N = 1: extra [1, noise_dim] per tap
  std::vector<Tensor> other_locations;  // random_sampled: N indices per tap
};

struct StepSampling {
  DirectionSampling fwd;
  std::optional<DirectionSampling> bwd;
};

Tensor to_unit_range(const Tensor& x) { return (x + 1.0) * 0.5; }

Tensor stack_batch(const std::vector<imaging::UnpairedBatch>& batch, bool hazy, torch::Dtype dtype) {
  std::vector<Tensor> parts;
  parts.reserve(batch.size());
  for (const auto& b : batch) parts.push_back(networks::to_network_tensor(hazy ? b.hazy : b.clean, dtype));
  return torch::cat(parts, 0);
}

Translations translate(Networks& n, const Tensor& hazy, const Tensor& clean, bool dual) {
  Translations t;
  t.hazy = hazy;
  t.clean = clean;
  auto g = n.G->forward(hazy);
  t.fwd = Direction{hazy, g.image, n.F->translate(g.image), std::move(g.features)};
  if (dual) {
    auto f = n.F->forward(clean);
    t.bwd = Direction{clean, f.image, n.G->translate(f.image), std::move(f.features)};
  }
  return t;
}

// Indices of `count` locations outside `exclude`; without replacement when
// enough remain.
Tensor other_locations(std::int64_t total, const Tensor& exclude, std::int64_t count, torch::Generator& gen) {
  Tensor mask = torch::ones({total}, torch::kBool);
  mask.index_put_({exclude}, false);
  Tensor pool = torch::nonzero(mask).reshape(-1);
  if (pool.numel() == 0) pool = torch::arange(total, torch::kLong);
  if (pool.numel() >= count) {
    return pool.index_select(0, torch::randperm(pool.numel(), gen, torch::kLong).slice(0, 0, count));
  }
  return pool.index_select(0, torch::randint(pool.numel(), {count}, gen, torch::kLong));
}

DirectionSampling sample_direction(const networks::FeatureStack& source, const TrainConfig& cfg,
                                   torch::Generator& gen) {
  DirectionSampling s;
  s.locations = networks::sample_locations(source, cfg.queries, gen);
  for (std::size_t i = 0; i < source.maps.size(); ++i) {
    if (cfg.negative_source == NegativeSource::Adversarial) {
      s.noise.push_back(networks::draw_noise(cfg.negatives, cfg.noise_dim, gen, cfg.precision));
      if (cfg.negatives == 1) s.pair_noise.push_back(networks::draw_noise(1, cfg.noise_dim, gen, cfg.precision));
    } else {
      const auto& map = source.maps[i];
      const std::int64_t total = map.size(0) * map.size(2) * map.size(3);
      s.other_locations.push_back(other_locations(total, s.locations[i], cfg.negatives, gen));
    }
  }
  return s;
}

StepSampling sample_step(const Translations& t, const TrainConfig& cfg, torch::Generator& gen) {
  StepSampling s;
  s.fwd = sample_direction(t.fwd.source, cfg, gen);
  if (t.bwd) s.bwd = sample_direction(t.bwd->source, cfg, gen);
  return s;
}

networks::EmbeddingSet embed(networks::Generator& encoder, networks::ProjectionHead& head, const Direction& d,
                             const DirectionSampling& s) {
  const networks::FeatureStack generated = encoder->encode(d.fake);
  return {head->project(generated, s.locations), head->project(d.source, s.locations)};
}

std::vector<Tensor> mean_features(const networks::EmbeddingSet& e) {
  std::vector<Tensor> out;
  for (const auto& q : e.queries) out.push_back(q.detach().mean(0));
  return out;
}

Tensor diversity(networks::NegativeGenerator& gen, const std::vector<Tensor>& mean_feats,
                 const networks::NegativeBank& bank, const DirectionSampling& s) {
  Tensor total;
  for (std::size_t i = 0; i < bank.per_tap.size(); ++i) {
    const Tensor& b = bank.per_tap[i];
    Tensor term;
    if (b.size(0) >= 2) {
      const std::int64_t half = b.size(0) / 2;
      term = losses::diversity_loss(b.slice(0, 0, half), b.slice(0, half, 2 * half));
    } else {
      term = losses::diversity_loss(b, gen->forward(i, mean_feats[i], s.pair_noise[i]));
    }
    total = total.defined() ? total + term : term;
  }
  return total / static_cast<double>(bank.per_tap.size());
}

class FreezeGuard {
 public:
  explicit FreezeGuard(std::vector<Tensor> params) : params_(std::move(params)) {
    for (auto& p : params_) p.set_requires_grad(false);
  }
  ~FreezeGuard() {
    for (auto& p : params_) p.set_requires_grad(true);
  }
  FreezeGuard(const FreezeGuard&) = delete;
  FreezeGuard& operator=(const FreezeGuard&) = delete;

 private:
  std::vector<Tensor> params_;
};

struct PathTensors {
  Tensor ac;
  Tensor adv;
  Tensor cycle;
};

struct EncoderPass {
  PathTensors fwd;
  std::optional<PathTensors> bwd;
  Tensor tv;
  Tensor dc;
  Tensor total;
};

PathTensors path_terms(networks::Generator& encoder, networks::ProjectionHead& head,
                       networks::NegativeGenerator& neg_gen, networks::PatchDiscriminator& disc, const Direction& d,
                       const DirectionSampling& s, const TrainConfig& cfg) {
  PathTensors out;
  const networks::EmbeddingSet emb = embed(encoder, head, d, s);
  networks::NegativeBank bank;
  if (cfg.negative_source == NegativeSource::Adversarial) {
    // The representation step treats the adversary's negatives as constants.
    torch::NoGradGuard no_grad;
    bank = neg_gen->bank(mean_features(emb), s.noise);
  } else {
    bank.per_tap = head->project(d.source, s.other_locations);
  }
  out.ac = losses::adversarial_contrastive_loss(emb, bank, cfg.weights.tau);
  out.adv = losses::gan_loss(disc->forward(d.fake), losses::GanTarget::Real);
  out.cycle = losses::cycle_loss(to_unit_range(d.rec), to_unit_range(d.real));
  return out;
}

EncoderPass encoder_pass(Networks& n, const Translations& t, const StepSampling& s, const TrainConfig& cfg) {
  EncoderPass p;
  p.fwd = path_terms(n.G, n.R_G, n.N_G, n.D_G, t.fwd, s.fwd, cfg);
  if (t.bwd) p.bwd = path_terms(n.F, n.R_F, n.N_F, n.D_F, *t.bwd, *s.bwd, cfg);
  const Tensor dehazed = to_unit_range(t.fwd.fake);
  p.tv = losses::tv_loss(dehazed);
  p.dc = losses::dark_channel_loss(dehazed, cfg.dc_radius);

  losses::EncoderTerms<Tensor> terms{p.fwd.ac, p.fwd.adv, p.fwd.cycle, p.tv, p.dc};
  if (p.bwd) {
    terms.ac = terms.ac + p.bwd->ac;
    terms.adv = terms.adv + p.bwd->adv;
    terms.cycle = terms.cycle + p.bwd->cycle;
  }
  p.total = losses::encoder_objective(terms, cfg.weights);
  return p;
}

Tensor discriminator_objective(Networks& n, const Translations& t) {
  using losses::GanTarget;
  Tensor loss = 0.5 * (losses::gan_loss(n.D_G->forward(t.clean), GanTarget::Real) +
                       losses::gan_loss(n.D_G->forward(t.fwd.fake.detach()), GanTarget::Fake));
  if (t.bwd) {
    loss = loss + 0.5 * (losses::gan_loss(n.D_F->forward(t.hazy), GanTarget::Real) +
                         losses::gan_loss(n.D_F->forward(t.bwd->fake.detach()), GanTarget::Fake));
  }
  return loss;
}

struct NegativePass {
  Tensor ac;
  Tensor div;
};

NegativePass negative_direction(networks::NegativeGenerator& neg_gen, const networks::EmbeddingSet& emb,
                                const DirectionSampling& s, const TrainConfig& cfg) {
  const auto means = mean_features(emb);
  const networks::NegativeBank bank = neg_gen->bank(means, s.noise);
  return {losses::adversarial_contrastive_loss(emb, bank, cfg.weights.tau), diversity(neg_gen, means, bank, s)};
}

double value(const Tensor& t) { return t.detach().to(torch::kFloat64).item<double>(); }

class Guard {
 public:
  explicit Guard(std::int64_t step) : step_(step) {}
  void check(const char* name, double v) const {
    if (!std::isfinite(v) || std::abs(v) > kDivergenceLimit) {
      std::ostringstream os;
      os << "training diverged at step " << step_ << ": " << name << " = " << v;
      throw DivergenceError(os.str());
    }
  }

 private:
  std::int64_t step_;
};

torch::Generator step_generator(const TrainConfig& cfg, std::int64_t step) {
  return at::make_generator<at::CPUGeneratorImpl>(
      mix_seed(mix_seed(cfg.seed, 0x5A3B), static_cast<std::uint64_t>(step)));
}

}  // namespace

StepObjectives evaluate_objectives(Networks& n, const std::vector<imaging::UnpairedBatch>& batch,
                                   const TrainConfig& cfg, std::int64_t step) {
  if (batch.empty()) throw InvalidInput("objective evaluation needs a non-empty batch");
  const Tensor hazy = stack_batch(batch, true, cfg.precision);
  const Tensor clean = stack_batch(batch, false, cfg.precision);
  auto gen = step_generator(cfg, step);
  const Translations t = translate(n, hazy, clean, cfg.dual_cycle);
  const StepSampling sampling = sample_step(t, cfg, gen);

  StepObjectives out;
  out.enc = encoder_pass(n, t, sampling, cfg).total;
  if (cfg.negative_source == NegativeSource::Adversarial) {
    networks::EmbeddingSet emb_fwd;
    std::optional<networks::EmbeddingSet> emb_bwd;
    {
      torch::NoGradGuard no_grad;
      emb_fwd = embed(n.G, n.R_G, t.fwd, sampling.fwd);
      if (t.bwd) emb_bwd = embed(n.F, n.R_F, *t.bwd, *sampling.bwd);
    }
    NegativePass p = negative_direction(n.N_G, emb_fwd, sampling.fwd, cfg);
    if (emb_bwd) {
      const NegativePass b = negative_direction(n.N_F, *emb_bwd, *sampling.bwd, cfg);
      p.ac = p.ac + b.ac;
      p.div = p.div + b.div;
    }
    out.neg = losses::negative_objective(p.ac, p.div, cfg.weights);
  }
  return out;
}

StepResult alternate_step(OptimState& state, const std::vector<imaging::UnpairedBatch>& batch, const TrainConfig& cfg,
                          const StepOptions& options) {
  if (batch.empty()) throw InvalidInput("alternate step needs a non-empty batch");
  Networks& n = state.nets;
  const Guard guard(state.step + 1);
  const bool adversarial = cfg.negative_source == NegativeSource::Adversarial;

  const Tensor hazy = stack_batch(batch, true, cfg.precision);
  const Tensor clean = stack_batch(batch, false, cfg.precision);
  auto gen = step_generator(cfg, state.step);

  StepResult result;
  losses::LossReport& r = result.report;
  if (options.probe) result.probe = StepProbe{};

  Translations t = translate(n, hazy, clean, cfg.dual_cycle);
  const StepSampling sampling = sample_step(t, cfg, gen);

  // 1. discriminators
  {
    const Tensor d_loss = discriminator_objective(n, t);
    r.disc = value(d_loss);
    guard.check("discriminator", r.disc);
    state.opt_D->zero_grad();
    d_loss.backward();
    state.opt_D->step();
  }

  // 2. representation parameters: descent on the encoder objective
  {
    EncoderPass pass;
    {
      FreezeGuard frozen(n.discriminator_parameters());
      pass = encoder_pass(n, t, sampling, cfg);
    }
    r.forward = {value(pass.fwd.ac), value(pass.fwd.adv), value(pass.fwd.cycle), 0.0};
    if (pass.bwd) r.backward = losses::PathTerms{value(pass.bwd->ac), value(pass.bwd->adv), value(pass.bwd->cycle), 0.0};
    r.tv = value(pass.tv);
    r.dc = value(pass.dc);
    const double enc = value(pass.total);
    guard.check("ac", r.ac());
    guard.check("adv", cfg.weights.lambda2 * r.adv());
    guard.check("cycle", cfg.weights.lambda3 * r.cycle());
    guard.check("tv", cfg.weights.lambda4 * r.tv);
    guard.check("dc", cfg.weights.lambda5 * r.dc);
    guard.check("enc", enc);

    state.opt_R->zero_grad();
    pass.total.backward();
    state.opt_R->step();

    if (result.probe) {
      torch::NoGradGuard no_grad;
      result.probe->enc_before = enc;
      const Translations after = translate(n, hazy, clean, cfg.dual_cycle);
      result.probe->enc_after = value(encoder_pass(n, after, sampling, cfg).total);
    }
  }

  // 3. negative generators: descent on -L_ac + lambda1 L_div
  if (adversarial) {
    networks::EmbeddingSet emb_fwd;
    std::optional<networks::EmbeddingSet> emb_bwd;
    {
      torch::NoGradGuard no_grad;
      const Translations fresh = translate(n, hazy, clean, cfg.dual_cycle);
      emb_fwd = embed(n.G, n.R_G, fresh.fwd, sampling.fwd);
      if (fresh.bwd) emb_bwd = embed(n.F, n.R_F, *fresh.bwd, *sampling.bwd);
    }
    const NegativePass fwd = negative_direction(n.N_G, emb_fwd, sampling.fwd, cfg);
    Tensor ac = fwd.ac;
    Tensor div = fwd.div;
    r.forward.div = value(fwd.div);
    if (emb_bwd) {
      const NegativePass bwd = negative_direction(n.N_F, *emb_bwd, *sampling.bwd, cfg);
      ac = ac + bwd.ac;
      div = div + bwd.div;
      r.backward->div = value(bwd.div);
    }
    const Tensor neg = losses::negative_objective(ac, div, cfg.weights);
    guard.check("neg", value(neg));
    state.opt_N->zero_grad();
    neg.backward();
    state.opt_N->step();

    if (result.probe) {
      torch::NoGradGuard no_grad;
      result.probe->ac_before = value(ac);
      double after = value(negative_direction(n.N_G, emb_fwd, sampling.fwd, cfg).ac);
      if (emb_bwd) after += value(negative_direction(n.N_F, *emb_bwd, *sampling.bwd, cfg).ac);
      result.probe->ac_after = after;
    }
  }

  r.lr = static_cast<torch::optim::AdamOptions&>(state.opt_R->param_groups().front().options()).lr();
  r.finalize(cfg.weights);
  ++state.step;
  r.step = state.step;
  return result;
}

}  // namespace unhaze::trainer
