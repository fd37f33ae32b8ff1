#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "unhaze/losses.hpp"
#include "unhaze/networks.hpp"

namespace unhaze::trainer {

/// Where the contrastive negatives come from.
enum class NegativeSource {
  Adversarial,    // trained negative generators
  RandomSampled,  // projections of other locations of the input image
};

/// Every hyperparameter of a run. Defaults follow the full-scale recipe;
/// desk-scale runs override width, crop, negatives and epochs.
struct TrainConfig {
  std::int64_t epochs = 400;
  std::int64_t decay_start = 200;
  /// 0 means one pass over the larger dataset side.
  std::int64_t steps_per_epoch = 0;
  std::int64_t batch_size = 1;
  double lr = 1e-4;
  /// Learning rate of the negative generators; follows `lr` when unset.
  std::optional<double> lr_negative;
  double beta1 = 0.5;
  double beta2 = 0.999;

  std::int64_t crop = 256;
  std::int64_t negatives = 256;
  std::int64_t queries = 256;
  std::int64_t embed_dim = 256;
  std::int64_t noise_dim = 16;
  std::int64_t dc_radius = 7;
  losses::LossWeights weights;

  NegativeSource negative_source = NegativeSource::Adversarial;
  bool dual_cycle = true;

  networks::GeneratorSpec generator;
  std::int64_t disc_width = 64;
  std::int64_t disc_layers = 3;

  std::uint64_t seed = 0;
  torch::Dtype precision = torch::kFloat32;
  int threads = 1;
  /// Checkpoint every this many epochs; 0 writes only the final checkpoint.
  std::int64_t checkpoint_every = 0;

  std::filesystem::path hazy_dir;
  std::filesystem::path clean_dir;
  std::filesystem::path out_dir = "runs/default";

  double negative_lr() const noexcept { return lr_negative.value_or(lr); }

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// Names of every recognised configuration key, in documentation order.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value. Throws ConfigError for an unknown
/// key or a value of the wrong type.
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);

/// Textual value of every key (inverse of set_config_value).
std::vector<std::pair<std::string, std::string>> config_values(const TrainConfig& cfg);

std::string to_string(NegativeSource s);

/// Architecture fingerprint (FNV-1a over the network shape parameters).
std::string spec_hash(const TrainConfig& cfg);

}  // namespace unhaze::trainer
