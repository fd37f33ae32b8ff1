#pragma once

// Alternating minimax training: discriminators, then the representation
// parameters (generators and projection heads) by descent on the encoder
// objective, then the negative generators by descent on the negative
// objective, which ascends the contrastive loss.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <torch/torch.h>

#include "unhaze/config.hpp"
#include "unhaze/imaging.hpp"
#include "unhaze/losses.hpp"
#include "unhaze/networks.hpp"

namespace unhaze::trainer {

/// Learning rate of the representation parameters at `epoch`: constant until
/// decay_start, then linear to zero at `epochs`.
double lr_schedule(std::int64_t epoch, const TrainConfig& cfg);
/// Multiplier applied to every base learning rate at `epoch`.
double lr_factor(std::int64_t epoch, const TrainConfig& cfg);

/// All networks of the framework. G maps hazy to clean, F clean to hazy.
struct Networks {
  networks::Generator G{nullptr};
  networks::Generator F{nullptr};
  networks::PatchDiscriminator D_G{nullptr};  // judges G's outputs (clean domain)
  networks::PatchDiscriminator D_F{nullptr};  // judges F's outputs (hazy domain)
  networks::ProjectionHead R_G{nullptr};
  networks::ProjectionHead R_F{nullptr};
  networks::NegativeGenerator N_G{nullptr};
  networks::NegativeGenerator N_F{nullptr};

  /// Builds and seeds every network for `cfg`.
  static Networks create(const TrainConfig& cfg);

  /// Generators and projection heads.
  std::vector<torch::Tensor> representation_parameters() const;
  std::vector<torch::Tensor> discriminator_parameters() const;
  std::vector<torch::Tensor> negative_parameters() const;
};

/// Parameters, optimiser moments and counters.
class OptimState {
 public:
  explicit OptimState(const TrainConfig& cfg);

  Networks nets;
  std::unique_ptr<torch::optim::Adam> opt_R;
  std::unique_ptr<torch::optim::Adam> opt_D;
  std::unique_ptr<torch::optim::Adam> opt_N;
  /// Completed epochs.
  std::int64_t epoch = 0;
  /// Completed alternate steps.
  std::int64_t step = 0;

  /// Applies the schedule factor to every optimiser.
  void set_lr_factor(double factor, const TrainConfig& cfg);
};

/// Before/after values around each sub-step, evaluated on identical inputs,
/// locations and noise.
struct StepProbe {
  double enc_before = 0.0;
  double enc_after = 0.0;
  double ac_before = 0.0;
  double ac_after = 0.0;
};

struct StepResult {
  losses::LossReport report;
  std::optional<StepProbe> probe;
};

struct StepOptions {
  bool probe = false;
};

/// Draws the batch for `step` from the dataset (deterministic in seed and step).
std::vector<imaging::UnpairedBatch> batch_for_step(const imaging::UnpairedDataset& ds, const TrainConfig& cfg, std::int64_t step);

/// One discriminator update, one representation update, one negative
/// update. Throws DivergenceError on a non-finite or runaway loss before
/// applying the offending update.
StepResult alternate_step(OptimState& state, const std::vector<imaging::UnpairedBatch>& batch, const TrainConfig& cfg,
                          const StepOptions& options = {});

/// Both objectives of one step with the step's sampling, without any update.
/// `enc` reaches the generators and projection heads, `neg` the negative
/// generators (its embeddings are constants, as in the step itself).
struct StepObjectives {
  torch::Tensor enc;
  torch::Tensor neg;
};
StepObjectives evaluate_objectives(Networks& nets, const std::vector<imaging::UnpairedBatch>& batch,
                                   const TrainConfig& cfg, std::int64_t step);

// ---------------------------------------------------------------------------
// Checkpoints

struct LoadedCheckpoint {
  TrainConfig config;
  std::unique_ptr<OptimState> state;
};

/// Writes every network, optimiser and a manifest into `dir`. Each file is
/// written to a temporary name and renamed; the manifest goes last.
void save_checkpoint(const OptimState& state, const TrainConfig& cfg, const std::filesystem::path& dir);

/// Throws MissingCheckpoint when `dir` has no manifest and DataError when the
/// manifest and the stored networks disagree.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Loop

struct TrainArtifacts {
  std::filesystem::path metrics_csv;
  std::filesystem::path final_checkpoint;
  std::vector<std::filesystem::path> checkpoints;
  losses::LossReport last_report;
  std::int64_t steps = 0;
};

struct TrainHooks {
  std::function<void(const losses::LossReport&)> on_step;
  /// Continue from this checkpoint instead of a fresh initialisation.
  std::optional<std::filesystem::path> resume_from;
  /// Stop after this many epochs in this call (for interrupted-run tests).
  std::optional<std::int64_t> stop_after_epochs;
};

std::int64_t steps_per_epoch(const TrainConfig& cfg, const imaging::UnpairedDataset& ds);

/// Trains, writing `out_dir/metrics.csv` and checkpoints under
/// `out_dir/checkpoints/`.
TrainArtifacts train(const TrainConfig& cfg, const imaging::UnpairedDataset& ds, const TrainHooks& hooks = {});

}  // namespace unhaze::trainer
