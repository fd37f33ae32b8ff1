#include <algorithm>
#include <cstdio>
#include <fstream>

#include "unhaze/errors.hpp"
#include "unhaze/log.hpp"
#include "unhaze/seeding.hpp"
#include "unhaze/trainer.hpp"

namespace unhaze::trainer {

namespace fs = std::filesystem;

std::vector<imaging::UnpairedBatch> batch_for_step(const imaging::UnpairedDataset& ds, const TrainConfig& cfg,
                                                   std::int64_t step) {
  std::vector<imaging::UnpairedBatch> out;
  const auto b = static_cast<std::uint64_t>(cfg.batch_size);
  for (std::uint64_t i = 0; i < b; ++i) {
    const std::uint64_t index = static_cast<std::uint64_t>(step) * b + i;
    out.push_back(imaging::sample_unpaired_batch(ds, static_cast<std::size_t>(cfg.crop),
                                                 mix_seed(mix_seed(cfg.seed, 0xDA7A), index)));
  }
  return out;
}

std::int64_t steps_per_epoch(const TrainConfig& cfg, const imaging::UnpairedDataset& ds) {
  if (cfg.steps_per_epoch > 0) return cfg.steps_per_epoch;
  const auto larger = static_cast<std::int64_t>(std::max(ds.hazy().size(), ds.clean().size()));
  return std::max<std::int64_t>(1, larger / cfg.batch_size);
}

TrainArtifacts train(const TrainConfig& cfg, const imaging::UnpairedDataset& ds, const TrainHooks& hooks) {
  cfg.validate();
  if (static_cast<std::size_t>(cfg.crop) > ds.min_side()) {
    throw InvalidInput("crop " + std::to_string(cfg.crop) + " exceeds the smallest training image side");
  }
  at::set_num_threads(cfg.threads);

  std::unique_ptr<OptimState> state;
  if (hooks.resume_from) {
    LoadedCheckpoint ck = load_checkpoint(*hooks.resume_from);
    if (spec_hash(ck.config) != spec_hash(cfg)) {
      throw ConfigError("resume checkpoint was trained with a different architecture");
    }
    state = std::move(ck.state);
    log::info("resuming at epoch " + std::to_string(state->epoch) + ", step " + std::to_string(state->step));
  } else {
    state = std::make_unique<OptimState>(cfg);
  }

  fs::create_directories(cfg.out_dir);
  TrainArtifacts art;
  art.metrics_csv = cfg.out_dir / "metrics.csv";
  const bool append = hooks.resume_from.has_value() && fs::exists(art.metrics_csv);
  std::ofstream metrics(art.metrics_csv, append ? std::ios::app : std::ios::trunc);
  if (!metrics) throw DataError("cannot write " + art.metrics_csv.string());
  if (!append) metrics << losses::csv_header() << "\n";

  const std::int64_t per_epoch = steps_per_epoch(cfg, ds);
  const std::int64_t last_epoch =
      hooks.stop_after_epochs ? std::min(cfg.epochs, state->epoch + *hooks.stop_after_epochs) : cfg.epochs;

  while (state->epoch < last_epoch) {
    const std::int64_t epoch = state->epoch;
    state->set_lr_factor(lr_factor(epoch, cfg), cfg);
    for (std::int64_t i = 0; i < per_epoch; ++i) {
      const auto batch = batch_for_step(ds, cfg, state->step);
      const StepResult res = alternate_step(*state, batch, cfg);
      metrics << losses::csv_row(res.report) << "\n";
      art.last_report = res.report;
      if (hooks.on_step) hooks.on_step(res.report);
    }
    metrics.flush();
    state->epoch = epoch + 1;
    log::info("epoch " + std::to_string(state->epoch) + "/" + std::to_string(cfg.epochs) + "  " +
              losses::csv_row(art.last_report));
    if (cfg.checkpoint_every > 0 && state->epoch % cfg.checkpoint_every == 0 && state->epoch < cfg.epochs) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04lld", static_cast<long long>(state->epoch));
      const fs::path dir = cfg.out_dir / "checkpoints" / name;
      save_checkpoint(*state, cfg, dir);
      art.checkpoints.push_back(dir);
    }
  }

  art.final_checkpoint = cfg.out_dir / "checkpoints" / (state->epoch >= cfg.epochs ? "final" : "latest");
  save_checkpoint(*state, cfg, art.final_checkpoint);
  art.checkpoints.push_back(art.final_checkpoint);
  art.steps = state->step;
  return art;
}

}  // namespace unhaze::trainer
