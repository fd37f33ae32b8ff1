#include <algorithm>

#include "unhaze/trainer.hpp"

namespace unhaze::trainer {

double lr_factor(std::int64_t epoch, const TrainConfig& cfg) {
  if (epoch < cfg.decay_start) return 1.0;
  const std::int64_t span = cfg.epochs - cfg.decay_start;
  if (span <= 0 || epoch >= cfg.epochs) return 0.0;
  return static_cast<double>(cfg.epochs - epoch) / static_cast<double>(span);
}

double lr_schedule(std::int64_t epoch, const TrainConfig& cfg) { return cfg.lr * lr_factor(epoch, cfg); }

}  // namespace unhaze::trainer
