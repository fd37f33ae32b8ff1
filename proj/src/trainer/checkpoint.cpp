#include <fstream>

#include <json.hpp>

#include "unhaze/errors.hpp"
#include "unhaze/trainer.hpp"

namespace unhaze::trainer {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kFormat = "unhaze-checkpoint/1";

template <class Fn>
void write_atomically(const fs::path& target, Fn&& write) {
  fs::path tmp = target;
  tmp += ".tmp";
  write(tmp);
  fs::rename(tmp, target);
}

template <class Holder>
void save_module(const Holder& module, const fs::path& path) {
  write_atomically(path, [&](const fs::path& tmp) { torch::save(module, tmp.string()); });
}

void save_optimizer(const torch::optim::Optimizer& opt, const fs::path& path) {
  write_atomically(path, [&](const fs::path& tmp) {
    torch::serialize::OutputArchive archive;
    opt.save(archive);
    archive.save_to(tmp.string());
  });
}

template <class Holder>
void load_module(Holder& module, const fs::path& path) {
  if (!fs::exists(path)) throw DataError("checkpoint file missing: " + path.string());
  torch::load(module, path.string());
}

void load_optimizer(torch::optim::Optimizer& opt, const fs::path& path) {
  if (!fs::exists(path)) throw DataError("checkpoint file missing: " + path.string());
  torch::serialize::InputArchive archive;
  archive.load_from(path.string());
  opt.load(archive);
}

}  // namespace

void save_checkpoint(const OptimState& state, const TrainConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  // Invalidate first so a crash mid-write never leaves a stale manifest
  // pointing at a mix of old and new files.
  fs::remove(dir / kManifest);

  const Networks& n = state.nets;
  save_module(n.G, dir / "G.pt");
  save_module(n.F, dir / "F.pt");
  save_module(n.D_G, dir / "D_G.pt");
  save_module(n.D_F, dir / "D_F.pt");
  save_module(n.R_G, dir / "R_G.pt");
  save_module(n.R_F, dir / "R_F.pt");
  save_module(n.N_G, dir / "N_G.pt");
  save_module(n.N_F, dir / "N_F.pt");
  save_optimizer(*state.opt_R, dir / "optim_R.pt");
  save_optimizer(*state.opt_D, dir / "optim_D.pt");
  save_optimizer(*state.opt_N, dir / "optim_N.pt");

  json manifest;
  manifest["format"] = kFormat;
  manifest["spec_hash"] = spec_hash(cfg);
  manifest["epoch"] = state.epoch;
  manifest["step"] = state.step;
  json config = json::object();
  for (const auto& [key, value] : config_values(cfg)) config[key] = value;
  manifest["config"] = config;
  manifest["files"] = {"G.pt",   "F.pt",   "D_G.pt",     "D_F.pt",     "R_G.pt",    "R_F.pt",
                       "N_G.pt", "N_F.pt", "optim_R.pt", "optim_D.pt", "optim_N.pt"};
  write_atomically(dir / kManifest, [&](const fs::path& tmp) {
    std::ofstream out(tmp);
    out << manifest.dump(2) << "\n";
    if (!out) throw DataError("failed to write checkpoint manifest in " + dir.string());
  });
}

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifest;
  if (!fs::exists(manifest_path)) throw MissingCheckpoint("no checkpoint manifest in " + dir.string());

  json manifest;
  try {
    std::ifstream in(manifest_path);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("unreadable checkpoint manifest " + manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kFormat) throw DataError("unknown checkpoint format in " + dir.string());

  LoadedCheckpoint out;
  try {
    for (const auto& [key, value] : manifest.at("config").items()) {
      set_config_value(out.config, key, value.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint config in " + dir.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint config rejected: ") + e.what());
  }
  if (manifest.value("spec_hash", "") != spec_hash(out.config)) {
    throw DataError("checkpoint spec hash does not match its stored architecture in " + dir.string());
  }

  out.state = std::make_unique<OptimState>(out.config);
  OptimState& s = *out.state;
  Networks& n = s.nets;
  load_module(n.G, dir / "G.pt");
  load_module(n.F, dir / "F.pt");
  load_module(n.D_G, dir / "D_G.pt");
  load_module(n.D_F, dir / "D_F.pt");
  load_module(n.R_G, dir / "R_G.pt");
  load_module(n.R_F, dir / "R_F.pt");
  load_module(n.N_G, dir / "N_G.pt");
  load_module(n.N_F, dir / "N_F.pt");
  load_optimizer(*s.opt_R, dir / "optim_R.pt");
  load_optimizer(*s.opt_D, dir / "optim_D.pt");
  load_optimizer(*s.opt_N, dir / "optim_N.pt");
  s.epoch = manifest.at("epoch").get<std::int64_t>();
  s.step = manifest.at("step").get<std::int64_t>();
  return out;
}

}  // namespace unhaze::trainer
