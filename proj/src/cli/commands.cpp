#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "unhaze/cli.hpp"
#include "unhaze/errors.hpp"
#include "unhaze/evalkit.hpp"
#include "unhaze/imaging.hpp"
#include "unhaze/log.hpp"
#include "unhaze/networks.hpp"
#include "unhaze/seeding.hpp"
#include "unhaze/trainer.hpp"

namespace unhaze::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string indexed_name(std::int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%05lld.png", static_cast<long long>(i));
  return buf;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::int64_t count = 8;
  std::int64_t size = 64;
  std::int64_t start = 0;
  std::uint64_t seed = 0;
  fs::path out = "synth";
};

int run_synth(const SynthArgs& a) {
  if (a.count <= 0 || a.size < 8) throw ConfigError("synth needs --count > 0 and --size >= 8");
  fs::create_directories(a.out / "hazy");
  fs::create_directories(a.out / "clean");
  std::ofstream manifest(a.out / "manifest.csv", std::ios::binary);
  if (!manifest) throw DataError("cannot write " + (a.out / "manifest.csv").string());
  manifest << "filename,A_r,A_g,A_b,beta\n";
  const auto side = static_cast<std::size_t>(a.size);
  for (std::int64_t k = 0; k < a.count; ++k) {
    const std::int64_t index = a.start + k;
    const auto sample = imaging::random_sample(side, side, mix_seed(a.seed, static_cast<std::uint64_t>(index)));
    const std::string name = indexed_name(index);
    imaging::save_image(sample.hazy, a.out / "hazy" / name);
    imaging::save_image(sample.scene.clean, a.out / "clean" / name);
    const auto& A = sample.scene.airlight;
    manifest << name << ',' << fmt(A[0]) << ',' << fmt(A[1]) << ',' << fmt(A[2]) << ',' << fmt(sample.beta) << '\n';
  }
  log::info("wrote " + std::to_string(a.count) + " pairs to " + a.out.string());
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::optional<fs::path> config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> resume;
  bool print_config = false;
};

int run_train(const TrainArgs& a) {
  std::vector<Override> overrides;
  for (const auto& text : a.overrides) overrides.push_back(parse_override(text));
  if (a.seed) overrides.emplace_back("seed", std::to_string(*a.seed));
  const ParsedConfig parsed = parse_config(a.config, overrides, !a.print_config);

  if (a.print_config) {
    for (const auto& [key, value] : trainer::config_values(parsed.config)) {
      std::cout << key << " = " << value << "  # " << to_string(parsed.provenance_of(key)) << '\n';
    }
    return kExitOk;
  }

  const auto& cfg = parsed.config;
  torch::set_num_threads(cfg.threads);
  const auto ds = imaging::UnpairedDataset::from_directories(cfg.hazy_dir, cfg.clean_dir);
  trainer::TrainHooks hooks;
  hooks.resume_from = a.resume;
  hooks.on_step = [](const losses::LossReport& r) {
    if (log::level() >= log::Level::Debug) log::debug(losses::csv_row(r));
  };
  const auto artifacts = trainer::train(cfg, ds, hooks);
  std::cout << "steps " << artifacts.steps << "\n";
  std::cout << "checkpoint " << artifacts.final_checkpoint.string() << "\n";
  std::cout << "metrics " << artifacts.metrics_csv.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct InferArgs {
  fs::path checkpoint;
  fs::path in;
  fs::path out;
  std::uint64_t seed = 0;
};

Image dehaze(networks::Generator& G, const Image& img, torch::Dtype dtype) {
  const auto stride = G->spec().stride();
  const auto h = static_cast<std::int64_t>(img.height());
  const auto w = static_cast<std::int64_t>(img.width());
  const std::int64_t ph = (stride - h % stride) % stride;
  const std::int64_t pw = (stride - w % stride) % stride;
  torch::Tensor x = networks::to_network_tensor(img, dtype);
  if (ph > 0 || pw > 0) {
    namespace F = torch::nn::functional;
    x = F::pad(x, F::PadFuncOptions({0, pw, 0, ph}).mode(torch::kReplicate));
  }
  torch::Tensor y = G->translate(x);
  y = y.index({torch::indexing::Slice(), torch::indexing::Slice(), torch::indexing::Slice(0, h),
               torch::indexing::Slice(0, w)});
  return networks::from_network_tensor(y);
}

int run_infer(const InferArgs& a) {
  torch::manual_seed(a.seed);
  auto loaded = trainer::load_checkpoint(a.checkpoint);
  auto& G = loaded.state->nets.G;
  G->eval();
  const auto inputs = imaging::list_images(a.in);
  if (inputs.empty()) throw DataError("no images in " + a.in.string());
  fs::create_directories(a.out);
  torch::NoGradGuard no_grad;
  for (const auto& path : inputs) {
    const Image out = dehaze(G, imaging::load_image(path), loaded.config.precision);
    imaging::save_image(out, a.out / path.filename());
  }
  log::info("dehazed " + std::to_string(inputs.size()) + " images into " + a.out.string());
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  fs::path pred;
  fs::path gt;
  fs::path out = "metrics.csv";
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a) {
  const auto result = evalkit::evaluate_dir(a.pred, a.gt);
  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  evalkit::write_metrics_csv(result, a.out);
  std::cout << "mean_psnr " << fmt(result.mean.psnr_db) << "\n";
  std::cout << "mean_ssim " << fmt(result.mean.ssim) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EmbedArgs {
  fs::path checkpoint;
  fs::path hazy;
  fs::path clean;
  fs::path out = "embeddings";
  std::int64_t count = 10;
  std::int64_t queries = 64;
  std::string method = "pca";
  std::optional<std::int64_t> tap;
  double perplexity = 30.0;
  std::uint64_t seed = 0;
};

std::vector<Image> load_first(const fs::path& dir, std::int64_t count) {
  auto files = imaging::list_images(dir);
  if (files.empty()) throw DataError("no images in " + dir.string());
  if (static_cast<std::int64_t>(files.size()) > count) files.resize(static_cast<std::size_t>(count));
  std::vector<Image> out;
  for (const auto& f : files) out.push_back(imaging::load_image(f));
  return out;
}

int run_embed(const EmbedArgs& a) {
  if (a.count <= 0 || a.queries <= 0) throw ConfigError("embed needs --count > 0 and --queries > 0");
  evalkit::ExportOptions opts;
  opts.queries = a.queries;
  opts.seed = a.seed;
  opts.tap = a.tap;
  opts.tsne.perplexity = a.perplexity;
  opts.tsne.seed = a.seed;
  if (a.method == "pca") {
    opts.method = evalkit::ProjectionMethod::Pca;
  } else if (a.method == "tsne") {
    opts.method = evalkit::ProjectionMethod::Tsne;
  } else {
    throw ConfigError("--method must be pca or tsne, got '" + a.method + "'");
  }
  const auto result = evalkit::export_embeddings(a.checkpoint, load_first(a.hazy, a.count), load_first(a.clean, a.count),
                                                 a.out, opts);
  std::cout << "rows " << result.dump.rows.size() << "\n";
  std::cout << "silhouette " << fmt(result.silhouette) << "\n";
  if (result.dump.degenerate) std::cout << "degenerate 1\n";
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Unpaired image dehazing with adversarial contrastive negatives", "unhaze"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write synthetic hazy/clean pairs and a manifest");
  s->add_option("--count", synth.count, "Number of pairs")->capture_default_str();
  s->add_option("--size", synth.size, "Square image side in pixels")->capture_default_str();
  s->add_option("--start", synth.start, "Index of the first scene")->capture_default_str();
  s->add_option("--out", synth.out, "Output directory")->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train from a config file");
  t->add_option("--config", train.config, "Config file (key = value per line)");
  t->add_option("--set", train.overrides, "Override one key, key=value (repeatable)");
  t->add_option("--seed", train.seed, "Random seed (overrides the config)");
  t->add_option("--resume", train.resume, "Continue from this checkpoint directory");
  t->add_flag("--print-config", train.print_config, "Print the resolved config with provenance and exit");

  InferArgs infer;
  auto* i = app.add_subcommand("infer", "Dehaze every image in a directory");
  i->add_option("--checkpoint", infer.checkpoint, "Checkpoint directory")->required();
  i->add_option("--in", infer.in, "Input directory")->required();
  i->add_option("--out", infer.out, "Output directory")->required();
  i->add_option("--seed", infer.seed, "Random seed")->capture_default_str();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "PSNR/SSIM of predictions against references");
  e->add_option("--pred", eval.pred, "Prediction directory")->required();
  e->add_option("--gt", eval.gt, "Reference directory")->required();
  e->add_option("--out", eval.out, "Metrics CSV")->capture_default_str();
  e->add_option("--seed", eval.seed, "Random seed")->capture_default_str();

  EmbedArgs embed;
  auto* m = app.add_subcommand("embed", "Export encoder embeddings and a 2-D projection");
  m->add_option("--checkpoint", embed.checkpoint, "Checkpoint directory")->required();
  m->add_option("--hazy", embed.hazy, "Hazy image directory")->required();
  m->add_option("--clean", embed.clean, "Clean image directory")->required();
  m->add_option("--out", embed.out, "Output directory")->capture_default_str();
  m->add_option("--count", embed.count, "Images per domain")->capture_default_str();
  m->add_option("--queries", embed.queries, "Locations per image and tap")->capture_default_str();
  m->add_option("--method", embed.method, "pca or tsne")->capture_default_str();
  m->add_option("--tap", embed.tap, "Project only this encoder layer");
  m->add_option("--perplexity", embed.perplexity, "t-SNE perplexity")->capture_default_str();
  m->add_option("--seed", embed.seed, "Random seed")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*s) return run_synth(synth);
    if (*t) return run_train(train);
    if (*i) return run_infer(infer);
    if (*e) return run_eval(eval);
    if (*m) return run_embed(embed);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const DivergenceError& err) {
    std::cerr << "training diverged: " << err.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace unhaze::cli
