#include <cstdio>
#include <fstream>

#include "unhaze/errors.hpp"
#include "unhaze/evalkit.hpp"
#include "unhaze/imaging.hpp"
#include "unhaze/log.hpp"
#include "unhaze/seeding.hpp"

namespace unhaze::evalkit {

namespace fs = std::filesystem;

std::string to_string(Domain d) { return d == Domain::Hazy ? "hazy" : "clean"; }

EmbeddingDump collect_embeddings(trainer::Networks& nets, const std::vector<Image>& hazy,
                                 const std::vector<Image>& clean, const ExportOptions& opts) {
  if (hazy.empty() || clean.empty()) throw InvalidInput("embedding export needs images of both domains");
  if (opts.queries < 1) throw InvalidInput("embedding export needs at least one location per image");
  torch::NoGradGuard no_grad;
  const auto dtype = nets.G->parameters().front().scalar_type();
  const auto& taps = nets.G->spec().taps;

  EmbeddingDump dump;
  std::uint64_t index = 0;
  auto run = [&](const std::vector<Image>& images, Domain domain) {
    for (const Image& img : images) {
      auto gen = at::make_generator<at::CPUGeneratorImpl>(mix_seed(opts.seed, index++));
      const networks::FeatureStack fs = nets.G->encode(networks::to_network_tensor(img, dtype));
      const auto locations = networks::sample_locations(fs, opts.queries, gen);
      const auto emb = nets.R_G->project(fs, locations);
      for (std::size_t t = 0; t < emb.size(); ++t) {
        const torch::Tensor e = emb[t].to(torch::kFloat64).contiguous();
        const double* p = e.data_ptr<double>();
        for (std::int64_t r = 0; r < e.size(0); ++r) {
          dump.rows.push_back({domain, taps[t], std::vector<double>(p + r * e.size(1), p + (r + 1) * e.size(1))});
        }
      }
    }
  };
  run(hazy, Domain::Hazy);
  run(clean, Domain::Clean);

  // Zero spread within any tap means the inputs carry no spatial variation.
  for (std::int64_t tap : taps) {
    const std::vector<double>* first = nullptr;
    double spread = 0.0;
    for (const auto& row : dump.rows) {
      if (row.tap != tap) continue;
      if (first == nullptr) {
        first = &row.values;
        continue;
      }
      for (std::size_t k = 0; k < row.values.size(); ++k) spread = std::max(spread, std::abs(row.values[k] - (*first)[k]));
    }
    if (spread < 1e-9) dump.degenerate = true;
  }
  if (dump.degenerate) log::warn("embeddings have zero variance in at least one tap; the projection is uninformative");
  return dump;
}

ExportResult analyse_embeddings(trainer::Networks& nets, const std::vector<Image>& hazy,
                                const std::vector<Image>& clean, const ExportOptions& opts) {
  ExportResult out;
  out.dump = collect_embeddings(nets, hazy, clean, opts);
  std::vector<std::vector<double>> data;
  for (const auto& row : out.dump.rows) {
    if (opts.tap && row.tap != *opts.tap) continue;
    data.push_back(row.values);
    out.projection_labels.push_back(row.domain);
  }
  if (data.empty()) throw InvalidInput("no embeddings for the requested tap");
  out.projection = opts.method == ProjectionMethod::Pca ? pca_2d(data) : tsne_2d(data, opts.tsne);
  out.silhouette = silhouette(out.projection, out.projection_labels);
  return out;
}

void write_embedding_files(const ExportResult& result, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  char buf[64];
  {
    std::ofstream out(out_dir / "embeddings.csv", std::ios::trunc);
    if (!out) throw DataError("cannot write embeddings.csv in " + out_dir.string());
    out << "domain,tap";
    const std::size_t dim = result.dump.rows.empty() ? 0 : result.dump.rows.front().values.size();
    for (std::size_t k = 0; k < dim; ++k) out << ",dim" << k;
    out << "\n";
    for (const auto& row : result.dump.rows) {
      out << to_string(row.domain) << "," << row.tap;
      for (double v : row.values) {
        std::snprintf(buf, sizeof buf, ",%.8g", v);
        out << buf;
      }
      out << "\n";
    }
    if (!out) throw DataError("failed writing embeddings.csv");
  }
  {
    std::ofstream out(out_dir / "projection.csv", std::ios::trunc);
    if (!out) throw DataError("cannot write projection.csv in " + out_dir.string());
    out << "domain,x,y\n";
    for (std::size_t i = 0; i < result.projection.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.8g,%.8g\n", result.projection[i].x, result.projection[i].y);
      out << to_string(result.projection_labels[i]) << buf;
    }
    if (!out) throw DataError("failed writing projection.csv");
  }
  imaging::save_image(render_scatter(result.projection, result.projection_labels), out_dir / "projection.png");
}

ExportResult export_embeddings(const fs::path& checkpoint, const std::vector<Image>& hazy,
                               const std::vector<Image>& clean, const fs::path& out_dir, const ExportOptions& opts) {
  trainer::LoadedCheckpoint ck = trainer::load_checkpoint(checkpoint);
  ExportResult result = analyse_embeddings(ck.state->nets, hazy, clean, opts);
  write_embedding_files(result, out_dir);
  return result;
}

}  // namespace unhaze::evalkit
