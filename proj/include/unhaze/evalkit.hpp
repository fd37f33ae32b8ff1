#pragma once

// Full-reference quality metrics, folder evaluation and embedding export.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "unhaze/image.hpp"
#include "unhaze/trainer.hpp"

namespace unhaze::evalkit {

/// Reported for identical images.
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) with peak 1, capped at kPsnrCap.
double psnr(const Image& a, const Image& b);

/// Windowed SSIM: 11-tap Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, valid-region filtering, averaged over positions and channels.
/// Images smaller than the window use the largest odd window that fits.
double ssim(const Image& a, const Image& b);

struct MetricRow {
  std::string id;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct DirEvaluation {
  std::vector<MetricRow> rows;
  MetricRow mean;
};

/// Scores every image in `pred_dir` against the file of the same name in
/// `gt_dir`. Throws DataError when a counterpart is missing.
DirEvaluation evaluate_dir(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir);

/// Header `id,psnr_db,ssim`, one row per image, then the `mean` row.
void write_metrics_csv(const DirEvaluation& eval, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Embeddings

enum class Domain { Hazy, Clean };
std::string to_string(Domain d);

struct EmbeddingRow {
  Domain domain = Domain::Hazy;
  std::int64_t tap = 0;  // encoder layer index
  std::vector<double> values;
};

struct EmbeddingDump {
  std::vector<EmbeddingRow> rows;
  /// Every embedding of some tap is identical to the others.
  bool degenerate = false;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class ProjectionMethod { Pca, Tsne };

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 500;
  std::uint64_t seed = 0;
};

/// Deterministic 2-D PCA. Component signs are fixed so the largest-magnitude
/// loading of each axis is positive.
std::vector<Point2> pca_2d(const std::vector<std::vector<double>>& data);

/// Exact (O(n^2)) t-SNE.
std::vector<Point2> tsne_2d(const std::vector<std::vector<double>>& data, const TsneOptions& opts = {});

/// Mean silhouette coefficient of a two-domain labelling, Euclidean distance.
double silhouette(const std::vector<Point2>& points, const std::vector<Domain>& labels);

/// 512x512 white canvas, hazy points red, clean points blue.
Image render_scatter(const std::vector<Point2>& points, const std::vector<Domain>& labels, std::size_t size = 512);

struct ExportOptions {
  std::int64_t queries = 64;
  std::uint64_t seed = 0;
  ProjectionMethod method = ProjectionMethod::Pca;
  TsneOptions tsne;
  /// Project only rows of this encoder layer; all rows when unset.
  std::optional<std::int64_t> tap;
};

struct ExportResult {
  EmbeddingDump dump;
  std::vector<Point2> projection;
  std::vector<Domain> projection_labels;
  double silhouette = 0.0;
};

/// Embeds `queries` random locations per image and tap through the hazy->clean
/// encoder and its projection head, for images of both domains.
EmbeddingDump collect_embeddings(trainer::Networks& nets, const std::vector<Image>& hazy,
                                 const std::vector<Image>& clean, const ExportOptions& opts);

/// Collects, projects and scores.
ExportResult analyse_embeddings(trainer::Networks& nets, const std::vector<Image>& hazy,
                                const std::vector<Image>& clean, const ExportOptions& opts);

/// Writes embeddings.csv (`domain,tap,dim0..`), projection.csv (`domain,x,y`)
/// and projection.png into `out_dir`.
void write_embedding_files(const ExportResult& result, const std::filesystem::path& out_dir);

/// Loads a checkpoint, analyses and writes the files.
ExportResult export_embeddings(const std::filesystem::path& checkpoint, const std::vector<Image>& hazy,
                               const std::vector<Image>& clean, const std::filesystem::path& out_dir,
                               const ExportOptions& opts);

}  // namespace unhaze::evalkit
