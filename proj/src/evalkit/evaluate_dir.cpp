#include <cstdio>
#include <fstream>

#include "unhaze/errors.hpp"
#include "unhaze/evalkit.hpp"
#include "unhaze/imaging.hpp"

namespace unhaze::evalkit {

namespace fs = std::filesystem;

DirEvaluation evaluate_dir(const fs::path& pred_dir, const fs::path& gt_dir) {
  const auto preds = imaging::list_images(pred_dir);
  if (preds.empty()) throw DataError("no images in " + pred_dir.string());
  if (!fs::is_directory(gt_dir)) throw DataError("not a directory: " + gt_dir.string());

  DirEvaluation out;
  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  for (const auto& p : preds) {
    const fs::path gt = gt_dir / p.filename();
    if (!fs::exists(gt)) throw DataError("no ground truth for " + p.filename().string() + " in " + gt_dir.string());
    const Image a = imaging::load_image(p);
    const Image b = imaging::load_image(gt);
    if (a.height() != b.height() || a.width() != b.width()) {
      throw DataError("size mismatch between prediction and ground truth for " + p.filename().string());
    }
    MetricRow row{p.filename().string(), psnr(a, b), ssim(a, b)};
    psnr_sum += row.psnr_db;
    ssim_sum += row.ssim;
    out.rows.push_back(std::move(row));
  }
  const auto n = static_cast<double>(out.rows.size());
  out.mean = MetricRow{"mean", psnr_sum / n, ssim_sum / n};
  return out;
}

void write_metrics_csv(const DirEvaluation& eval, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "id,psnr_db,ssim\n";
  char buf[64];
  auto emit = [&](const MetricRow& r) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", r.psnr_db, r.ssim);
    out << r.id << buf;
  };
  for (const auto& r : eval.rows) emit(r);
  emit(eval.mean);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace unhaze::evalkit
