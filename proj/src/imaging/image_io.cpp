#include <algorithm>
#include <cmath>
#include <fstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "unhaze/errors.hpp"
#include "unhaze/imaging.hpp"

namespace unhaze::imaging {
namespace fs = std::filesystem;

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

Image load_image(const fs::path& path) {
  if (!fs::exists(path)) throw DataError("image not found: " + path.string());
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open image: " + path.string());

  cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw FormatError("unsupported or corrupt image file: " + path.string());

  const int depth = raw.depth();
  if (depth != CV_8U && depth != CV_16U) throw FormatError("unsupported pixel depth in " + path.string());
  const double scale = depth == CV_8U ? 255.0 : 65535.0;
  const int channels = raw.channels();
  if (channels != 1 && channels != 3 && channels != 4) {
    throw FormatError("unsupported channel count in " + path.string());
  }

  const auto h = static_cast<std::size_t>(raw.rows);
  const auto w = static_cast<std::size_t>(raw.cols);
  std::vector<double> hwc(h * w * 3);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) {
      for (int c = 0; c < 3; ++c) {
        // OpenCV stores BGR(A).
        const int src_c = channels == 1 ? 0 : 2 - c;
        double v = 0.0;
        if (depth == CV_8U) {
          v = raw.ptr<std::uint8_t>(y)[x * channels + src_c];
        } else {
          v = raw.ptr<std::uint16_t>(y)[x * channels + src_c];
        }
        hwc[(static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)) * 3 + static_cast<std::size_t>(c)] =
            v / scale;
      }
    }
  }
  return Image(h, w, std::move(hwc));
}

void save_image(const Image& img, const fs::path& path) {
  if (img.empty()) throw InvalidInput("cannot save an empty image");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());

  cv::Mat out(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC3);
  for (std::size_t y = 0; y < img.height(); ++y) {
    auto* row = out.ptr<std::uint8_t>(static_cast<int>(y));
    for (std::size_t x = 0; x < img.width(); ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(img(y, x, c), 0.0, 1.0);
        row[x * 3 + (2 - c)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  // Always PNG regardless of the extension the caller picked.
  std::vector<std::uint8_t> encoded;
  const std::vector<int> params{cv::IMWRITE_PNG_COMPRESSION, 6};
  if (!cv::imencode(".png", out, encoded, params)) throw DataError("PNG encoding failed for " + path.string());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(encoded.size()));
  if (!file) throw DataError("failed to write " + path.string());
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_image_extension(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace unhaze::imaging
