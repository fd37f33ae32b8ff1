#include <random>
#include <string>

#include "unhaze/errors.hpp"
#include "unhaze/imaging.hpp"

namespace unhaze::imaging {

UnpairedDataset::UnpairedDataset(std::vector<Image> hazy, std::vector<Image> clean)
    : hazy_(std::move(hazy)), clean_(std::move(clean)) {
  if (hazy_.empty() || clean_.empty()) throw InvalidInput("unpaired dataset needs images on both sides");
  min_side_ = hazy_.front().height();
  for (const auto* side : {&hazy_, &clean_}) {
    for (const Image& img : *side) {
      if (img.empty()) throw InvalidInput("unpaired dataset contains an empty image");
      min_side_ = std::min({min_side_, img.height(), img.width()});
    }
  }
}

UnpairedDataset UnpairedDataset::from_directories(const std::filesystem::path& hazy_dir,
                                                  const std::filesystem::path& clean_dir) {
  auto load_all = [](const std::filesystem::path& dir) {
    std::vector<Image> out;
    for (const auto& p : list_images(dir)) out.push_back(load_image(p));
    if (out.empty()) throw DataError("no images found in " + dir.string());
    return out;
  };
  return UnpairedDataset(load_all(hazy_dir), load_all(clean_dir));
}

UnpairedBatch sample_unpaired_batch(const UnpairedDataset& ds, std::size_t crop, std::uint64_t seed) {
  if (crop == 0 || crop > ds.min_side()) {
    throw InvalidInput("crop " + std::to_string(crop) + " exceeds smallest image side " +
                       std::to_string(ds.min_side()));
  }
  std::mt19937_64 rng(seed);
  auto draw = [&](const std::vector<Image>& side) {
    std::uniform_int_distribution<std::size_t> pick(0, side.size() - 1);
    const Image& img = side[pick(rng)];
    std::uniform_int_distribution<std::size_t> top(0, img.height() - crop);
    std::uniform_int_distribution<std::size_t> left(0, img.width() - crop);
    const std::size_t y = top(rng);
    const std::size_t x = left(rng);
    return img.crop(y, x, crop, crop);
  };
  UnpairedBatch batch;
  batch.hazy = draw(ds.hazy());
  batch.clean = draw(ds.clean());
  return batch;
}

}  // namespace unhaze::imaging
