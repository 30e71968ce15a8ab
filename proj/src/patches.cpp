#include "sigdesc/patches.hpp"

#include <random>

#include "sigdesc/error.hpp"

namespace sigdesc {

void PatchConfig::validate(int canvas) const {
  if (size < 1 || stride < 1 || stride > size || size > canvas) {
    throw Error("patch config requires 1 <= stride <= size <= canvas (stride=" +
                std::to_string(stride) + ", size=" + std::to_string(size) +
                ", canvas=" + std::to_string(canvas) + ")");
  }
  if (train_count < 1) throw Error("patch.train_count must be >= 1");
}

void copy_patch(const SignatureImage& image, int row, int col, int size,
                Eigen::Ref<Eigen::VectorXd> out) {
  const int area = size * size;
  for (int r = 0; r < size; ++r) {
    out.segment(r * size, size) = image.pressure.row(row + r).segment(col, size).transpose();
    out.segment(area + r * size, size) = image.time.row(row + r).segment(col, size).transpose();
  }
}

bool is_blank(const SignatureImage& image, int row, int col, const PatchConfig& cfg) {
  return (image.pressure.block(row, col, cfg.size, cfg.size).array() <= cfg.blank_threshold).all();
}

int dense_positions(int extent, const PatchConfig& cfg) {
  return extent < cfg.size ? 0 : (extent - cfg.size) / cfg.stride + 1;
}

PatchMatrix extract_dense(const SignatureImage& image, const PatchConfig& cfg) {
  if (image.width() < cfg.size || image.height() < cfg.size) {
    throw Error("extract_dense: image " + std::to_string(image.width()) + "x" +
                std::to_string(image.height()) + " is smaller than patch size " +
                std::to_string(cfg.size));
  }
  if (cfg.size < 1 || cfg.stride < 1) throw Error("extract_dense: invalid patch geometry");
  const int rows = dense_positions(image.height(), cfg);
  const int cols = dense_positions(image.width(), cfg);
  std::vector<std::pair<int, int>> offsets;
  offsets.reserve(static_cast<std::size_t>(rows * cols));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int r = i * cfg.stride, c = j * cfg.stride;
      if (cfg.skip_blank && is_blank(image, r, c, cfg)) continue;
      offsets.emplace_back(r, c);
    }
  }
  if (offsets.empty()) offsets.emplace_back(0, 0);

  PatchMatrix out(cfg.dimension(), static_cast<Eigen::Index>(offsets.size()));
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    copy_patch(image, offsets[k].first, offsets[k].second, cfg.size,
               out.col(static_cast<Eigen::Index>(k)));
  }
  return out;
}

PatchMatrix sample_training_patches(const std::vector<SignatureImage>& images,
                                    const PatchConfig& cfg, std::uint64_t seed) {
  if (images.empty()) throw Error("sample_training_patches: empty image list");
  if (cfg.train_count < 1) throw Error("sample_training_patches: train_count must be >= 1");
  for (const auto& img : images) {
    if (img.width() < cfg.size || img.height() < cfg.size) {
      throw Error("sample_training_patches: image smaller than patch size");
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_image(0, images.size() - 1);

  PatchMatrix out(cfg.dimension(), cfg.train_count);
  const long budget = 100 * cfg.train_count;
  long draws = 0;
  for (long k = 0; k < cfg.train_count;) {
    const auto& img = images[pick_image(rng)];
    const int row = std::uniform_int_distribution<int>(0, img.height() - cfg.size)(rng);
    const int col = std::uniform_int_distribution<int>(0, img.width() - cfg.size)(rng);
    ++draws;
    if (cfg.skip_blank && draws <= budget && is_blank(img, row, col, cfg)) continue;
    copy_patch(img, row, col, cfg.size, out.col(k));
    ++k;
  }
  return out;
}

}  // namespace sigdesc
