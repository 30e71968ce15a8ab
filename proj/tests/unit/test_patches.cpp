#include <doctest.h>

#include "sigdesc/dataset_io.hpp"
#include "sigdesc/error.hpp"
#include "sigdesc/patches.hpp"
#include "sigdesc/preprocess.hpp"

using namespace sigdesc;

namespace {

SignatureImage blank_image(int side = 101) {
  return {Grid::Zero(side, side), Grid::Zero(side, side)};
}

SignatureImage diagonal_image() {
  SignatureImage img = blank_image();
  for (int i = 0; i < 101; ++i) {
    img.pressure(100 - i, i) = 1.0;
    img.time(100 - i, i) = i / 100.0;
  }
  return img;
}

}  // namespace

TEST_CASE("dense extraction: candidate count and layout") {
  PatchConfig cfg;
  cfg.stride = 5;
  cfg.skip_blank = false;
  CHECK(dense_positions(101, cfg) == 19);
  SignatureImage img = blank_image();
  for (int r = 0; r < 101; ++r) {
    for (int c = 0; c < 101; ++c) {
      img.pressure(r, c) = r * 1000 + c;
      img.time(r, c) = -(r * 1000 + c);
    }
  }
  const PatchMatrix p = extract_dense(img, cfg);
  REQUIRE(p.cols() == 361);
  REQUIRE(p.rows() == 200);
  // Column 20 is offset (row 5, col 5): second row of patches, second column.
  CHECK(p(0, 20) == 5 * 1000 + 5);
  CHECK(p(11, 20) == 6 * 1000 + 6);
  CHECK(p(100, 20) == -(5 * 1000 + 5));
  CHECK(p(199, 20) == -(14 * 1000 + 14));

  for (int side : {16, 37, 101}) {
    for (int size : {4, 10}) {
      for (int stride : {1, 3, 5, size}) {
        PatchConfig c2{size, stride, 10, false, 0.0};
        const int per_axis = (side - size) / stride + 1;
        CHECK(extract_dense(blank_image(side), c2).cols() == per_axis * per_axis);
      }
    }
  }
}

TEST_CASE("dense extraction: blank handling") {
  PatchConfig cfg;
  const PatchMatrix fallback = extract_dense(blank_image(), cfg);
  REQUIRE(fallback.cols() == 1);
  CHECK(fallback.isZero(0.0));

  const PatchMatrix stroke = extract_dense(diagonal_image(), cfg);
  const int per_axis = dense_positions(101, cfg);
  int expected = 0;
  for (int r = 0; r < per_axis; ++r) {
    for (int c = 0; c < per_axis; ++c) {
      bool inked = false;
      for (int i = 0; i < 101; ++i) {
        const int row = 100 - i;
        inked |= row >= r * cfg.stride && row < r * cfg.stride + cfg.size && i >= c * cfg.stride &&
                 i < c * cfg.stride + cfg.size;
      }
      expected += inked;
    }
  }
  CHECK(expected < per_axis * per_axis);
  CHECK(stroke.cols() == expected);
  for (Eigen::Index j = 0; j < stroke.cols(); ++j) {
    CHECK(stroke.col(j).head(100).maxCoeff() > 0.0);
  }
  CHECK_THROWS_AS(extract_dense(blank_image(8), cfg), Error);
}

TEST_CASE("training patches: determinism, errors, and blank rejection") {
  PatchConfig cfg;
  cfg.train_count = 1000;
  std::vector<SignatureImage> images;
  for (const auto& [id, sigs] : generate_synthetic_corpus(2, 3, 2, 1).users) {
    for (const auto& t : sigs.genuine) images.push_back(preprocess(t, PreprocessConfig{}));
  }
  const PatchMatrix a = sample_training_patches(images, cfg, 17);
  const PatchMatrix b = sample_training_patches(images, cfg, 17);
  REQUIRE(a.cols() == 1000);
  CHECK(a == b);
  CHECK_FALSE(a == sample_training_patches(images, cfg, 18));
  int blank = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) blank += a.col(j).head(100).maxCoeff() <= 0.0;
  CHECK(blank == 0);

  CHECK_THROWS_AS(sample_training_patches({}, cfg, 1), Error);
  cfg.train_count = 0;
  CHECK_THROWS_AS(sample_training_patches(images, cfg, 1), Error);

  cfg.train_count = 5;
  const PatchMatrix blanks = sample_training_patches({blank_image()}, cfg, 1);
  CHECK(blanks.cols() == 5);
  CHECK(blanks.isZero(0.0));
}

TEST_CASE("PatchConfig validation") {
  CHECK_NOTHROW(PatchConfig{}.validate(101));
  CHECK_THROWS_AS((PatchConfig{10, 0, 10, true, 0.0}.validate(101)), Error);
  CHECK_THROWS_AS((PatchConfig{10, 11, 10, true, 0.0}.validate(101)), Error);
  CHECK_THROWS_AS((PatchConfig{102, 5, 10, true, 0.0}.validate(101)), Error);
  CHECK(PatchConfig{}.dimension() == 200);
}
