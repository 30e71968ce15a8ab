#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "sigdesc/preprocess.hpp"

namespace sigdesc {

struct PatchConfig {
  int size = 10;
  int stride = 1;
  long train_count = 100000;
  bool skip_blank = true;
  double blank_threshold = 0.0;  // blank = every pressure value <= threshold

  int dimension() const { return 2 * size * size; }
  void validate(int canvas) const;
  friend bool operator==(const PatchConfig&, const PatchConfig&) = default;
};

/// Patches stored one per column: rows [0, k*k) hold the pressure channel,
/// rows [k*k, 2*k*k) the time channel, each row-major within the patch.
using PatchMatrix = Eigen::MatrixXd;

/// Copies the patch with top-left corner (row, col) into `out`.
void copy_patch(const SignatureImage& image, int row, int col, int size,
                Eigen::Ref<Eigen::VectorXd> out);

bool is_blank(const SignatureImage& image, int row, int col, const PatchConfig& cfg);

/// Patches at offsets (i*stride, j*stride) that fit inside the image, scanned
/// row-major. With skip_blank, blank patches are dropped; if nothing remains
/// the patch at (0,0) is returned so the result is never empty.
PatchMatrix extract_dense(const SignatureImage& image, const PatchConfig& cfg);

/// Number of dense offsets per axis for a side of `extent` pixels.
int dense_positions(int extent, const PatchConfig& cfg);

/// Draws cfg.train_count patches: image uniformly, then top-left offset
/// uniformly. Blank patches are redrawn until 100 * train_count draws have
/// been spent, after which blanks are admitted.
PatchMatrix sample_training_patches(const std::vector<SignatureImage>& images,
                                    const PatchConfig& cfg, std::uint64_t seed);

}  // namespace sigdesc
