#pragma once

#include <string_view>

#include <Eigen/Core>

namespace sigdesc {

enum class WhiteningMode { pca, zca };

WhiteningMode parse_whitening_mode(std::string_view name);
std::string_view to_string(WhiteningMode mode);

struct WhiteningOptions {
  double epsilon = 0.01;
  double retained_variance = 0.99;
  WhiteningMode mode = WhiteningMode::pca;

  void validate() const;
  friend bool operator==(const WhiteningOptions&, const WhiteningOptions&) = default;
};

/// Affine map x -> basis * (x - mean).
///
/// `eigenvalues` holds the kept covariance eigenvalues in descending order.
/// In pca mode `basis` has one row per kept component; in zca mode the
/// projection is rotated back into input space, so `basis` is d x d.
struct WhiteningTransform {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;
  Eigen::VectorXd eigenvalues;
  WhiteningOptions options;
  /// Set when the fit had fewer than d + 1 samples (rank-deficient covariance).
  bool underdetermined = false;

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index kept() const { return eigenvalues.size(); }
  Eigen::Index output_dim() const { return basis.rows(); }
};

/// Fits on patch columns. Eigenvectors are oriented so that their first
/// non-negligible component is positive, which makes the fit reproducible.
WhiteningTransform fit_whitening(const Eigen::MatrixXd& patches,
                                 const WhiteningOptions& options = {});

Eigen::VectorXd apply_whitening(const WhiteningTransform& transform,
                                const Eigen::Ref<const Eigen::VectorXd>& patch);

/// Column-wise apply_whitening.
Eigen::MatrixXd apply_whitening_batch(const WhiteningTransform& transform,
                                const Eigen::MatrixXd& patches);

}  // namespace sigdesc
