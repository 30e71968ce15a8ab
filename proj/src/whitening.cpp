#include "sigdesc/whitening.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "sigdesc/error.hpp"

namespace sigdesc {

WhiteningMode parse_whitening_mode(std::string_view name) {
  if (name == "pca") return WhiteningMode::pca;
  if (name == "zca") return WhiteningMode::zca;
  throw Error("unknown whitening mode '" + std::string(name) + "' (expected pca or zca)");
}

std::string_view to_string(WhiteningMode mode) {
  return mode == WhiteningMode::pca ? "pca" : "zca";
}

void WhiteningOptions::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw Error("whiten.epsilon must be >= 0");
  if (!(retained_variance > 0.0 && retained_variance <= 1.0)) {
    throw Error("whiten.retained_variance must lie in (0, 1]");
  }
}

WhiteningTransform fit_whitening(const Eigen::MatrixXd& patches, const WhiteningOptions& options) {
  options.validate();
  const Eigen::Index d = patches.rows();
  const Eigen::Index m = patches.cols();
  if (m < 2) throw Error("fit_whitening: at least 2 patches are required, got " + std::to_string(m));
  if (d < 1) throw Error("fit_whitening: patches have zero length");
  if (!patches.allFinite()) throw Error("fit_whitening: patches contain non-finite values");

  WhiteningTransform tr;
  tr.options = options;
  tr.underdetermined = m < d + 1;
  tr.mean = patches.rowwise().mean();
  const Eigen::MatrixXd centered = patches.colwise() - tr.mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / static_cast<double>(m - 1));
  cov = cov.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("fit_whitening: eigendecomposition failed");

  // Solver output is ascending; flip to descending.
  Eigen::VectorXd values = solver.eigenvalues().reverse().cwiseMax(0.0);
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < d; ++j) {
    auto v = vectors.col(j);
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(v(i)) > 1e-12 * scale) {
        if (v(i) < 0.0) v = -v;
        break;
      }
    }
  }

  const double total = values.sum();
  Eigen::Index kept = d;
  if (total <= 0.0) {
    kept = 1;
  } else {
    const double target = options.retained_variance * total * (1.0 - 1e-12);
    double mass = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      mass += values(k);
      if (mass >= target) {
        kept = k + 1;
        break;
      }
    }
  }

  tr.eigenvalues = values.head(kept);
  Eigen::VectorXd scale(kept);
  for (Eigen::Index k = 0; k < kept; ++k) {
    const double v = values(k) + options.epsilon;
    scale(k) = v > 0.0 ? 1.0 / std::sqrt(v) : 0.0;
  }
  const auto u = vectors.leftCols(kept);
  Eigen::MatrixXd projection = scale.asDiagonal() * u.transpose();
  tr.basis = options.mode == WhiteningMode::pca ? projection : Eigen::MatrixXd(u * projection);
  return tr;
}

Eigen::VectorXd apply_whitening(const WhiteningTransform& transform,
                                const Eigen::Ref<const Eigen::VectorXd>& patch) {
  if (patch.size() != transform.input_dim()) {
    throw Error("apply_whitening: patch length " + std::to_string(patch.size()) +
                " does not match transform dimension " + std::to_string(transform.input_dim()));
  }
  return transform.basis * (patch - transform.mean);
}

Eigen::MatrixXd apply_whitening_batch(const WhiteningTransform& transform, const Eigen::MatrixXd& patches) {
  if (patches.rows() != transform.input_dim()) {
    throw Error("apply_whitening: patch length " + std::to_string(patches.rows()) +
                " does not match transform dimension " + std::to_string(transform.input_dim()));
  }
  return transform.basis * (patches.colwise() - transform.mean);
}

}  // namespace sigdesc
