#pragma once

#include <Eigen/Core>

#include "sigdesc/trajectory.hpp"

namespace sigdesc {

/// Extent that normalized coordinates span on both axes.
inline constexpr double kNormalizedExtent = 100.0;

struct PreprocessConfig {
  int canvas = 101;  // square raster side; 101 gives one pixel per unit of [0,100]
  bool smooth = true;
  int spline_points_per_segment = 4;
  double cov_epsilon = 1e-9;

  void validate() const;
  friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

using Grid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Two-channel raster of one signature. Row 0 is the top (y = 100).
struct SignatureImage {
  Grid pressure;  // divided by the largest drawn pressure
  Grid time;      // normalized elapsed time of the stroke passing the pixel

  int width() const { return static_cast<int>(pressure.cols()); }
  int height() const { return static_cast<int>(pressure.rows()); }

  friend bool operator==(const SignatureImage& a, const SignatureImage& b) {
    return a.pressure.rows() == b.pressure.rows() && a.pressure.cols() == b.pressure.cols() &&
           a.pressure == b.pressure && a.time == b.time;
  }
};

/// Replaces every pen-down run of at least four samples with a natural cubic
/// spline through its points (parameterized by time), adding
/// `spline_points_per_segment - 1` evenly spaced samples inside each segment.
/// Pressure is interpolated linearly at the inserted samples.
Trajectory smooth(const Trajectory& trajectory, const PreprocessConfig& cfg);

/// Principal-axis angle from orthogonal regression over all samples.
/// Throws when every sample sits at the same position.
double orientation_angle(const Trajectory& trajectory, const PreprocessConfig& cfg);

/// Rotates positions by -angle about the centroid, which leaves the result
/// centred at the origin.
Trajectory rotate(const Trajectory& trajectory, double angle);

/// Maps x and y independently onto [0, 100]. Throws on zero extent.
Trajectory normalize_extent(const Trajectory& trajectory);

/// Rasterizes a normalized trajectory. Consecutive pen-down samples are joined
/// by 8-connected line segments; later segments overwrite earlier ones.
SignatureImage rasterize(const Trajectory& trajectory, const PreprocessConfig& cfg);

/// smooth -> rotate(orientation_angle) -> normalize_extent -> rasterize.
SignatureImage preprocess(const Trajectory& trajectory, const PreprocessConfig& cfg);

}  // namespace sigdesc
