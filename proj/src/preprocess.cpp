#include "sigdesc/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "sigdesc/error.hpp"

namespace sigdesc {

void PreprocessConfig::validate() const {
  if (canvas < 16) throw Error("preprocess.canvas must be >= 16");
  if (spline_points_per_segment < 1) throw Error("preprocess.spline_points_per_segment must be >= 1");
  if (!(cov_epsilon >= 0.0)) throw Error("preprocess.cov_epsilon must be >= 0");
}

namespace {

/// Natural cubic spline through (knots[i], values[i]) with strictly
/// increasing knots.
class NaturalSpline {
 public:
  NaturalSpline(std::vector<double> knots, std::vector<double> values)
      : knots_(std::move(knots)), values_(std::move(values)), second_(knots_.size(), 0.0) {
    const std::size_t n = knots_.size();
    if (n < 3) return;
    // Tridiagonal system for the interior second derivatives (Thomas algorithm).
    std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = knots_[i] - knots_[i - 1];
      const double h1 = knots_[i + 1] - knots_[i];
      const double lower = h0;
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((values_[i + 1] - values_[i]) / h1 - (values_[i] - values_[i - 1]) / h0);
      if (i > 1) {
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      second_[i] = (rhs[i] - upper[i] * second_[i + 1]) / diag[i];
      if (i == 1) break;
    }
  }

  double operator()(double t) const {
    const std::size_t n = knots_.size();
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    k = std::min(k, n - 2);
    const double h = knots_[k + 1] - knots_[k];
    const double a = (knots_[k + 1] - t) / h;
    const double b = (t - knots_[k]) / h;
    return a * values_[k] + b * values_[k + 1] +
           ((a * a * a - a) * second_[k] + (b * b * b - b) * second_[k + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_;
};


void smooth_run(const std::vector<PenSample>& in, std::size_t first, std::size_t last,
                int points_per_segment, std::vector<PenSample>& out) {
  // Samples sharing a timestamp collapse into one knot at their mean position.
  std::vector<double> knots, xs, ys;
  for (std::size_t i = first; i <= last;) {
    std::size_t j = i;
    double sx = 0.0, sy = 0.0;
    while (j <= last && in[j].t == in[i].t) {
      sx += in[j].x;
      sy += in[j].y;
      ++j;
    }
    const double count = static_cast<double>(j - i);
    knots.push_back(in[i].t);
    xs.push_back(sx / count);
    ys.push_back(sy / count);
    i = j;
  }
  if (knots.size() < 2) {
    out.insert(out.end(), in.begin() + first, in.begin() + last + 1);
    return;
  }
  const NaturalSpline spline_x(knots, std::move(xs));
  const NaturalSpline spline_y(std::move(knots), std::move(ys));

  for (std::size_t i = first; i <= last; ++i) {
    PenSample s = in[i];
    s.x = spline_x(s.t);
    s.y = spline_y(s.t);
    out.push_back(s);
    if (i == last || in[i + 1].t <= in[i].t) continue;
    const double t0 = in[i].t, t1 = in[i + 1].t;
    for (int j = 1; j < points_per_segment; ++j) {
      const double u = static_cast<double>(j) / points_per_segment;
      PenSample m;
      m.t = std::lerp(t0, t1, u);
      m.x = spline_x(m.t);
      m.y = spline_y(m.t);
      m.pressure = std::lerp(in[i].pressure, in[i + 1].pressure, u);
      m.pen_down = true;
      out.push_back(m);
    }
  }
}

struct Moments {
  double mean_x = 0.0, mean_y = 0.0;
  double var_x = 0.0, var_y = 0.0, cov = 0.0;
};

Moments moments(const std::vector<PenSample>& s) {
  Moments m;
  const double n = static_cast<double>(s.size());
  for (const auto& p : s) {
    m.mean_x += p.x;
    m.mean_y += p.y;
  }
  m.mean_x /= n;
  m.mean_y /= n;
  for (const auto& p : s) {
    const double dx = p.x - m.mean_x, dy = p.y - m.mean_y;
    m.var_x += dx * dx;
    m.var_y += dy * dy;
    m.cov += dx * dy;
  }
  m.var_x /= n;
  m.var_y /= n;
  m.cov /= n;
  return m;
}

}  // namespace

Trajectory smooth(const Trajectory& trajectory, const PreprocessConfig& cfg) {
  if (trajectory.samples.size() < 2) throw Error("smooth: trajectory needs at least 2 samples");
  if (!cfg.smooth) return trajectory;
  const auto& in = trajectory.samples;
  Trajectory out;
  out.meta = trajectory.meta;
  out.samples.reserve(in.size() * static_cast<std::size_t>(cfg.spline_points_per_segment));
  std::size_t i = 0;
  while (i < in.size()) {
    if (!in[i].pen_down) {
      out.samples.push_back(in[i++]);
      continue;
    }
    std::size_t j = i;
    while (j + 1 < in.size() && in[j + 1].pen_down) ++j;
    if (j - i + 1 >= 4) {
      smooth_run(in, i, j, cfg.spline_points_per_segment, out.samples);
    } else {
      out.samples.insert(out.samples.end(), in.begin() + i, in.begin() + j + 1);
    }
    i = j + 1;
  }
  return out;
}

double orientation_angle(const Trajectory& trajectory, const PreprocessConfig& cfg) {
  if (trajectory.samples.size() < 2) throw Error("orientation_angle: need at least 2 samples");
  const Moments m = moments(trajectory.samples);
  if (!(m.var_x > 0.0) && !(m.var_y > 0.0)) {
    throw Error("orientation_angle: degenerate geometry (all samples coincide)");
  }
  const double eps = cfg.cov_epsilon;
  if (std::abs(m.cov) < eps * std::max({m.var_x, m.var_y, eps})) {
    return m.var_x >= m.var_y ? 0.0 : std::numbers::pi / 2.0;
  }
  const double diff = m.var_y - m.var_x;
  return std::atan((diff + std::sqrt(diff * diff + 4.0 * m.cov * m.cov)) / (2.0 * m.cov));
}

Trajectory rotate(const Trajectory& trajectory, double angle) {
  if (!std::isfinite(angle)) throw Error("rotate: angle must be finite");
  Trajectory out = trajectory;
  if (out.samples.empty()) return out;
  const Moments m = moments(trajectory.samples);
  const double c = std::cos(angle), s = std::sin(angle);
  for (auto& p : out.samples) {
    const double dx = p.x - m.mean_x, dy = p.y - m.mean_y;
    p.x = dx * c + dy * s;
    p.y = -dx * s + dy * c;
  }
  return out;
}

Trajectory normalize_extent(const Trajectory& trajectory) {
  if (trajectory.samples.empty()) throw Error("normalize_extent: empty trajectory");
  auto [min_x, max_x] = std::minmax_element(
      trajectory.samples.begin(), trajectory.samples.end(),
      [](const PenSample& a, const PenSample& b) { return a.x < b.x; });
  auto [min_y, max_y] = std::minmax_element(
      trajectory.samples.begin(), trajectory.samples.end(),
      [](const PenSample& a, const PenSample& b) { return a.y < b.y; });
  const double x0 = min_x->x, x1 = max_x->x, y0 = min_y->y, y1 = max_y->y;
  if (!(x1 > x0) || !(y1 > y0)) throw Error("normalize_extent: degenerate extent");
  Trajectory out = trajectory;
  for (auto& p : out.samples) {
    p.x = (p.x - x0) / (x1 - x0) * kNormalizedExtent;
    p.y = (p.y - y0) / (y1 - y0) * kNormalizedExtent;
  }
  return out;
}

namespace {

struct Pixel {
  int col;
  int row;
};

class Rasterizer {
 public:
  Rasterizer(SignatureImage& image, double t_min, double t_span)
      : image_(image), t_min_(t_min), t_span_(t_span) {}

  /// Pressure is stored raw; rasterize() rescales the channel afterwards.
  void plot(Pixel px, double pressure, double t) {
    image_.pressure(px.row, px.col) = std::max(pressure, 0.0);
    image_.time(px.row, px.col) = t_span_ > 0.0 ? std::clamp((t - t_min_) / t_span_, 0.0, 1.0) : 0.0;
  }

  /// Integer Bresenham walk; attributes follow the step fraction.
  void segment(Pixel a, Pixel b, const PenSample& sa, const PenSample& sb) {
    const int dx = std::abs(b.col - a.col), dy = -std::abs(b.row - a.row);
    const int step_x = a.col < b.col ? 1 : -1, step_y = a.row < b.row ? 1 : -1;
    const int steps = std::max(dx, -dy);
    int err = dx + dy;
    Pixel p = a;
    for (int k = 0;; ++k) {
      const double u = steps == 0 ? 1.0 : static_cast<double>(k) / steps;
      plot(p, std::lerp(sa.pressure, sb.pressure, u), std::lerp(sa.t, sb.t, u));
      if (p.col == b.col && p.row == b.row) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        p.col += step_x;
      }
      if (e2 <= dx) {
        err += dx;
        p.row += step_y;
      }
    }
  }

 private:
  SignatureImage& image_;
  double t_min_;
  double t_span_;
};

}  // namespace

SignatureImage rasterize(const Trajectory& trajectory, const PreprocessConfig& cfg) {
  cfg.validate();
  const auto& s = trajectory.samples;
  if (s.empty()) throw Error("rasterize: empty trajectory");
  constexpr double tol = 1e-6;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].x < -tol || s[i].x > kNormalizedExtent + tol || s[i].y < -tol ||
        s[i].y > kNormalizedExtent + tol) {
      throw Error("rasterize: sample " + std::to_string(i) + " lies outside the normalized [0,100] range");
    }
    if (i > 0 && s[i].t < s[i - 1].t) throw Error("rasterize: timestamps decrease");
  }

  const int side = cfg.canvas;
  SignatureImage image{Grid::Zero(side, side), Grid::Zero(side, side)};

  const double t_min = s.front().t, t_span = s.back().t - s.front().t;
  Rasterizer raster(image, t_min, t_span);

  const double scale = (side - 1) / kNormalizedExtent;
  auto to_pixel = [&](const PenSample& p) {
    const double x = std::clamp(p.x, 0.0, kNormalizedExtent);
    const double y = std::clamp(p.y, 0.0, kNormalizedExtent);
    return Pixel{static_cast<int>(std::lround(x * scale)),
                 static_cast<int>(std::lround((kNormalizedExtent - y) * scale))};
  };

  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i].pen_down) continue;
    const bool joined_before = i > 0 && s[i - 1].pen_down;
    const bool joined_after = i + 1 < s.size() && s[i + 1].pen_down;
    if (joined_after) {
      raster.segment(to_pixel(s[i]), to_pixel(s[i + 1]), s[i], s[i + 1]);
    } else if (!joined_before) {
      raster.plot(to_pixel(s[i]), s[i].pressure, s[i].t);  // isolated dot
    }
  }
  // Largest drawn value becomes exactly 1.
  const double max_pressure = image.pressure.maxCoeff();
  if (max_pressure > 0.0) image.pressure /= max_pressure;
  return image;
}

SignatureImage preprocess(const Trajectory& trajectory, const PreprocessConfig& cfg) {
  cfg.validate();
  validate(trajectory);
  Trajectory t = smooth(trajectory, cfg);
  t = rotate(t, orientation_angle(t, cfg));
  t = normalize_extent(t);
  return rasterize(t, cfg);
}

}  // namespace sigdesc
