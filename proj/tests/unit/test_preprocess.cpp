#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "sigdesc/dataset_io.hpp"
#include "sigdesc/error.hpp"
#include "sigdesc/preprocess.hpp"

using namespace sigdesc;

namespace {

struct Moments {
  double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
};

Moments moments(const Trajectory& t) {
  Moments m;
  const double n = static_cast<double>(t.size());
  for (const auto& s : t.samples) {
    m.mx += s.x / n;
    m.my += s.y / n;
  }
  for (const auto& s : t.samples) {
    m.sxx += (s.x - m.mx) * (s.x - m.mx) / n;
    m.syy += (s.y - m.my) * (s.y - m.my) / n;
    m.sxy += (s.x - m.mx) * (s.y - m.my) / n;
  }
  return m;
}

Trajectory line(double dx, double dy, int n = 10) {
  Trajectory t;
  t.meta.user_id = "u";
  for (int i = 0; i < n; ++i) t.samples.push_back({dx * i, dy * i, 10.0 * i, 1.0, true});
  return t;
}

int ink(const Grid& g) { return static_cast<int>((g.array() > 0.0).count()); }

// Every inked pixel of `a` has an inked pixel of `b` within one pixel.
bool covered_within_one(const Grid& a, const Grid& b) {
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (a(r, c) <= 0.0) continue;
      bool found = false;
      for (Eigen::Index dr = -1; dr <= 1 && !found; ++dr) {
        for (Eigen::Index dc = -1; dc <= 1 && !found; ++dc) {
          const Eigen::Index rr = r + dr, cc = c + dc;
          found = rr >= 0 && cc >= 0 && rr < b.rows() && cc < b.cols() && b(rr, cc) > 0.0;
        }
      }
      if (!found) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("smooth: identity when disabled, exact on linear data") {
  PreprocessConfig cfg;
  std::mt19937_64 rng(3);
  const Trajectory r = test::random_trajectory(rng);
  cfg.smooth = false;
  CHECK(smooth(r, cfg) == r);

  cfg.smooth = true;
  const Trajectory lin = line(2.0, 3.0, 12);
  const Trajectory s = smooth(lin, cfg);
  CHECK(s.size() == 12 + 11 * 3);
  for (const auto& p : s.samples) {
    const double u = p.t / 10.0;
    CHECK(std::abs(p.x - 2.0 * u) <= 1e-9);
    CHECK(std::abs(p.y - 1.5 * p.x) <= 1e-9);
  }
}

TEST_CASE("smooth: short runs and pen-up samples pass through") {
  PreprocessConfig cfg;
  Trajectory t = line(1.0, 1.0, 9);
  t.samples[3].pen_down = false;  // runs of 3 and 5 pen-down samples
  const Trajectory s = smooth(t, cfg);
  CHECK(s.size() == 9 + 4 * 3);
  for (std::size_t i = 0; i < 4; ++i) CHECK(s.samples[i] == t.samples[i]);
}

TEST_CASE("smooth: spline reduces deviation from a clean sine") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, 0.05);
  Trajectory t;
  t.meta.user_id = "u";
  const int n = 60;
  auto clean = [](double time) { return std::sin(time / 100.0); };
  for (int i = 0; i < n; ++i) {
    const double time = 10.0 * i;
    t.samples.push_back({time, clean(time) + noise(rng), time, 1.0, true});
  }
  auto msd = [&](const Trajectory& tr) {
    double s = 0.0;
    for (const auto& p : tr.samples) s += (p.y - clean(p.t)) * (p.y - clean(p.t));
    return s / static_cast<double>(tr.size());
  };
  const Trajectory sm = smooth(t, PreprocessConfig{});
  CHECK(sm.size() > t.size());
  CHECK(msd(sm) < msd(t));
}

TEST_CASE("orientation_angle fixtures") {
  PreprocessConfig cfg;
  CHECK(std::abs(orientation_angle(line(1.0, 1.0), cfg) - std::numbers::pi / 4.0) <= 1e-9);
  CHECK(orientation_angle(line(1.0, 0.0), cfg) == 0.0);
  CHECK(orientation_angle(line(0.0, 1.0), cfg) == std::numbers::pi / 2.0);

  Trajectory same = line(0.0, 0.0, 4);
  CHECK_THROWS_WITH_AS(orientation_angle(same, cfg), doctest::Contains("degenerate geometry"), Error);
}

TEST_CASE("orientation_angle matches the closed form") {
  PreprocessConfig cfg;
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Trajectory t = test::random_trajectory(rng, 20);
    const Moments m = moments(t);
    const double d = m.syy - m.sxx;
    const double expected = std::atan((d + std::sqrt(d * d + 4.0 * m.sxy * m.sxy)) / (2.0 * m.sxy));
    CHECK(orientation_angle(t, cfg) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("rotate: identity, inverse, and decorrelation") {
  std::mt19937_64 rng(5);
  const Trajectory t = test::random_trajectory(rng);
  const Moments m = moments(t);
  const Trajectory r0 = rotate(t, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(r0.samples[i].x == doctest::Approx(t.samples[i].x - m.mx));
    CHECK(r0.samples[i].y == doctest::Approx(t.samples[i].y - m.my));
    CHECK(r0.samples[i].t == t.samples[i].t);
    CHECK(r0.samples[i].pressure == t.samples[i].pressure);
  }
  const Trajectory back = rotate(rotate(t, 0.7), -0.7);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(std::abs(back.samples[i].x - (t.samples[i].x - m.mx)) <= 1e-9);
    CHECK(std::abs(back.samples[i].y - (t.samples[i].y - m.my)) <= 1e-9);
  }

  PreprocessConfig cfg;
  const Trajectory diag = line(1.0, 1.0);
  CHECK(std::abs(moments(rotate(diag, orientation_angle(diag, cfg))).sxy) <= 1e-9);
  for (int trial = 0; trial < 100; ++trial) {
    const Trajectory r = test::random_trajectory(rng, 25);
    const Moments after = moments(rotate(r, orientation_angle(r, cfg)));
    CHECK(std::abs(after.sxy) <= 1e-6 * std::max(after.sxx, after.syy));
  }
}

TEST_CASE("normalize_extent") {
  Trajectory t = test::make_trajectory({{2, 1, 0, 1, true}, {4, 5, 1, 1, true}, {6, 3, 2, 1, true}});
  const Trajectory n = normalize_extent(t);
  CHECK(n.samples[0].x == 0.0);
  CHECK(n.samples[1].x == 50.0);
  CHECK(n.samples[2].x == 100.0);
  CHECK(n.samples[0].y == 0.0);
  CHECK(n.samples[1].y == 100.0);
  CHECK(n.samples[2].y == 50.0);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Trajectory r = normalize_extent(test::random_trajectory(rng));
    double lo_x = 1e9, hi_x = -1e9, lo_y = 1e9, hi_y = -1e9;
    for (const auto& s : r.samples) {
      lo_x = std::min(lo_x, s.x), hi_x = std::max(hi_x, s.x);
      lo_y = std::min(lo_y, s.y), hi_y = std::max(hi_y, s.y);
    }
    CHECK(lo_x == 0.0);
    CHECK(hi_x == 100.0);
    CHECK(lo_y == 0.0);
    CHECK(hi_y == 100.0);
    const Trajectory again = normalize_extent(r);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(std::abs(again.samples[i].x - r.samples[i].x) <= 1e-12);
      CHECK(std::abs(again.samples[i].y - r.samples[i].y) <= 1e-12);
    }
  }
  CHECK_THROWS_WITH_AS(normalize_extent(line(1.0, 0.0)), doctest::Contains("degenerate extent"), Error);
  CHECK_THROWS_WITH_AS(normalize_extent(line(0.0, 1.0)), doctest::Contains("degenerate extent"), Error);
}

TEST_CASE("rasterize: diagonal fixture and time endpoints") {
  PreprocessConfig cfg;
  const Trajectory t = test::make_trajectory({{0, 0, 0, 7, true}, {100, 100, 50, 7, true}});
  const SignatureImage img = rasterize(t, cfg);
  REQUIRE(img.width() == 101);
  REQUIRE(img.height() == 101);
  CHECK(ink(img.pressure) == 101);
  for (int i = 0; i <= 100; ++i) CHECK(img.pressure(100 - i, i) == 1.0);
  CHECK(img.time(100, 0) == 0.0);
  CHECK(img.time(0, 100) == 1.0);
  CHECK(img.time(50, 50) == doctest::Approx(0.5));
}

TEST_CASE("rasterize: pen-up gap separates strokes") {
  PreprocessConfig cfg;
  const Trajectory both = test::make_trajectory({{0, 0, 0, 5, true},
                                                 {40, 10, 10, 5, true},
                                                 {50, 50, 20, 0, false},
                                                 {60, 100, 30, 5, true},
                                                 {100, 50, 40, 5, true}});
  const Trajectory first = test::make_trajectory({{0, 0, 0, 5, true}, {40, 10, 10, 5, true}});
  const Trajectory second = test::make_trajectory({{60, 100, 30, 5, true}, {100, 50, 40, 5, true}});
  const int expected = (40 + 1) + (50 + 1);
  CHECK(ink(rasterize(first, cfg).pressure) + ink(rasterize(second, cfg).pressure) == expected);
  CHECK(ink(rasterize(both, cfg).pressure) == expected);
}

TEST_CASE("rasterize: rejects unnormalized input") {
  PreprocessConfig cfg;
  CHECK_THROWS_AS(rasterize(test::make_trajectory({{0, 0, 0, 1, true}, {100.1, 50, 1, 1, true}}), cfg),
                  Error);
  CHECK_NOTHROW(rasterize(test::make_trajectory({{0, 0, 0, 1, true}, {100.0000001, 50, 1, 1, true}}), cfg));
}

TEST_CASE("preprocess: image invariants on synthetic signatures") {
  PreprocessConfig cfg;
  for (const auto& [id, sigs] : generate_synthetic_corpus(4, 3, 3, 2).users) {
    for (const auto& t : sigs.genuine) {
      const SignatureImage img = preprocess(t, cfg);
      CHECK(img.pressure.rows() == img.time.rows());
      CHECK(img.pressure.cols() == img.time.cols());
      CHECK(img.pressure.minCoeff() >= 0.0);
      CHECK(img.pressure.maxCoeff() == 1.0);
      CHECK(img.time.minCoeff() >= 0.0);
      CHECK(img.time.maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("preprocess: translation is bit-exact, scaling stays within one pixel") {
  PreprocessConfig cfg;
  PreprocessConfig raw = cfg;
  raw.smooth = false;
  const Corpus c = generate_synthetic_corpus(6, 4, 2, 1);
  for (const auto& [id, sigs] : c.users) {
    for (const auto& t : sigs.genuine) {
      Trajectory moved = t, scaled = t;
      for (auto& s : moved.samples) s.x += 500.0, s.y += 300.0;
      for (auto& s : scaled.samples) s.x *= 3.0, s.y *= 3.0;
      CHECK(preprocess(moved, cfg) == preprocess(t, cfg));
      const SignatureImage a = preprocess(t, raw), b = preprocess(scaled, raw);
      CHECK(covered_within_one(a.pressure, b.pressure));
      CHECK(covered_within_one(b.pressure, a.pressure));
    }
  }
}

TEST_CASE("PreprocessConfig validation") {
  PreprocessConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.canvas = 15;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.canvas = 101;
  cfg.spline_points_per_segment = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
