#include <doctest.h>

#include <algorithm>
#include <random>

#include <Eigen/LU>

#include "helpers.hpp"
#include "sigdesc/error.hpp"
#include "sigdesc/oneclass.hpp"

using namespace sigdesc;

namespace {

std::vector<Descriptor> descriptors(const std::vector<Eigen::VectorXd>& values, const std::string& user = "a") {
  std::vector<Descriptor> out;
  for (const auto& v : values) out.push_back({v, user, Label::genuine});
  return out;
}

std::vector<Eigen::VectorXd> random_vectors(int n, int h, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(h);
    for (int j = 0; j < h; ++j) v(j) = g(rng) * (j + 1);
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_CASE("hand-computed toy model with no shrinkage") {
  const UserModel m = fit_user_model(
      descriptors({Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 2), Eigen::Vector2d(2, 2)}),
      0.0, "a");
  CHECK(m.mean.isApprox(Eigen::Vector2d(1, 1)));
  CHECK(m.covariance(0, 0) == doctest::Approx(4.0 / 3.0));
  CHECK(m.covariance(1, 1) == doctest::Approx(4.0 / 3.0));
  CHECK(m.covariance(0, 1) == doctest::Approx(0.0));
  CHECK(score(m, Eigen::Vector2d(1, 1)) == 0.0);
  CHECK(score(m, Eigen::Vector2d(3, 1)) == doctest::Approx(4.0 / (4.0 / 3.0)));
  CHECK(m.n_train == 4);
  CHECK_FALSE(m.threshold.has_value());
}

TEST_CASE("degenerate inputs: single and identical descriptors") {
  const Eigen::Vector3d v(0.2, 0.4, 0.6);
  for (int n : {1, 5}) {
    const UserModel m = fit_user_model(descriptors(std::vector<Eigen::VectorXd>(n, v)), 0.9, "a");
    CHECK(m.covariance == kCovarianceFloor * Eigen::Matrix3d::Identity());
    CHECK(score(m, v) == 0.0);
    CHECK(m.n_train == n);
    CHECK(score(m, Eigen::Vector3d(0.2, 0.4, 0.6 + 1e-3)) == doctest::Approx(1e-6 / kCovarianceFloor));
  }
}

TEST_CASE("full shrinkage gives a scaled identity") {
  std::mt19937_64 rng(1);
  const auto v = random_vectors(5, 4, rng);
  const UserModel m = fit_user_model(descriptors(v), 1.0, "a");
  Eigen::MatrixXd x(4, 5);
  for (int i = 0; i < 5; ++i) x.col(i) = v[i];
  const Eigen::MatrixXd c = x.colwise() - x.rowwise().mean();
  const double trace = (c * c.transpose()).trace() / 4.0;
  CHECK(m.covariance.isDiagonal(0.0));
  for (int i = 0; i < 4; ++i) CHECK(m.covariance(i, i) == doctest::Approx(trace / 4.0));
}

TEST_CASE("score properties") {
  std::mt19937_64 rng(2);
  for (double reg : {0.0, 0.5, 0.9}) {
    const auto train = random_vectors(8, 3, rng);
    const UserModel m = fit_user_model(descriptors(train), reg, "a");
    CHECK(m.factor.info() == Eigen::Success);
    CHECK(m.covariance.isApprox(m.covariance.transpose()));
    const Eigen::MatrixXd inverse = m.covariance.inverse();
    for (const auto& d : random_vectors(10, 3, rng)) {
      const double s = score(m, d);
      CHECK(s >= 0.0);
      CHECK(s == doctest::Approx((d - m.mean).dot(inverse * (d - m.mean))).epsilon(1e-10));
      UserModel shifted = m;
      const Eigen::Vector3d shift(5, -3, 2);
      shifted.mean += shift;
      CHECK(score(shifted, d + shift) == doctest::Approx(s).epsilon(1e-10));
    }
    CHECK(score(m, m.mean) == 0.0);
  }
  UserModel id = fit_user_model(descriptors({Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0),
                                             Eigen::Vector2d(0, 2), Eigen::Vector2d(2, 2)}),
                                0.0, "a");
  id.covariance = Eigen::Matrix2d::Identity();
  id.factor.compute(id.covariance);
  CHECK(score(id, Eigen::Vector2d(4, 5)) == doctest::Approx(9.0 + 16.0));
  CHECK_THROWS_AS(score(id, Eigen::Vector3d(1, 1, 1)), Error);
}

TEST_CASE("shrinkage towards 1 orders like Euclidean distance") {
  std::mt19937_64 rng(3);
  const auto train = random_vectors(6, 5, rng);
  const auto probes = random_vectors(30, 5, rng);
  const UserModel m = fit_user_model(descriptors(train), 1.0 - 1e-9, "a");
  std::vector<std::size_t> by_score(probes.size()), by_distance(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) by_score[i] = by_distance[i] = i;
  std::sort(by_score.begin(), by_score.end(),
            [&](auto a, auto b) { return score(m, probes[a]) < score(m, probes[b]); });
  std::sort(by_distance.begin(), by_distance.end(), [&](auto a, auto b) {
    return (probes[a] - m.mean).squaredNorm() < (probes[b] - m.mean).squaredNorm();
  });
  CHECK(by_score == by_distance);
}

TEST_CASE("fit errors") {
  CHECK_THROWS_AS(fit_user_model({}, 0.9, "a"), Error);
  auto mixed = descriptors({Eigen::Vector2d(0, 0)}, "a");
  mixed.push_back({Eigen::Vector2d(1, 1), "b", Label::genuine});
  CHECK_THROWS_AS(fit_user_model(mixed, 0.9, "a"), Error);
  auto forged = descriptors({Eigen::Vector2d(0, 0)}, "a");
  forged.push_back({Eigen::Vector2d(1, 1), "a", Label::skilled_forgery});
  CHECK_THROWS_AS(fit_user_model(forged, 0.9, "a"), Error);
  auto lengths = descriptors({Eigen::Vector2d(0, 0)}, "a");
  lengths.push_back({Eigen::Vector3d(1, 1, 1), "a", Label::genuine});
  CHECK_THROWS_AS(fit_user_model(lengths, 0.9, "a"), Error);
  CHECK_THROWS_AS(fit_user_model(descriptors({Eigen::Vector2d(0, 0)}), 1.5, "a"), Error);
}

TEST_CASE("threshold calibration and verification") {
  const UserModel base = fit_user_model(descriptors({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)}), 0.9, "a");
  CHECK(*calibrate_threshold(base, {1, 2, 3, 4}, 1.0).threshold == 6.0);
  CHECK(*calibrate_threshold(base, {4, 3, 2, 1}, 0.5).threshold == 3.0);
  CHECK(*calibrate_threshold(base, {1, 2, 3, 4}, 0.76).threshold == 6.0);
  CHECK(*calibrate_threshold(base, {1, 2, 3, 4}, 0.75).threshold == 4.5);
  CHECK_THROWS_AS(calibrate_threshold(base, {}, 1.0), Error);
  CHECK_THROWS_AS(calibrate_threshold(base, {1.0}, 0.0), Error);
  CHECK_THROWS_AS(verify(base, Eigen::Vector2d(0, 0)), Error);

  std::mt19937_64 rng(4);
  const auto train = random_vectors(6, 3, rng);
  UserModel m = fit_user_model(descriptors(train), 0.9, "a");
  std::vector<double> scores;
  for (const auto& v : train) scores.push_back(score(m, v));
  m = calibrate_threshold(m, scores, 1.0);
  for (const auto& v : train) CHECK(verify(m, v).accept);
  CHECK(verify(m, m.mean).accept);

  UserModel strict = m;
  strict.threshold = 0.0;
  const Verification r = verify(strict, train[0]);
  CHECK_FALSE(r.accept);
  CHECK(r.score > 0.0);
  CHECK(r.threshold == 0.0);

  for (const auto& probe : random_vectors(20, 3, rng)) {
    UserModel loose = m;
    const double s = score(m, probe);
    for (double tau : {s * 0.5, s, s * 2.0}) {
      loose.threshold = tau;
      CHECK(verify(loose, probe).accept == (s <= tau));
    }
  }
}

TEST_CASE("user model files round-trip") {
  test::TempDir dir("usermodel");
  std::mt19937_64 rng(5);
  UserModel m = fit_user_model(descriptors(random_vectors(4, 3, rng)), 0.9, "a");
  const auto path = dir.path() / "a.model";
  save_user_model(m, path, 1234);
  std::uint32_t crc = 0;
  UserModel back = load_user_model(path, &crc);
  CHECK(crc == 1234);
  CHECK(back.user_id == "a");
  CHECK(back.mean == m.mean);
  CHECK(back.covariance == m.covariance);
  CHECK_FALSE(back.threshold.has_value());
  m = calibrate_threshold(m, {0.5, 1.0 / 3.0}, 1.0);
  save_user_model(m, path);
  back = load_user_model(path);
  REQUIRE(back.threshold.has_value());
  CHECK(*back.threshold == *m.threshold);
  const Eigen::Vector3d probe(1, 2, 3);
  CHECK(score(back, probe) == score(m, probe));
}
