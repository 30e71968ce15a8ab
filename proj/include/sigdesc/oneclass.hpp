#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sigdesc/container.hpp"
#include "sigdesc/descriptor.hpp"

namespace sigdesc {

inline constexpr long kUserModelVersion = 1;
/// Variance floor used when the sample covariance vanishes.
inline constexpr double kCovarianceFloor = 1e-6;
/// Multiplier applied to the calibrated training-score quantile.
inline constexpr double kThresholdSlack = 1.5;

/// Gaussian reference model of one user's genuine descriptors.
struct UserModel {
  std::string user_id;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double reg = 0.9;
  std::optional<double> threshold;
  long n_train = 0;
  /// Cholesky factor of `covariance`; rebuilt by fit and load.
  Eigen::LLT<Eigen::MatrixXd> factor;
};

/// mean = sample mean; covariance = (1 - reg) S + reg (tr(S)/h) I with S the
/// unbiased sample covariance, or kCovarianceFloor * I when S is zero. If the
/// shrunk matrix is still singular, a floor of kCovarianceFloor * max(tr(S)/h, 1)
/// is added to the diagonal.
UserModel fit_user_model(const std::vector<Descriptor>& descriptors, double reg,
                         const std::string& user_id);

/// Squared Mahalanobis distance to the model mean.
double score(const UserModel& model, const Eigen::Ref<const Eigen::VectorXd>& descriptor);

/// threshold = kThresholdSlack * nearest-rank quantile of `train_scores`.
UserModel calibrate_threshold(UserModel model, std::vector<double> train_scores, double quantile);

struct Verification {
  bool accept = false;
  double score = 0.0;
  double threshold = 0.0;
};

/// Accept iff score <= threshold. Throws if the threshold was never set.
Verification verify(const UserModel& model, const Eigen::Ref<const Eigen::VectorXd>& descriptor);

/// `descriptor_crc` ties the user model to the descriptor model file used for
/// enrollment (0 when unknown).
ModelContainer to_container(const UserModel& model, std::uint32_t descriptor_crc = 0);
UserModel user_model_from_container(const ModelContainer& container,
                                    std::uint32_t* descriptor_crc = nullptr);

void save_user_model(const UserModel& model, const std::filesystem::path& path,
                     std::uint32_t descriptor_crc = 0);
UserModel load_user_model(const std::filesystem::path& path, std::uint32_t* descriptor_crc = nullptr);

}  // namespace sigdesc
