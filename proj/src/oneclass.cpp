#include "sigdesc/oneclass.hpp"

#include <algorithm>
#include <cmath>

#include "sigdesc/error.hpp"

namespace sigdesc {

namespace {

void factorize(UserModel& m) {
  m.factor.compute(m.covariance);
  if (m.factor.info() != Eigen::Success) {
    throw Error("user model '" + m.user_id + "': covariance is not positive definite");
  }
}

}  // namespace

UserModel fit_user_model(const std::vector<Descriptor>& descriptors, double reg,
                         const std::string& user_id) {
  if (descriptors.empty()) throw Error("fit_user_model: no descriptors for user '" + user_id + "'");
  if (!(reg >= 0.0 && reg <= 1.0)) throw Error("fit_user_model: reg must lie in [0, 1]");
  const Eigen::Index h = descriptors.front().values.size();
  for (const auto& d : descriptors) {
    if (d.source_user != user_id) {
      throw Error("fit_user_model: descriptor of user '" + d.source_user +
                  "' given for user '" + user_id + "'");
    }
    if (d.source_label != Label::genuine) {
      throw Error("fit_user_model: only genuine descriptors can enroll a user");
    }
    if (d.values.size() != h) throw Error("fit_user_model: descriptors differ in length");
  }

  const auto n = static_cast<Eigen::Index>(descriptors.size());
  Eigen::MatrixXd X(h, n);
  for (Eigen::Index i = 0; i < n; ++i) X.col(i) = descriptors[static_cast<std::size_t>(i)].values;

  UserModel m;
  m.user_id = user_id;
  m.reg = reg;
  m.n_train = static_cast<long>(n);
  m.mean = X.rowwise().mean();

  Eigen::MatrixXd sample = Eigen::MatrixXd::Zero(h, h);
  if (n > 1) {
    const Eigen::MatrixXd centered = X.colwise() - m.mean;
    sample = centered * centered.transpose() / static_cast<double>(n - 1);
  }
  const double avg_var = sample.trace() / static_cast<double>(h);
  if (sample.isZero(0.0)) {
    m.covariance = kCovarianceFloor * Eigen::MatrixXd::Identity(h, h);
  } else {
    m.covariance = (1.0 - reg) * sample;
    m.covariance.diagonal().array() += reg * avg_var;
  }
  m.factor.compute(m.covariance);
  if (m.factor.info() != Eigen::Success) {
    m.covariance.diagonal().array() += kCovarianceFloor * std::max(avg_var, 1.0);
    factorize(m);
  }
  return m;
}

double score(const UserModel& model, const Eigen::Ref<const Eigen::VectorXd>& descriptor) {
  if (descriptor.size() != model.mean.size()) {
    throw Error("score: descriptor length " + std::to_string(descriptor.size()) +
                " does not match model length " + std::to_string(model.mean.size()));
  }
  if (model.factor.info() != Eigen::Success || model.factor.rows() != model.mean.size()) {
    throw Error("score: user model '" + model.user_id + "' has no valid factorization");
  }
  const Eigen::VectorXd z = model.factor.matrixL().solve(descriptor - model.mean);
  return z.squaredNorm();
}

UserModel calibrate_threshold(UserModel model, std::vector<double> train_scores, double quantile) {
  if (train_scores.empty()) throw Error("calibrate_threshold: no training scores");
  if (!(quantile > 0.0 && quantile <= 1.0)) {
    throw Error("calibrate_threshold: quantile must lie in (0, 1]");
  }
  std::sort(train_scores.begin(), train_scores.end());
  const auto n = train_scores.size();
  auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  model.threshold = kThresholdSlack * train_scores[rank - 1];
  return model;
}

Verification verify(const UserModel& model, const Eigen::Ref<const Eigen::VectorXd>& descriptor) {
  if (!model.threshold) throw Error("verify: user model '" + model.user_id + "' has no threshold");
  Verification v;
  v.score = score(model, descriptor);
  v.threshold = *model.threshold;
  v.accept = v.score <= v.threshold;
  return v;
}

ModelContainer to_container(const UserModel& model, std::uint32_t descriptor_crc) {
  ModelContainer c("user");
  c.set("version", static_cast<long long>(kUserModelVersion));
  c.set("user_id", model.user_id);
  c.set("reg", model.reg);
  c.set("threshold", model.threshold ? format_double(*model.threshold) : std::string("unset"));
  c.set("n_train", static_cast<long long>(model.n_train));
  c.set("descriptor_crc32", static_cast<long long>(descriptor_crc));
  c.add_vector("mean", model.mean);
  c.add_matrix("covariance", model.covariance);
  return c;
}

UserModel user_model_from_container(const ModelContainer& c, std::uint32_t* descriptor_crc) {
  if (c.kind() != "user") {
    throw Error("model file holds a '" + c.kind() + "' model, expected a user model");
  }
  const long long version = c.get_int("version");
  if (version != kUserModelVersion) {
    throw VersionMismatch("user model", kUserModelVersion, static_cast<long>(version));
  }
  UserModel m;
  m.user_id = c.get("user_id");
  m.reg = c.get_double("reg");
  if (c.get("threshold") != "unset") m.threshold = c.get_double("threshold");
  m.n_train = static_cast<long>(c.get_int("n_train"));
  m.mean = c.vector("mean");
  m.covariance = c.matrix("covariance");
  if (m.covariance.rows() != m.mean.size() || m.covariance.cols() != m.mean.size()) {
    throw Error("user model arrays have inconsistent shapes");
  }
  factorize(m);
  if (descriptor_crc != nullptr) {
    *descriptor_crc = static_cast<std::uint32_t>(c.get_int("descriptor_crc32"));
  }
  return m;
}

void save_user_model(const UserModel& model, const std::filesystem::path& path,
                     std::uint32_t descriptor_crc) {
  to_container(model, descriptor_crc).save(path);
}

UserModel load_user_model(const std::filesystem::path& path, std::uint32_t* descriptor_crc) {
  return user_model_from_container(ModelContainer::load(path), descriptor_crc);
}

}  // namespace sigdesc
