#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace sigdesc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Encoder/decoder weights of a single-hidden-layer autoencoder.
/// Flattened order: W1 (row-major), b1, W2 (row-major), b2.
struct AeParams {
  RowMatrix W1;  // hidden x input
  Eigen::VectorXd b1;
  RowMatrix W2;  // input x hidden
  Eigen::VectorXd b2;

  Eigen::Index input_dim() const { return W1.cols(); }
  Eigen::Index hidden() const { return W1.rows(); }
  Eigen::Index size() const { return 2 * W1.size() + b1.size() + b2.size(); }

  Eigen::VectorXd flatten() const;
  static AeParams unflatten(const Eigen::VectorXd& theta, Eigen::Index input_dim,
                            Eigen::Index hidden);
};

struct AeConfig {
  int hidden = 64;
  double lambda = 3e-3;  // weight decay on W1 and W2
  double beta = 3.0;     // sparsity penalty weight
  double rho = 0.05;     // target mean activation
  int max_iter = 200;
  int lbfgs_memory = 10;
  double tol_grad = 1e-5;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const AeConfig&, const AeConfig&) = default;
};

struct AutoencoderModel {
  AeParams params;
  AeConfig config;
  Eigen::Index input_dim = 0;
  double final_cost = 0.0;
  // Training diagnostics; not persisted.
  double initial_cost = 0.0;
  int iterations = 0;
  bool line_search_failed = false;
  std::vector<double> cost_history;
};

/// W1, W2 ~ U[-r, r] with r = sqrt(6 / (d + h + 1)); biases zero.
AeParams init_params(Eigen::Index input_dim, Eigen::Index hidden, std::uint64_t seed);

struct ForwardPass {
  Eigen::VectorXd activation;      // logistic hidden layer
  Eigen::VectorXd reconstruction;  // linear output layer
};

ForwardPass forward(const AeParams& params, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Sparse objective over the columns of `batch`:
///   (1/m) sum ||x_hat - x||^2 + lambda (||W1||^2 + ||W2||^2)
///     + beta sum_j KL(rho || rho_hat_j)
/// with rho_hat_j the mean activation of hidden unit j, clamped to
/// [1e-8, 1 - 1e-8] inside the logarithms.
double cost(const AeParams& params, const Eigen::MatrixXd& batch, const AeConfig& cfg);

struct CostGradient {
  double cost = 0.0;
  Eigen::VectorXd grad;  // flattened like AeParams::flatten
};

CostGradient cost_grad(const AeParams& params, const Eigen::MatrixXd& batch, const AeConfig& cfg);

/// KL divergence between Bernoulli(rho) and Bernoulli(rho_hat), with rho_hat
/// clamped like in cost().
double bernoulli_kl(double rho, double rho_hat);

/// Full-batch L-BFGS minimization of the sparse objective, starting from
/// init_params(d, cfg.hidden, cfg.seed).
AutoencoderModel train(const Eigen::MatrixXd& patches, const AeConfig& cfg);

/// Hidden activations for one whitened patch.
Eigen::VectorXd encode(const AutoencoderModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Hidden activations for every column; each column equals encode() exactly.
Eigen::MatrixXd encode_batch(const AutoencoderModel& model, const Eigen::MatrixXd& patches);

}  // namespace sigdesc
