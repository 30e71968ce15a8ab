#include "sigdesc/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sigdesc/error.hpp"
#include "sigdesc/lbfgs.hpp"

namespace sigdesc {
namespace {

constexpr double kRhoClamp = 1e-8;

using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

struct ParamView {
  ConstRowMap W1;
  Eigen::Map<const Eigen::VectorXd> b1;
  ConstRowMap W2;
  Eigen::Map<const Eigen::VectorXd> b2;

  ParamView(const double* p, Eigen::Index d, Eigen::Index h)
      : W1(p, h, d), b1(p + h * d, h), W2(p + h * d + h, d, h), b2(p + 2 * h * d + h, d) {}
};

/// Hidden activations of one input, summed in a fixed per-unit order.
/// `w1t` is W1 transposed (d x h).
void hidden_layer(const RowMatrix& w1t, const Eigen::VectorXd& b1, const double* x, double* out) {
  const Eigen::Index d = w1t.rows(), h = w1t.cols();
  for (Eigen::Index j = 0; j < h; ++j) out[j] = b1[j];
  for (Eigen::Index k = 0; k < d; ++k) {
    const double xk = x[k];
    const double* w = w1t.data() + k * h;
    for (Eigen::Index j = 0; j < h; ++j) out[j] += w[j] * xk;
  }
  for (Eigen::Index j = 0; j < h; ++j) out[j] = 1.0 / (1.0 + std::exp(-out[j]));
}

Eigen::MatrixXd logistic(const Eigen::MatrixXd& z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

void check_batch(const Eigen::MatrixXd& batch, Eigen::Index d) {
  if (batch.rows() != d) {
    throw Error("autoencoder: batch rows " + std::to_string(batch.rows()) +
                " do not match input dimension " + std::to_string(d));
  }
  if (batch.cols() < 1) throw Error("autoencoder: empty batch");
}

/// Objective and (optionally) gradient for flat parameters.
double evaluate(const double* theta, Eigen::Index d, Eigen::Index h, const Eigen::MatrixXd& X,
                const AeConfig& cfg, double* grad_out) {
  const ParamView p(theta, d, h);
  const double m = static_cast<double>(X.cols());

  Eigen::MatrixXd A = logistic((p.W1 * X).colwise() + p.b1);
  Eigen::MatrixXd R = (p.W2 * A).colwise() + p.b2;
  R -= X;

  const Eigen::VectorXd rho_hat = A.rowwise().mean();
  double sparsity = 0.0;
  Eigen::VectorXd sparsity_grad = Eigen::VectorXd::Zero(h);
  for (Eigen::Index j = 0; j < h; ++j) {
    const double r = rho_hat(j);
    const double clamped = std::clamp(r, kRhoClamp, 1.0 - kRhoClamp);
    sparsity += bernoulli_kl(cfg.rho, clamped);
    if (r == clamped) sparsity_grad(j) = cfg.beta * (-cfg.rho / r + (1.0 - cfg.rho) / (1.0 - r)) / m;
  }

  const double decay = p.W1.squaredNorm() + p.W2.squaredNorm();
  const double value = R.squaredNorm() / m + cfg.lambda * decay + cfg.beta * sparsity;
  if (!std::isfinite(value)) throw Error("autoencoder: objective became non-finite");
  if (grad_out == nullptr) return value;

  RowMap gW1(grad_out, h, d);
  Eigen::Map<Eigen::VectorXd> gb1(grad_out + h * d, h);
  RowMap gW2(grad_out + h * d + h, d, h);
  Eigen::Map<Eigen::VectorXd> gb2(grad_out + 2 * h * d + h, d);

  R *= 2.0 / m;  // d cost / d x_hat
  gW2.noalias() = R * A.transpose();
  gW2 += 2.0 * cfg.lambda * p.W2;
  gb2 = R.rowwise().sum();

  Eigen::MatrixXd delta = p.W2.transpose() * R;
  delta.colwise() += sparsity_grad;
  delta.array() *= A.array() * (1.0 - A.array());
  gW1.noalias() = delta * X.transpose();
  gW1 += 2.0 * cfg.lambda * p.W1;
  gb1 = delta.rowwise().sum();
  return value;
}

}  // namespace

void AeConfig::validate() const {
  if (hidden < 1) throw Error("ae.hidden must be >= 1");
  if (!(lambda >= 0.0)) throw Error("ae.lambda must be >= 0");
  if (!(beta >= 0.0)) throw Error("ae.beta must be >= 0");
  if (!(rho > 0.0 && rho < 1.0)) throw Error("ae.rho must lie strictly inside (0, 1)");
  if (max_iter < 0) throw Error("ae.max_iter must be >= 0");
  if (lbfgs_memory < 1) throw Error("ae.lbfgs_memory must be >= 1");
  if (!(tol_grad >= 0.0)) throw Error("ae.tol_grad must be >= 0");
}

Eigen::VectorXd AeParams::flatten() const {
  const Eigen::Index d = input_dim(), h = hidden();
  Eigen::VectorXd theta(size());
  RowMap(theta.data(), h, d) = W1;
  theta.segment(h * d, h) = b1;
  RowMap(theta.data() + h * d + h, d, h) = W2;
  theta.segment(2 * h * d + h, d) = b2;
  return theta;
}

AeParams AeParams::unflatten(const Eigen::VectorXd& theta, Eigen::Index d, Eigen::Index h) {
  if (theta.size() != 2 * h * d + h + d) throw Error("AeParams::unflatten: size mismatch");
  const ParamView v(theta.data(), d, h);
  return AeParams{v.W1, v.b1, v.W2, v.b2};
}

AeParams init_params(Eigen::Index d, Eigen::Index h, std::uint64_t seed) {
  if (d < 1 || h < 1) throw Error("init_params: dimensions must be >= 1");
  const double r = std::sqrt(6.0 / static_cast<double>(d + h + 1));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-r, r);
  AeParams p{RowMatrix(h, d), Eigen::VectorXd::Zero(h), RowMatrix(d, h), Eigen::VectorXd::Zero(d)};
  for (Eigen::Index i = 0; i < p.W1.size(); ++i) p.W1.data()[i] = uniform(rng);
  for (Eigen::Index i = 0; i < p.W2.size(); ++i) p.W2.data()[i] = uniform(rng);
  return p;
}

ForwardPass forward(const AeParams& params, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != params.input_dim()) {
    throw Error("forward: input length " + std::to_string(x.size()) +
                " does not match " + std::to_string(params.input_dim()));
  }
  ForwardPass out;
  const RowMatrix w1t = params.W1.transpose();
  const Eigen::VectorXd input = x;
  out.activation.resize(params.hidden());
  hidden_layer(w1t, params.b1, input.data(), out.activation.data());
  out.reconstruction = params.W2 * out.activation + params.b2;
  return out;
}

double bernoulli_kl(double rho, double rho_hat) {
  rho_hat = std::clamp(rho_hat, kRhoClamp, 1.0 - kRhoClamp);
  return rho * std::log(rho / rho_hat) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - rho_hat));
}

double cost(const AeParams& params, const Eigen::MatrixXd& batch, const AeConfig& cfg) {
  check_batch(batch, params.input_dim());
  const Eigen::VectorXd theta = params.flatten();
  return evaluate(theta.data(), params.input_dim(), params.hidden(), batch, cfg, nullptr);
}

CostGradient cost_grad(const AeParams& params, const Eigen::MatrixXd& batch, const AeConfig& cfg) {
  check_batch(batch, params.input_dim());
  const Eigen::VectorXd theta = params.flatten();
  CostGradient out;
  out.grad.resize(theta.size());
  out.cost = evaluate(theta.data(), params.input_dim(), params.hidden(), batch, cfg, out.grad.data());
  return out;
}

AutoencoderModel train(const Eigen::MatrixXd& patches, const AeConfig& cfg) {
  cfg.validate();
  if (patches.cols() < 1) throw Error("train: at least one patch is required");
  if (!patches.allFinite()) throw Error("train: patches contain non-finite values");
  const Eigen::Index d = patches.rows(), h = cfg.hidden;

  const Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    return evaluate(theta.data(), d, h, patches, cfg, grad.data());
  };
  LbfgsOptions opt;
  opt.max_iterations = cfg.max_iter;
  opt.memory = cfg.lbfgs_memory;
  opt.tol_grad = cfg.tol_grad;
  LbfgsResult result = minimize_lbfgs(objective, init_params(d, h, cfg.seed).flatten(), opt);

  AutoencoderModel model;
  model.params = AeParams::unflatten(result.x, d, h);
  model.config = cfg;
  model.input_dim = d;
  model.final_cost = result.cost;
  model.initial_cost = result.initial_cost;
  model.iterations = result.iterations;
  model.line_search_failed = result.line_search_failed;
  model.cost_history = std::move(result.history);
  return model;
}

Eigen::VectorXd encode(const AutoencoderModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return forward(model.params, x).activation;
}

Eigen::MatrixXd encode_batch(const AutoencoderModel& model, const Eigen::MatrixXd& patches) {
  if (patches.rows() != model.params.input_dim()) {
    throw Error("encode: input length " + std::to_string(patches.rows()) + " does not match " +
                std::to_string(model.params.input_dim()));
  }
  const RowMatrix w1t = model.params.W1.transpose();
  Eigen::MatrixXd out(model.params.hidden(), patches.cols());
  for (Eigen::Index i = 0; i < patches.cols(); ++i) {
    hidden_layer(w1t, model.params.b1, patches.col(i).data(), out.col(i).data());
  }
  return out;
}

}  // namespace sigdesc
