#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace sigdesc {

/// Objective callback: returns f(x) and writes the gradient into `grad`
/// (already sized like x).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  int max_iterations = 200;
  int memory = 10;
  double tol_grad = 1e-5;   // stop when ||grad||_inf <= tol_grad
  double c1 = 1e-4;         // sufficient decrease
  double c2 = 0.9;          // curvature (strong Wolfe)
  int max_line_search = 40; // objective evaluations per line search
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double cost = 0.0;
  double initial_cost = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool line_search_failed = false;
  /// Cost at the start and after every accepted iteration.
  std::vector<double> history;
};

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing + cubic
/// zoom). Accepted costs never increase. If a line search exhausts its
/// evaluation budget, the current point is returned with line_search_failed.
LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {});

}  // namespace sigdesc
