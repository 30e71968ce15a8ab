#include "sigdesc/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "sigdesc/error.hpp"

namespace sigdesc {
namespace {

struct Trial {
  double alpha = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
};

/// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db),
/// safeguarded into the middle 80% of the interval.
double cubic_step(const Trial& a, const Trial& b) {
  const double lo = std::min(a.alpha, b.alpha), hi = std::max(a.alpha, b.alpha);
  const double margin = 0.1 * (hi - lo);
  const double d1 = a.dphi + b.dphi - 3.0 * (a.phi - b.phi) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.dphi * b.dphi;
  double next = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.dphi - a.dphi + 2.0 * d2;
    if (denom != 0.0) {
      const double c = b.alpha - (b.alpha - a.alpha) * (b.dphi + d2 - d1) / denom;
      if (std::isfinite(c)) next = c;
    }
  }
  if (next < lo + margin || next > hi - margin) next = 0.5 * (lo + hi);
  return next;
}

class LineSearch {
 public:
  LineSearch(const Objective& f, const LbfgsOptions& opt, const Eigen::VectorXd& x,
             double phi0, const Eigen::VectorXd& direction, double dphi0)
      : f_(f), opt_(opt), x_(x), dir_(direction), phi0_(phi0), dphi0_(dphi0) {}

  /// Returns true and fills `out` when a strong-Wolfe step is found.
  bool search(double alpha, Trial& out) {
    Trial prev;
    prev.alpha = 0.0;
    prev.phi = phi0_;
    prev.dphi = dphi0_;
    for (bool first = true; evaluations_ < opt_.max_line_search; first = false) {
      Trial cur = evaluate(alpha);
      if (!armijo(cur) || (!first && cur.phi >= prev.phi)) return zoom(prev, cur, out);
      if (std::abs(cur.dphi) <= -opt_.c2 * dphi0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.dphi >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return false;
  }

  int evaluations() const { return evaluations_; }

 private:
  bool armijo(const Trial& t) const {
    return std::isfinite(t.phi) && t.phi <= phi0_ + opt_.c1 * t.alpha * dphi0_;
  }

  Trial evaluate(double alpha) {
    Trial t;
    t.alpha = alpha;
    t.x = x_ + alpha * dir_;
    t.grad.resize(t.x.size());
    t.phi = f_(t.x, t.grad);
    t.dphi = std::isfinite(t.phi) ? t.grad.dot(dir_) : 0.0;
    ++evaluations_;
    return t;
  }

  bool zoom(Trial lo, Trial hi, Trial& out) {
    while (evaluations_ < opt_.max_line_search) {
      const double alpha = std::isfinite(hi.phi) ? cubic_step(lo, hi) : 0.5 * (lo.alpha + hi.alpha);
      if (alpha == lo.alpha || alpha == hi.alpha) return false;
      Trial cur = evaluate(alpha);
      if (!armijo(cur) || cur.phi >= lo.phi) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.dphi) <= -opt_.c2 * dphi0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return false;
  }

  const Objective& f_;
  const LbfgsOptions& opt_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& dir_;
  double phi0_;
  double dphi0_;
  int evaluations_ = 0;
};

struct Correction {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<Correction>& memory, const Eigen::VectorXd& grad) {
  Eigen::VectorXd q = grad;
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    alpha[k] = memory[k].rho * memory[k].s.dot(q);
    q -= alpha[k] * memory[k].y;
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double beta = memory[k].rho * memory[k].y.dot(q);
    q += (alpha[k] - beta) * memory[k].s;
  }
  return -q;
}

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options) {
  if (options.memory < 1) throw Error("lbfgs: memory must be >= 1");
  if (options.max_iterations < 0) throw Error("lbfgs: max_iterations must be >= 0");

  LbfgsResult result;
  result.x = std::move(x0);
  Eigen::VectorXd grad(result.x.size());
  result.cost = objective(result.x, grad);
  result.evaluations = 1;
  if (!std::isfinite(result.cost) || !grad.allFinite()) {
    throw Error("lbfgs: objective is not finite at the starting point");
  }
  result.initial_cost = result.cost;
  result.history.push_back(result.cost);

  std::deque<Correction> memory;
  while (true) {
    result.grad_inf_norm = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
    if (result.grad_inf_norm <= options.tol_grad) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;

    Eigen::VectorXd direction = two_loop(memory, grad);
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      memory.clear();
      direction = -grad;
      slope = -grad.squaredNorm();
    }
    const double alpha0 = memory.empty() ? std::min(1.0, 1.0 / grad.norm()) : 1.0;

    LineSearch search(objective, options, result.x, result.cost, direction, slope);
    Trial step;
    const bool ok = search.search(alpha0, step);
    result.evaluations += search.evaluations();
    if (!ok) {
      result.line_search_failed = true;
      break;
    }

    Correction c{step.x - result.x, step.grad - grad, 0.0};
    const double sy = c.s.dot(c.y);
    if (sy > 1e-12 * c.y.squaredNorm() && sy > 0.0) {
      c.rho = 1.0 / sy;
      memory.push_back(std::move(c));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    result.x = std::move(step.x);
    grad = std::move(step.grad);
    result.cost = step.phi;
    ++result.iterations;
    result.history.push_back(result.cost);
  }
  return result;
}

}  // namespace sigdesc
