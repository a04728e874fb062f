#include "gendep/optim.hpp"

#include <cmath>

namespace gendep::optim {

namespace {

constexpr double kArmijoC1 = 1e-4;

// Backtracking line search; returns accepted step length or 0 on failure.
// On success x, fx, grad hold the accepted point.
double line_search(const Objective& f, const Eigen::VectorXd& x0, double f0,
                   const Eigen::VectorXd& g0, const Eigen::VectorXd& dir, double t0,
                   double min_step, Eigen::VectorXd& x, double& fx, Eigen::VectorXd& grad) {
  const double slope = g0.dot(dir);
  if (!(slope < 0.0)) return 0.0;  // not a descent direction
  double t = t0;
  while (t >= min_step) {
    x = x0 + t * dir;
    fx = f(x, grad);
    if (std::isfinite(fx) && fx <= f0 + kArmijoC1 * t * slope) return t;
    t *= 0.5;
  }
  return 0.0;
}

}  // namespace

Result minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const Options& opts) {
  const Eigen::Index n = x0.size();
  Result res;
  res.x = std::move(x0);
  Eigen::VectorXd grad(n);
  res.value = f(res.x, grad);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);

  Eigen::VectorXd x_new(n), g_new(n);
  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    res.grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXd dir = -(h_inv * grad);
    if (!(grad.dot(dir) < 0.0)) {  // reset on loss of descent (numerical)
      h_inv.setIdentity();
      dir = -grad;
    }
    double f_new = res.value;
    const double t = line_search(f, res.x, res.value, grad, dir, 1.0, opts.min_step, x_new, f_new, g_new);
    if (t == 0.0) return res;  // no acceptable step; stationary for our purposes

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd outer_sy = s * y.transpose();
      h_inv = (Eigen::MatrixXd::Identity(n, n) - rho * outer_sy) * h_inv *
                  (Eigen::MatrixXd::Identity(n, n) - rho * outer_sy.transpose()) +
              rho * s * s.transpose();
    }  // else: skip update, keep curvature estimate positive definite

    res.x = x_new;
    res.value = f_new;
    grad = g_new;
  }
  res.grad_norm = grad.lpNorm<Eigen::Infinity>();
  res.converged = res.grad_norm <= opts.grad_tol;
  return res;
}

Result minimize_cg(const Objective& f, Eigen::VectorXd x0, const Options& opts) {
  const Eigen::Index n = x0.size();
  Result res;
  res.x = std::move(x0);
  Eigen::VectorXd grad(n);
  res.value = f(res.x, grad);
  Eigen::VectorXd dir = -grad;
  Eigen::VectorXd g_prev = grad;
  double t_prev = 1.0;

  Eigen::VectorXd x_new(n), g_new(n);
  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    res.grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      return res;
    }
    if (!(grad.dot(dir) < 0.0)) dir = -grad;  // restart
    double f_new = res.value;
    const double t = line_search(f, res.x, res.value, grad, dir, std::max(t_prev * 2.0, 1e-8),
                                 opts.min_step, x_new, f_new, g_new);
    if (t == 0.0) return res;
    t_prev = t;

    // Polak-Ribiere+ coefficient
    const double denom = grad.squaredNorm();
    const double beta = denom > 0.0 ? std::max(0.0, g_new.dot(g_new - grad) / denom) : 0.0;
    g_prev = grad;
    res.x = x_new;
    res.value = f_new;
    grad = g_new;
    dir = -grad + beta * dir;
  }
  res.grad_norm = grad.lpNorm<Eigen::Infinity>();
  res.converged = res.grad_norm <= opts.grad_tol;
  return res;
}

}  // namespace gendep::optim
