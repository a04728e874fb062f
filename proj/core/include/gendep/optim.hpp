#pragma once

#include <functional>

#include <Eigen/Core>

namespace gendep::optim {

/// Objective callback: returns f(x) and fills grad (same size as x).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct Options {
  int max_iter = 200;
  double grad_tol = 1e-6;   // stop when ||grad||_inf <= grad_tol
  double min_step = 1e-16;  // line search failure threshold
};

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Dense BFGS with Armijo backtracking. Monotone: accepted iterates never
/// increase the objective.
Result minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const Options& opts = {});

/// Polak-Ribiere(+) nonlinear conjugate gradient with Armijo backtracking and
/// automatic restarts on non-descent directions. Monotone like minimize_bfgs.
Result minimize_cg(const Objective& f, Eigen::VectorXd x0, const Options& opts = {});

}  // namespace gendep::optim
