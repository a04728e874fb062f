#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gendep/data.hpp"
#include "gendep/stats.hpp"

namespace gendep::rpa {

/// Per-probe log-ratios against a fixed reference array: m_tj = s_tj - s_cj.
/// Probe affinities cancel in the subtraction, so none are modeled here.
struct DifferentialMatrix {
  Eigen::MatrixXd values;  // T non-reference arrays x J probes
  std::string reference_id;
  std::vector<std::string> array_ids;  // length T, reference excluded
  std::vector<std::string> probe_ids;  // length J

  Eigen::Index n_arrays() const { return values.rows(); }
  Eigen::Index n_probes() const { return values.cols(); }
};

/// Independent inverse-Gamma priors on the per-probe variances.
struct Priors {
  std::vector<stats::InverseGammaParams> probe;

  /// Weakly informative default: alpha_j = beta_j = 1e-2 for every probe.
  static Priors flat(Eigen::Index n_probes, double alpha = 1e-2, double beta = 1e-2);
};

struct Fit {
  Eigen::VectorXd d;     // shared differential signal, length T
  Eigen::VectorXd tau2;  // per-probe variances, length J; strictly positive
  std::vector<stats::InverseGammaParams> posterior;  // (alpha_hat_j, beta_hat_j)
  double log_posterior = 0.0;  // log of the unnormalized joint posterior
  int iterations = 0;
  bool converged = false;
};

/// Subtract the reference column: m_tj = s_tj - s_cj for every other array t.
/// probe_ids selects and orders the rows used; the reference must be a sample
/// id of expr and expr must have at least two samples.
DifferentialMatrix differential_matrix(const ExpressionMatrix& expr,
                                       const std::vector<std::string>& probe_ids,
                                       const std::string& reference);

/// MAP fit of (d, tau2) by exact alternating maximization of the posterior:
/// tau2_j <- beta_hat_j / (alpha_hat_j + 1) and d <- the solution of the
/// stationarity system of the penalized residual sum, which reduces to the
/// precision-weighted probe mean. The log posterior is non-decreasing across
/// iterations; convergence when its relative change drops below tol.
Fit fit(const DifferentialMatrix& m, const Priors& priors, double tol = 1e-6, int max_iter = 100);

/// Probe-level expression change averaging baseline: per-array median of m_tj
/// over probes.
Eigen::VectorXd peca_summarize(const DifferentialMatrix& m);

/// Log of the unnormalized posterior at (d, tau2) under the given priors.
double log_posterior(const DifferentialMatrix& m, const Priors& priors, const Eigen::VectorXd& d,
                     const Eigen::VectorXd& tau2);

nlohmann::json fit_to_json(const std::string& probeset_id, const DifferentialMatrix& m,
                           const Fit& fit);

}  // namespace gendep::rpa
