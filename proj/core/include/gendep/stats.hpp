#pragma once

#include <span>

#include <Eigen/Core>

namespace gendep::stats {

/// Shape/scale parameterization of the inverse-Gamma density
///   p(x) = beta^alpha / Gamma(alpha) * x^(-alpha-1) * exp(-beta/x).
struct InverseGammaParams {
  double shape = 1.0;  // alpha > 0
  double scale = 1.0;  // beta > 0
};

/// Axis-aligned Gaussian: independent coordinates with per-dimension variance.
struct DiagGaussian {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // strictly positive, same length as mean
};

/// log(sum_i exp(v_i)), max-shifted. Throws std::invalid_argument on empty input.
double log_sum_exp(std::span<const double> values);

/// -2*log_likelihood + param_count*ln(sample_count). sample_count must be >= 1.
double bic(double log_likelihood, int param_count, int sample_count);

/// Mode beta/(alpha+1) of the inverse-Gamma density.
double inverse_gamma_mode(const InverseGammaParams& p);

/// Unnormalized inverse-Gamma log density -(alpha+1)*ln(x) - beta/x.
double inverse_gamma_logkernel(double x, const InverseGammaParams& p);

/// Log density of x under a diagonal Gaussian; dimensions must match.
double diag_gaussian_logpdf(const Eigen::VectorXd& x, const DiagGaussian& g);

}  // namespace gendep::stats
