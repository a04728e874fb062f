#include "gendep/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gendep::stats {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp: empty vector");
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;  // all -inf stays -inf
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

double bic(double log_likelihood, int param_count, int sample_count) {
  if (sample_count < 1) throw std::invalid_argument("bic: sample_count must be >= 1");
  if (param_count < 0) throw std::invalid_argument("bic: param_count must be >= 0");
  return -2.0 * log_likelihood + static_cast<double>(param_count) * std::log(static_cast<double>(sample_count));
}

double inverse_gamma_mode(const InverseGammaParams& p) {
  if (p.shape <= 0.0 || p.scale <= 0.0)
    throw std::invalid_argument("inverse_gamma_mode: shape and scale must be positive");
  return p.scale / (p.shape + 1.0);
}

double inverse_gamma_logkernel(double x, const InverseGammaParams& p) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return -(p.shape + 1.0) * std::log(x) - p.scale / x;
}

double diag_gaussian_logpdf(const Eigen::VectorXd& x, const DiagGaussian& g) {
  if (g.mean.size() != g.variance.size())
    throw std::invalid_argument("diag_gaussian_logpdf: mean/variance length mismatch");
  if (x.size() != g.mean.size())
    throw std::invalid_argument("diag_gaussian_logpdf: dimension mismatch");
  constexpr double log2pi = 1.8378770664093454836;  // ln(2*pi)
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double s2 = g.variance[i];
    if (s2 <= 0.0) throw std::invalid_argument("diag_gaussian_logpdf: nonpositive variance");
    const double r = x[i] - g.mean[i];
    acc += -0.5 * (log2pi + std::log(s2)) - r * r / (2.0 * s2);
  }
  return acc;
}

}  // namespace gendep::stats
