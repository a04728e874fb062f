#include "gendep/rpa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gendep::rpa {

namespace {

// beta_hat_j = beta_j + 0.5*sum_t r_tj^2 - 0.5*(sum_t r_tj)^2/(T+1), r = m - d.
Eigen::VectorXd beta_hat(const DifferentialMatrix& m, const Priors& priors,
                         const Eigen::VectorXd& d) {
  const Eigen::Index t_arrays = m.n_arrays();
  const Eigen::Index j_probes = m.n_probes();
  Eigen::VectorXd out(j_probes);
  for (Eigen::Index j = 0; j < j_probes; ++j) {
    double sum = 0.0, sum_sq = 0.0;
    for (Eigen::Index t = 0; t < t_arrays; ++t) {
      const double r = m.values(t, j) - d[t];
      sum += r;
      sum_sq += r * r;
    }
    out[j] = priors.probe[static_cast<std::size_t>(j)].scale + 0.5 * sum_sq -
             0.5 * sum * sum / (static_cast<double>(t_arrays) + 1.0);
  }
  return out;
}

}  // namespace

Priors Priors::flat(Eigen::Index n_probes, double alpha, double beta) {
  if (alpha <= 0.0 || beta <= 0.0) throw std::invalid_argument("rpa::Priors: alpha and beta must be positive");
  Priors p;
  p.probe.assign(static_cast<std::size_t>(n_probes), stats::InverseGammaParams{alpha, beta});
  return p;
}

DifferentialMatrix differential_matrix(const ExpressionMatrix& expr,
                                       const std::vector<std::string>& probe_ids,
                                       const std::string& reference) {
  const Eigen::Index ref = expr.sample_index(reference);
  if (ref < 0) throw std::invalid_argument("differential_matrix: unknown reference sample '" + reference + "'");
  if (expr.n_samples() < 2) throw std::invalid_argument("differential_matrix: no non-reference arrays");

  DifferentialMatrix m;
  m.reference_id = reference;
  m.probe_ids = probe_ids;
  const Eigen::MatrixXd probes = expr.rows(probe_ids);  // throws on unknown probe id

  m.values.resize(expr.n_samples() - 1, static_cast<Eigen::Index>(probe_ids.size()));
  Eigen::Index row = 0;
  for (Eigen::Index s = 0; s < expr.n_samples(); ++s) {
    if (s == ref) continue;
    m.array_ids.push_back(expr.sample_ids[static_cast<std::size_t>(s)]);
    for (Eigen::Index j = 0; j < probes.rows(); ++j)
      m.values(row, j) = probes(j, s) - probes(j, ref);
    ++row;
  }
  return m;
}

double log_posterior(const DifferentialMatrix& m, const Priors& priors, const Eigen::VectorXd& d,
                     const Eigen::VectorXd& tau2) {
  const Eigen::Index j_probes = m.n_probes();
  const double alpha_shift = 0.5 * static_cast<double>(m.n_arrays());
  const Eigen::VectorXd bh = beta_hat(m, priors, d);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < j_probes; ++j) {
    const double alpha_hat = priors.probe[static_cast<std::size_t>(j)].shape + alpha_shift;
    acc += -(alpha_hat + 1.0) * std::log(tau2[j]) - bh[j] / tau2[j];
  }
  return acc;
}

Fit fit(const DifferentialMatrix& m, const Priors& priors, double tol, int max_iter) {
  const Eigen::Index t_arrays = m.n_arrays();
  const Eigen::Index j_probes = m.n_probes();
  if (t_arrays < 1 || j_probes < 1) throw std::invalid_argument("rpa::fit: need T >= 1 and J >= 1");
  if (priors.probe.size() != static_cast<std::size_t>(j_probes))
    throw std::invalid_argument("rpa::fit: priors must cover all probes");
  for (const auto& p : priors.probe)
    if (p.shape <= 0.0 || p.scale <= 0.0)
      throw std::invalid_argument("rpa::fit: prior parameters must be positive");

  const double alpha_shift = 0.5 * static_cast<double>(t_arrays);

  Fit out;
  out.d = Eigen::VectorXd::Zero(t_arrays);
  out.tau2.resize(j_probes);
  for (Eigen::Index j = 0; j < j_probes; ++j)
    out.tau2[j] = stats::inverse_gamma_mode(priors.probe[static_cast<std::size_t>(j)]);

  double prev = log_posterior(m, priors, out.d, out.tau2);
  for (out.iterations = 1; out.iterations <= max_iter; ++out.iterations) {
    // d-step: the stationarity system of the penalized residual sum is linear
    // in d and its unique solution is the precision-weighted probe mean (the
    // rank-one (T+1) correction sums to zero at the optimum).
    double weight_total = 0.0;
    Eigen::VectorXd weighted(t_arrays);
    weighted.setZero();
    for (Eigen::Index j = 0; j < j_probes; ++j) {
      const double w = 1.0 / out.tau2[j];
      weight_total += w;
      weighted += w * m.values.col(j);
    }
    out.d = weighted / weight_total;

    // tau2-step: posterior mode of each probe variance.
    const Eigen::VectorXd bh = beta_hat(m, priors, out.d);
    for (Eigen::Index j = 0; j < j_probes; ++j) {
      const double alpha_hat = priors.probe[static_cast<std::size_t>(j)].shape + alpha_shift;
      out.tau2[j] = bh[j] / (alpha_hat + 1.0);
    }

    const double current = log_posterior(m, priors, out.d, out.tau2);
    if (std::abs(current - prev) < tol * std::max(1.0, std::abs(prev))) {
      prev = current;
      out.converged = true;
      break;
    }
    prev = current;
  }
  out.iterations = std::min(out.iterations, max_iter);
  out.log_posterior = prev;

  const Eigen::VectorXd bh = beta_hat(m, priors, out.d);
  out.posterior.resize(static_cast<std::size_t>(j_probes));
  for (Eigen::Index j = 0; j < j_probes; ++j) {
    out.posterior[static_cast<std::size_t>(j)] = {
        priors.probe[static_cast<std::size_t>(j)].shape + alpha_shift, bh[j]};
  }
  return out;
}

Eigen::VectorXd peca_summarize(const DifferentialMatrix& m) {
  if (m.n_probes() < 1) throw std::invalid_argument("peca_summarize: need J >= 1");
  Eigen::VectorXd out(m.n_arrays());
  std::vector<double> row(static_cast<std::size_t>(m.n_probes()));
  for (Eigen::Index t = 0; t < m.n_arrays(); ++t) {
    for (Eigen::Index j = 0; j < m.n_probes(); ++j) row[static_cast<std::size_t>(j)] = m.values(t, j);
    std::sort(row.begin(), row.end());
    const std::size_t mid = row.size() / 2;
    out[t] = row.size() % 2 == 1 ? row[mid] : 0.5 * (row[mid - 1] + row[mid]);
  }
  return out;
}

nlohmann::json fit_to_json(const std::string& probeset_id, const DifferentialMatrix& m,
                           const Fit& fit) {
  nlohmann::json j;
  j["type"] = "rpa_fit";
  j["probeset_id"] = probeset_id;
  j["reference_id"] = m.reference_id;
  j["array_ids"] = m.array_ids;
  j["probe_ids"] = m.probe_ids;
  j["d"] = std::vector<double>(fit.d.data(), fit.d.data() + fit.d.size());
  j["tau2"] = std::vector<double>(fit.tau2.data(), fit.tau2.data() + fit.tau2.size());
  nlohmann::json post = nlohmann::json::array();
  for (const auto& p : fit.posterior) post.push_back({{"shape", p.shape}, {"scale", p.scale}});
  j["posterior"] = post;
  j["log_posterior"] = fit.log_posterior;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  return j;
}

}  // namespace gendep::rpa
