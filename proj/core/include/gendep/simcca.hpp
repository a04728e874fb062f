#pragma once

#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gendep/data.hpp"

namespace gendep::simcca {

/// Two views of the same samples, matched column by column.
struct PairedData {
  Eigen::MatrixXd x;  // dx x N
  Eigen::MatrixXd y;  // dy x N
  std::vector<std::string> sample_ids;
  bool centered = false;

  static PairedData from(const ExpressionMatrix& x, const ExpressionMatrix& y);
  /// Subtract per-feature means; the model has no mean parameter.
  void center();
  Eigen::Index n_samples() const { return x.cols(); }
  /// Joint sample covariance of stacked [x; y], normalized by N.
  Eigen::MatrixXd joint_covariance() const;
};

/// Matrix-normal prior on the coupling matrix T: rows/columns independent with
/// scale sigma_t2, mean matrix M. sigma_t2 = inf disables the prior (ordinary
/// probabilistic CCA); sigma_t2 = 0 pins T = M.
struct Prior {
  Eigen::MatrixXd m;  // dy x dx
  double sigma_t2 = std::numeric_limits<double>::infinity();

  static Prior identity(Eigen::Index dy, Eigen::Index dx,
                        double sigma_t2 = std::numeric_limits<double>::infinity());
  bool has_penalty() const { return std::isfinite(sigma_t2); }
};

/// Shared-latent-variable model: x = W_x z + eps_x, y = (T W_x) z + eps_y with
/// z ~ N(0, I_k). W_y is always derived as T * W_x.
struct Model {
  Eigen::MatrixXd w_x;    // dx x k
  Eigen::MatrixXd t;      // dy x dx
  Eigen::MatrixXd psi_x;  // dx x dx, symmetric positive definite
  Eigen::MatrixXd psi_y;  // dy x dy
  int latent_dim = 0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  int jitter_count = 0;

  Eigen::MatrixXd w_y() const { return t * w_x; }
  Eigen::MatrixXd stacked_w() const;
  /// Model-implied joint covariance W W^T + blockdiag(Psi_x, Psi_y).
  Eigen::MatrixXd joint_sigma() const;
};

struct FitOptions {
  double tol = 1e-10;  // relative objective change
  int max_iter = 500;
  int inner_max_iter = 200;   // quasi-Newton W-step iterations
  double inner_grad_tol = 1e-6;
};

/// log|Sigma| + Tr(Sigma^-1 S) + ||T - M||_F^2 / (2 sigma_t2), with S the joint
/// sample covariance. The penalty vanishes at sigma_t2 = inf; sigma_t2 = 0
/// requires T == M exactly. Throws on singular Sigma ("jitter required").
double objective(const Model& model, const PairedData& data, const Prior& prior);

/// MAP EM fit. The objective is non-increasing across iterations. sigma_t2 =
/// inf gives ordinary probabilistic CCA; sigma_t2 = 0 uses the closed-form
/// fully regularized update; intermediate values run a BFGS W-step on the
/// penalized surrogate. Requires N > k.
Model fit(const PairedData& data, int k, const Prior& prior, const FitOptions& opts = {});

/// Shared-to-specific signal ratio Tr(W W^T) / Tr(Psi).
double dependency_score(const Model& model);

/// Likelihood-ratio variant: gain of the fitted joint model over the
/// independence model (W = 0, Psi = sample block covariances) in the
/// per-sample scaled negative log-likelihood.
double dependency_score_lr(const Model& model, const PairedData& data);

/// Canonical correlations implied by the model covariance, descending,
/// length min(dx, dy).
Eigen::VectorXd canonical_correlations(const Model& model);

/// Posterior mean of the shared latent variable per sample, k x N.
Eigen::MatrixXd latent_z(const Model& model, const PairedData& data);

struct WindowScore {
  std::string anchor;
  std::vector<std::string> members;
  double score = 0.0;
  double objective = 0.0;
  int latent_dim = 0;
  bool converged = false;
};

struct ScreenOptions {
  int window = 10;
  int latent_dim = 0;  // <= 0 means min(window dims)
  bool use_lr_score = false;
  FitOptions fit;
  int threads = 1;
};

struct ScreenResult {
  std::vector<WindowScore> scores;  // sorted by score, descending
  int skipped_anchors = 0;          // anchors on chromosomes with < window features
};

/// Sliding-window screen: for every anchor feature, fit the model on the
/// `window` closest same-chromosome features (by coordinate) in both data sets
/// and rank anchors by dependency score. Window size is constant so scores are
/// directly comparable.
ScreenResult genome_screen(const ExpressionMatrix& x, const ExpressionMatrix& y,
                           const PositionTable& positions, const Prior& prior,
                           const ScreenOptions& opts = {});

struct CcaComponent {
  Eigen::VectorXd v_x;
  Eigen::VectorXd v_y;
  double correlation = 0.0;
};

struct ConstrainedCcaResult {
  std::vector<CcaComponent> components;
  int jitter_count = 0;
};

/// Correlation-based variant. With t_fixed null this is classical CCA solved
/// as a generalized eigenvalue problem; with a fixed coupling matrix T the
/// projections are tied as v_y = T v_x and each component maximizes
/// corr(X' v_x, Y' T v_x), with deflation between components.
ConstrainedCcaResult constrained_cca(const PairedData& data, const Eigen::MatrixXd* t_fixed,
                                     int components);

nlohmann::json window_to_json(const WindowScore& w);

}  // namespace gendep::simcca
