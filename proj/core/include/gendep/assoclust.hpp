#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "gendep/data.hpp"

namespace gendep::ac {

/// Nearest-centroid partition of a data space. lambda is the softmax inverse
/// temperature used for smoothed assignments; hard assignment ignores it.
struct VoronoiPartition {
  Eigen::MatrixXd centroids;  // K x dim

  int n_clusters() const { return static_cast<int>(centroids.rows()); }
  /// Nearest centroid by squared Euclidean distance; ties to the lowest index.
  int assign(const Eigen::VectorXd& point) const;
  std::vector<int> assign_all(const Eigen::MatrixXd& points) const;  // points: N x dim
  /// softmax(-lambda * ||x - m_i||^2) memberships, N x K.
  Eigen::MatrixXd soft_assign(const Eigen::MatrixXd& points, double lambda) const;
};

struct ContingencyTable {
  Eigen::MatrixXi counts;  // Kx x Ky
  Eigen::VectorXi row_margins() const { return counts.rowwise().sum(); }
  Eigen::VectorXi col_margins() const { return counts.colwise().sum(); }
  int total() const { return counts.sum(); }
};

/// Dirichlet pseudocounts: n_d over the Kx*Ky cells of the dependent model,
/// n_x and n_y over the margins of the independent model.
struct Hyperparams {
  double n_d = 1.0;
  double n_x = 1.0;
  double n_y = 1.0;
};

/// Cross-tabulate paired hard labels into a Kx x Ky table.
ContingencyTable contingency_counts(const std::vector<int>& assign_x,
                                    const std::vector<int>& assign_y, int kx, int ky);

/// Log Bayes factor of dependent vs independent margins: the ratio of the
/// closed-form Dirichlet-multinomial marginal likelihoods,
///   log BF = [lgam(C nd) - lgam(C nd + N) + sum_ij (lgam(n_ij + nd) - lgam(nd))]
///          - [lgam(Kx nx) - lgam(Kx nx + N) + sum_i (lgam(n_i. + nx) - lgam(nx))]
///          - [lgam(Ky ny) - lgam(Ky ny + N) + sum_j (lgam(n_.j + ny) - lgam(ny))]
/// with C = Kx * Ky. Unit hyperparameters recover the Fisher hypergeometric
/// dependency measure: within fixed margins, log BF = const(N) - log P_Fisher.
double log_bayes_factor(const ContingencyTable& table, const Hyperparams& h);

/// Same marginal-likelihood ratio evaluated on fractional (smoothed) counts.
double log_bayes_factor_soft(const Eigen::MatrixXd& soft_counts, const Hyperparams& h);

struct AcOptions {
  int restarts = 5;
  std::vector<double> lambda_schedule = {1.0, 4.0, 16.0, 64.0};
  int cg_max_iter = 100;
  int refine_max_iter = 10;
  int kmeans_max_iter = 100;
  std::uint64_t seed = 0;
};

struct AcModel {
  VoronoiPartition partition_x, partition_y;
  ContingencyTable table;
  double log_bf = 0.0;
  double kmeans_baseline_log_bf = 0.0;
  int respawn_warnings = 0;
};

/// Associative clustering: optimize both centroid sets to maximize the
/// contingency-table Bayes factor. Smoothed memberships are annealed over the
/// lambda schedule with conjugate-gradient steps, followed by a hard
/// refinement; restarts start from independent K-means solutions and the
/// returned hard-assignment log BF is never below the best K-means
/// initialization. Matrices are features x samples; columns are clustered.
AcModel ac_fit(const ExpressionMatrix& x, const ExpressionMatrix& y, int kx, int ky,
               const Hyperparams& h, const AcOptions& opts = {});

struct CooccurrenceRecord {
  Eigen::MatrixXd frequency;  // N x N, symmetric, diag 1 where present
  Eigen::MatrixXi together;   // bootstrap runs where both samples appeared
  double threshold = 0.5;

  /// Pairs (i < j) with frequency >= threshold over at least one joint run.
  std::vector<std::pair<int, int>> reliable_pairs() const;
};

/// Bootstrap reliability: refit on B resamples (with replacement) and record
/// how often each sample pair lands in the same cross cluster; pairs absent
/// from a resample are excluded from its denominator.
CooccurrenceRecord ac_bootstrap(const ExpressionMatrix& x, const ExpressionMatrix& y, int kx,
                                int ky, const Hyperparams& h, int b_runs, double threshold,
                                std::uint64_t seed, const AcOptions& opts = {}, int threads = 1);

struct KmeansOptions {
  int max_iter = 100;
  std::uint64_t seed = 0;
};

/// Lloyd iterations from k-means++ seeding on the columns of x; the
/// within-cluster sum of squares is non-increasing per iteration.
VoronoiPartition kmeans_baseline(const ExpressionMatrix& x, int k, const KmeansOptions& opts = {});

/// Same, on a samples-by-dims matrix.
VoronoiPartition kmeans_points(const Eigen::MatrixXd& points, int k, const KmeansOptions& opts,
                               int* respawn_warnings = nullptr);

nlohmann::json model_to_json(const AcModel& model, const std::vector<std::string>& sample_ids);

}  // namespace gendep::ac
