#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gendep/data.hpp"

namespace gendep::netresponse {

struct VdpOptions {
  double concentration = 1.0;  // stick-breaking concentration alpha
  int truncation = 0;          // <= 0 means min(N, 20)
  double tol = 1e-7;           // relative lower-bound change
  int max_iter = 300;
  int restarts = 3;
  std::uint64_t seed = 0;
};

/// Truncated stick-breaking mixture of diagonal Gaussians fitted by
/// variational inference. Point parameters are posterior summaries; the
/// responsibilities matrix holds the variational assignment posteriors.
struct VdpGmm {
  int truncation = 0;
  Eigen::VectorXd weights;           // expected stick weights, sums to 1
  Eigen::MatrixXd means;             // truncation x dims
  Eigen::MatrixXd variances;         // truncation x dims, floored at 1e-6
  Eigen::MatrixXd responsibilities;  // N x truncation, rows sum to 1
  std::vector<int> hard_labels;      // argmax per row, ties to lowest index
  double lower_bound = 0.0;
  int iterations = 0;
  bool converged = false;
  int effective_components = 0;  // components owning >= 1 hard-assigned sample

  /// Indices of components owning at least one hard-assigned sample.
  std::vector<int> effective_indices() const;
};

/// Fit on samples-by-dims data (one row per observation). Requires N >= 2,
/// dims >= 1, finite input. Best of `restarts` runs by final lower bound; the
/// bound is non-decreasing within each run.
VdpGmm fit_vdp_gmm(const Eigen::MatrixXd& samples, const VdpOptions& opts = {});

/// BIC-style cost of a fitted model: q counts the weights, means and diagonal
/// variances of effective components only, q = (R_eff - 1) + R_eff * 2 * dims.
/// Returns (cost, q) with cost = -2 * lower_bound + q * ln(n_samples).
std::pair<double, int> subnetwork_cost(const VdpGmm& model, int dims, int n_samples);

struct Subnetwork {
  std::vector<std::string> gene_ids;  // sorted; connected in the input network
  VdpGmm model;
  double cost = 0.0;
  int param_count = 0;
  double improvement = 0.0;  // sum of singleton costs of members minus cost
};

struct DetectOptions {
  int max_size = 20;
  VdpOptions mixture;
  int threads = 1;  // candidate-pair evaluations per merge step
};

/// Greedy agglomeration over network-adjacent subnetwork pairs: merge the pair
/// with the most negative BIC-cost delta, stop when no merge improves. Genes
/// named by the network must exist in expr. Returned list is sorted by cost
/// improvement over independent singleton models, largest first.
std::vector<Subnetwork> detect_subnetworks(const ExpressionMatrix& expr,
                                           const InteractionNetwork& net,
                                           const DetectOptions& opts = {});

struct ResponseAssignment {
  std::vector<int> component_ids;  // model component index per column
  Eigen::MatrixXd posteriors;      // N x effective components, rows sum to 1
  std::vector<int> hard;           // argmax per row, ties to lowest index
};

/// Posterior response probabilities of each sample under the subnetwork's
/// mixture (Bayes rule over the effective components).
ResponseAssignment assign_responses(const Subnetwork& sub, const ExpressionMatrix& expr);

nlohmann::json subnetwork_to_json(const Subnetwork& sub, const ResponseAssignment& assignment,
                                  const std::vector<std::string>& sample_ids);

}  // namespace gendep::netresponse
