#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gendep/data.hpp"

namespace gendep::datagen {

// Ground-truth payloads. Generators plant known structure and return it next
// to the emitted matrices so recovery can be scored exactly.

struct PairedLatentTruth {
  Eigen::MatrixXd w_x;  // dx x k
  Eigen::MatrixXd w_y;  // dy x k
  Eigen::MatrixXd z;    // k x n
};

struct ProbesetTruth {
  Eigen::VectorXd d_true;     // length T (non-reference arrays)
  Eigen::VectorXd tau2_true;  // length J
  std::vector<int> contaminated;  // probes with tau2 above threshold
  double contamination_threshold = 0.0;
};

struct NetworkResponsesTruth {
  std::vector<std::string> planted_genes;
  std::vector<int> mode_labels;        // per sample, in [0, modes)
  std::vector<double> mixing_weights;  // length modes
};

struct CoupledPartitionsTruth {
  std::vector<int> labels_x;  // per sample, in [0, kx)
  std::vector<int> labels_y;  // per sample, in [0, ky)
};

using GroundTruth =
    std::variant<PairedLatentTruth, ProbesetTruth, NetworkResponsesTruth, CoupledPartitionsTruth>;

nlohmann::json truth_to_json(const GroundTruth& truth);

struct PairedLatentData {
  ExpressionMatrix x;  // dx x n
  ExpressionMatrix y;  // dy x n
  PairedLatentTruth truth;
};

/// Samples x = W_x z + eps_x, y = W_y z + eps_y with z ~ N(0, I_k) and
/// isotropic noise of scale noise_scale. Deterministic per seed.
/// Requires k <= min(dx, dy) and noise_scale > 0.
PairedLatentData gen_paired_latent(std::uint64_t seed, int n, int dx, int dy, int k,
                                   double noise_scale);

struct ProbesetData {
  ExpressionMatrix expr;  // J probes x (T+1) arrays; column 0 is the reference
  ProbesetTruth truth;
};

/// Probe-level observations s_tj = g_t + mu_j + eps_tj with eps_tj ~ N(0, tau2_j)
/// and g_0 = 0 on the reference array, g_t = d_true_t elsewhere. Probes whose
/// tau2 exceeds contamination_threshold are recorded as contaminated; a
/// non-positive threshold defaults to 2x the median tau2.
ProbesetData gen_probeset_data(std::uint64_t seed, int t_arrays, int j_probes,
                               const Eigen::VectorXd& d_true, const Eigen::VectorXd& tau2_true,
                               const Eigen::VectorXd& affinities,
                               double contamination_threshold = 0.0);

struct NetworkResponsesData {
  ExpressionMatrix expr;  // node_count x n
  InteractionNetwork network;
  NetworkResponsesTruth truth;
};

/// Erdos-Renyi background network plus a planted connected gene set whose rows
/// switch between `modes` distinct mean vectors across sample groups; all other
/// genes are unit-variance noise. The planted set is made connected by adding a
/// spanning path. Requires planted_genes in [2, node_count] and modes >= 2.
NetworkResponsesData gen_network_responses(std::uint64_t seed, int node_count, double edge_prob,
                                           int planted_genes, int modes, int n_samples,
                                           double separation);

struct CoupledPartitionsData {
  ExpressionMatrix x;  // dx x n
  ExpressionMatrix y;  // dy x n
  CoupledPartitionsTruth truth;
};

/// Draws per-sample joint cluster labels from the mixture
///   P(i, j) = coupling * Diag(i = j) + (1 - coupling) * Uniform(i) Uniform(j)
/// then emits unit-variance Gaussian blobs around centroids spaced 5 apart.
/// coupling = 1 requires kx == ky.
CoupledPartitionsData gen_coupled_partitions(std::uint64_t seed, int n, int dx, int dy, int kx,
                                             int ky, double coupling);

}  // namespace gendep::datagen
