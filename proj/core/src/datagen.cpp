#include "gendep/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gendep/rng.hpp"

namespace gendep::datagen {

namespace {

std::vector<std::string> indexed_ids(const std::string& prefix, int count) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

Eigen::MatrixXd random_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  // column-major fill order is part of the pinned output stream
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

nlohmann::json truth_to_json(const GroundTruth& truth) {
  nlohmann::json j;
  if (const auto* p = std::get_if<PairedLatentTruth>(&truth)) {
    j["variant"] = "paired-latent";
    j["w_x"] = matrix_json(p->w_x);
    j["w_y"] = matrix_json(p->w_y);
    j["z"] = matrix_json(p->z);
  } else if (const auto* p = std::get_if<ProbesetTruth>(&truth)) {
    j["variant"] = "probeset";
    j["d_true"] = vector_json(p->d_true);
    j["tau2_true"] = vector_json(p->tau2_true);
    j["contaminated"] = p->contaminated;
    j["contamination_threshold"] = p->contamination_threshold;
  } else if (const auto* p = std::get_if<NetworkResponsesTruth>(&truth)) {
    j["variant"] = "network-responses";
    j["planted_genes"] = p->planted_genes;
    j["mode_labels"] = p->mode_labels;
    j["mixing_weights"] = p->mixing_weights;
  } else if (const auto* p = std::get_if<CoupledPartitionsTruth>(&truth)) {
    j["variant"] = "coupled-partitions";
    j["labels_x"] = p->labels_x;
    j["labels_y"] = p->labels_y;
  }
  return j;
}

PairedLatentData gen_paired_latent(std::uint64_t seed, int n, int dx, int dy, int k,
                                   double noise_scale) {
  if (n < 1 || dx < 1 || dy < 1 || k < 1) throw std::invalid_argument("gen_paired_latent: dimensions must be positive");
  if (k > std::min(dx, dy)) throw std::invalid_argument("gen_paired_latent: k must be <= min(dx, dy)");
  if (!(noise_scale > 0.0)) throw std::invalid_argument("gen_paired_latent: noise_scale must be positive");

  Rng rng(substream_seed(seed, hash_key("paired-latent")));
  PairedLatentData out;
  out.truth.w_x = random_normal(rng, dx, k);
  out.truth.w_y = random_normal(rng, dy, k);
  out.truth.z = random_normal(rng, k, n);

  Eigen::MatrixXd ex = random_normal(rng, dx, n) * noise_scale;
  Eigen::MatrixXd ey = random_normal(rng, dy, n) * noise_scale;
  out.x.values = out.truth.w_x * out.truth.z + ex;
  out.y.values = out.truth.w_y * out.truth.z + ey;
  out.x.feature_ids = indexed_ids("x", dx);
  out.y.feature_ids = indexed_ids("y", dy);
  out.x.sample_ids = indexed_ids("s", n);
  out.y.sample_ids = out.x.sample_ids;
  return out;
}

ProbesetData gen_probeset_data(std::uint64_t seed, int t_arrays, int j_probes,
                               const Eigen::VectorXd& d_true, const Eigen::VectorXd& tau2_true,
                               const Eigen::VectorXd& affinities, double contamination_threshold) {
  if (t_arrays < 1 || j_probes < 1) throw std::invalid_argument("gen_probeset_data: need T >= 1 and J >= 1");
  if (d_true.size() != t_arrays) throw std::invalid_argument("gen_probeset_data: d_true length must be T");
  if (tau2_true.size() != j_probes) throw std::invalid_argument("gen_probeset_data: tau2_true length must be J");
  if (affinities.size() != j_probes) throw std::invalid_argument("gen_probeset_data: affinities length must be J");
  if ((tau2_true.array() <= 0.0).any()) throw std::invalid_argument("gen_probeset_data: all tau2 must be positive");

  Rng rng(substream_seed(seed, hash_key("probeset")));
  ProbesetData out;
  out.expr.values.resize(j_probes, t_arrays + 1);
  for (int j = 0; j < j_probes; ++j) {
    const double sd = std::sqrt(tau2_true[j]);
    for (int t = 0; t <= t_arrays; ++t) {
      const double g = t == 0 ? 0.0 : d_true[t - 1];
      out.expr.values(j, t) = g + affinities[j] + rng.normal() * sd;
    }
  }
  out.expr.feature_ids = indexed_ids("probe", j_probes);
  out.expr.sample_ids = indexed_ids("array", t_arrays + 1);

  out.truth.d_true = d_true;
  out.truth.tau2_true = tau2_true;
  double threshold = contamination_threshold;
  if (!(threshold > 0.0)) {
    std::vector<double> sorted(tau2_true.data(), tau2_true.data() + tau2_true.size());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median =
        sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    threshold = 2.0 * median;
  }
  out.truth.contamination_threshold = threshold;
  for (int j = 0; j < j_probes; ++j)
    if (tau2_true[j] > threshold) out.truth.contaminated.push_back(j);
  return out;
}

NetworkResponsesData gen_network_responses(std::uint64_t seed, int node_count, double edge_prob,
                                           int planted_genes, int modes, int n_samples,
                                           double separation) {
  if (node_count < 2) throw std::invalid_argument("gen_network_responses: need node_count >= 2");
  if (planted_genes < 2) throw std::invalid_argument("gen_network_responses: need planted_genes >= 2");
  if (planted_genes > node_count)
    throw std::invalid_argument("gen_network_responses: planted_genes must be <= node_count");
  if (modes < 2) throw std::invalid_argument("gen_network_responses: need modes >= 2");
  if (n_samples < 1) throw std::invalid_argument("gen_network_responses: need n_samples >= 1");
  if (edge_prob < 0.0 || edge_prob > 1.0)
    throw std::invalid_argument("gen_network_responses: edge_prob must be in [0, 1]");
  if (separation < 0.0) throw std::invalid_argument("gen_network_responses: separation must be >= 0");

  Rng rng(substream_seed(seed, hash_key("network-responses")));
  NetworkResponsesData out;
  const std::vector<std::string> ids = indexed_ids("g", node_count);

  // Planted member choice: a random subset of the node ids.
  std::vector<int> order(static_cast<std::size_t>(node_count));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  std::vector<int> planted(order.begin(), order.begin() + planted_genes);
  std::sort(planted.begin(), planted.end());
  for (int idx : planted) out.truth.planted_genes.push_back(ids[static_cast<std::size_t>(idx)]);

  // Background graph, then a spanning path that guarantees connectivity of the
  // planted set.
  for (const auto& id : ids) out.network.add_node(id);
  for (int a = 0; a < node_count; ++a)
    for (int b = a + 1; b < node_count; ++b)
      if (rng.uniform() < edge_prob)
        out.network.add_edge(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)]);
  for (std::size_t i = 0; i + 1 < planted.size(); ++i)
    out.network.add_edge(ids[static_cast<std::size_t>(planted[i])],
                         ids[static_cast<std::size_t>(planted[i + 1])]);

  // Mode labels with uniform mixing weights.
  out.truth.mixing_weights.assign(static_cast<std::size_t>(modes), 1.0 / modes);
  out.truth.mode_labels.resize(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s)
    out.truth.mode_labels[static_cast<std::size_t>(s)] =
        rng.categorical(std::span<const double>(out.truth.mixing_weights));

  // Planted gene i in mode r has mean separation * sign_i * (r - (modes-1)/2),
  // so consecutive modes sit `separation` noise-sd units apart in every
  // planted coordinate. Everything else is N(0, 1).
  out.expr.values.resize(node_count, n_samples);
  for (int g = 0; g < node_count; ++g)
    for (int s = 0; s < n_samples; ++s) out.expr.values(g, s) = rng.normal();
  for (std::size_t pi = 0; pi < planted.size(); ++pi) {
    const int g = planted[pi];
    const double sign = pi % 2 == 0 ? 1.0 : -1.0;
    for (int s = 0; s < n_samples; ++s) {
      const int r = out.truth.mode_labels[static_cast<std::size_t>(s)];
      out.expr.values(g, s) += sign * separation * (r - 0.5 * (modes - 1));
    }
  }
  out.expr.feature_ids = ids;
  out.expr.sample_ids = indexed_ids("s", n_samples);
  return out;
}

CoupledPartitionsData gen_coupled_partitions(std::uint64_t seed, int n, int dx, int dy, int kx,
                                             int ky, double coupling) {
  if (n < 1 || dx < 1 || dy < 1) throw std::invalid_argument("gen_coupled_partitions: dimensions must be positive");
  if (kx < 1 || ky < 1) throw std::invalid_argument("gen_coupled_partitions: cluster counts must be positive");
  if (coupling < 0.0 || coupling > 1.0)
    throw std::invalid_argument("gen_coupled_partitions: coupling must be in [0, 1]");
  if (coupling == 1.0 && kx != ky)
    throw std::invalid_argument("gen_coupled_partitions: coupling = 1 requires kx == ky");

  Rng rng(substream_seed(seed, hash_key("coupled-partitions")));
  CoupledPartitionsData out;
  out.truth.labels_x.resize(static_cast<std::size_t>(n));
  out.truth.labels_y.resize(static_cast<std::size_t>(n));

  const int k_min = std::min(kx, ky);
  for (int s = 0; s < n; ++s) {
    int i, j;
    if (rng.uniform() < coupling) {
      i = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(k_min)));
      j = i;
    } else {
      i = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(kx)));
      j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(ky)));
    }
    out.truth.labels_x[static_cast<std::size_t>(s)] = i;
    out.truth.labels_y[static_cast<std::size_t>(s)] = j;
  }

  // Blob centroids on a line, 5 noise-sd units apart.
  constexpr double kBlobSpacing = 5.0;
  auto emit = [&](int dims, int clusters, const std::vector<int>& labels) {
    Eigen::MatrixXd values(dims, n);
    (void)clusters;
    for (int s = 0; s < n; ++s) {
      for (int d = 0; d < dims; ++d) {
        const double center = d == 0 ? kBlobSpacing * labels[static_cast<std::size_t>(s)] : 0.0;
        values(d, s) = center + rng.normal();
      }
    }
    return values;
  };
  out.x.values = emit(dx, kx, out.truth.labels_x);
  out.y.values = emit(dy, ky, out.truth.labels_y);
  out.x.feature_ids = indexed_ids("x", dx);
  out.y.feature_ids = indexed_ids("y", dy);
  out.x.sample_ids = indexed_ids("s", n);
  out.y.sample_ids = out.x.sample_ids;
  return out;
}

}  // namespace gendep::datagen
