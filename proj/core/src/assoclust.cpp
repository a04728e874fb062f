#include "gendep/assoclust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "gendep/optim.hpp"
#include "gendep/parallel.hpp"
#include "gendep/rng.hpp"

namespace gendep::ac {

namespace {

using boost::math::digamma;

double dirichlet_multinomial_block(double pseudocount, int cells, double total,
                                   const double* counts, Eigen::Index stride, int n) {
  // lgam(C a) - lgam(C a + N) + sum (lgam(n_c + a) - lgam(a)) over n entries
  double acc = std::lgamma(pseudocount * cells) - std::lgamma(pseudocount * cells + total);
  for (int i = 0; i < n; ++i)
    acc += std::lgamma(counts[i * stride] + pseudocount) - std::lgamma(pseudocount);
  return acc;
}

}  // namespace

int VoronoiPartition::assign(const Eigen::VectorXd& point) const {
  int best = 0;
  double best_d = (point.transpose() - centroids.row(0)).squaredNorm();
  for (int i = 1; i < n_clusters(); ++i) {
    const double d = (point.transpose() - centroids.row(i)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<int> VoronoiPartition::assign_all(const Eigen::MatrixXd& points) const {
  std::vector<int> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out[static_cast<std::size_t>(i)] = assign(points.row(i).transpose());
  return out;
}

Eigen::MatrixXd VoronoiPartition::soft_assign(const Eigen::MatrixXd& points, double lambda) const {
  const Eigen::Index n = points.rows();
  const int k = n_clusters();
  Eigen::MatrixXd memberships(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double logit = -lambda * (points.row(i) - centroids.row(c)).squaredNorm();
      memberships(i, c) = logit;
      max_logit = std::max(max_logit, logit);
    }
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
      memberships(i, c) = std::exp(memberships(i, c) - max_logit);
      total += memberships(i, c);
    }
    memberships.row(i) /= total;
  }
  return memberships;
}

ContingencyTable contingency_counts(const std::vector<int>& assign_x,
                                    const std::vector<int>& assign_y, int kx, int ky) {
  if (assign_x.size() != assign_y.size())
    throw std::invalid_argument("contingency_counts: label vectors differ in length");
  ContingencyTable t;
  t.counts = Eigen::MatrixXi::Zero(kx, ky);
  for (std::size_t s = 0; s < assign_x.size(); ++s) {
    const int i = assign_x[s];
    const int j = assign_y[s];
    if (i < 0 || i >= kx || j < 0 || j >= ky)
      throw std::invalid_argument("contingency_counts: label out of range");
    ++t.counts(i, j);
  }
  return t;
}

double log_bayes_factor(const ContingencyTable& table, const Hyperparams& h) {
  return log_bayes_factor_soft(table.counts.cast<double>(), h);
}

double log_bayes_factor_soft(const Eigen::MatrixXd& soft_counts, const Hyperparams& h) {
  if (h.n_d <= 0.0 || h.n_x <= 0.0 || h.n_y <= 0.0)
    throw std::invalid_argument("log_bayes_factor: hyperparameters must be positive");
  const int kx = static_cast<int>(soft_counts.rows());
  const int ky = static_cast<int>(soft_counts.cols());
  const double total = soft_counts.sum();

  double dependent = std::lgamma(h.n_d * kx * ky) - std::lgamma(h.n_d * kx * ky + total);
  for (int i = 0; i < kx; ++i)
    for (int j = 0; j < ky; ++j)
      dependent += std::lgamma(soft_counts(i, j) + h.n_d) - std::lgamma(h.n_d);

  const Eigen::VectorXd rows = soft_counts.rowwise().sum();
  const Eigen::VectorXd cols = soft_counts.colwise().sum();
  const double independent_x =
      dirichlet_multinomial_block(h.n_x, kx, total, rows.data(), 1, kx);
  const double independent_y =
      dirichlet_multinomial_block(h.n_y, ky, total, cols.data(), 1, ky);
  return dependent - independent_x - independent_y;
}

namespace {

// Smoothed objective: soft counts n_ij = sum_n pi_i(x_n) rho_j(y_n) plugged
// into the Bayes factor, differentiable in both centroid sets.
struct SmoothedObjective {
  const Eigen::MatrixXd& x;  // N x dx
  const Eigen::MatrixXd& y;  // N x dy
  int kx, ky;
  Hyperparams h;
  double lambda;

  // theta layout: [centroids_x (kx*dx), centroids_y (ky*dy)], row major by cluster
  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    const Eigen::Index dx = x.cols();
    const Eigen::Index dy = y.cols();
    const Eigen::Index n = x.rows();
    VoronoiPartition px, py;
    px.centroids = Eigen::Map<const Eigen::MatrixXd>(theta.data(), kx, dx);
    py.centroids = Eigen::Map<const Eigen::MatrixXd>(theta.data() + kx * dx, ky, dy);

    const Eigen::MatrixXd pi = px.soft_assign(x, lambda);   // N x kx
    const Eigen::MatrixXd rho = py.soft_assign(y, lambda);  // N x ky
    const Eigen::MatrixXd counts = pi.transpose() * rho;    // kx x ky

    const double value = log_bayes_factor_soft(counts, h);

    // d logBF / d n_ij = psi(n_ij + nd) - psi(n_i. + nx) - psi(n_.j + ny)
    const Eigen::VectorXd rows = counts.rowwise().sum();
    const Eigen::VectorXd cols = counts.colwise().sum();
    Eigen::MatrixXd g(kx, ky);
    for (int i = 0; i < kx; ++i)
      for (int j = 0; j < ky; ++j)
        g(i, j) = digamma(counts(i, j) + h.n_d) - digamma(rows[i] + h.n_x) -
                  digamma(cols[j] + h.n_y);

    grad.setZero(theta.size());
    Eigen::Map<Eigen::MatrixXd> gx(grad.data(), kx, dx);
    Eigen::Map<Eigen::MatrixXd> gy(grad.data() + kx * dx, ky, dy);

    // chain rule through the softmax memberships of each data space
    const Eigen::MatrixXd gx_per_sample = rho * g.transpose();  // N x kx: sum_j g_ij rho_j
    const Eigen::MatrixXd gy_per_sample = pi * g;               // N x ky: sum_i g_ij pi_i
    for (Eigen::Index s = 0; s < n; ++s) {
      const double mean_x = gx_per_sample.row(s).dot(pi.row(s));
      for (int c = 0; c < kx; ++c) {
        const double coeff = 2.0 * lambda * pi(s, c) * (gx_per_sample(s, c) - mean_x);
        gx.row(c) += coeff * (x.row(s) - px.centroids.row(c));
      }
      const double mean_y = gy_per_sample.row(s).dot(rho.row(s));
      for (int c = 0; c < ky; ++c) {
        const double coeff = 2.0 * lambda * rho(s, c) * (gy_per_sample(s, c) - mean_y);
        gy.row(c) += coeff * (y.row(s) - py.centroids.row(c));
      }
    }
    return value;
  }
};

double wcss(const Eigen::MatrixXd& points, const VoronoiPartition& part,
            const std::vector<int>& assign) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    acc += (points.row(i) - part.centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
  return acc;
}

// Replace empty clusters by the point farthest from its assigned centroid.
int respawn_empty(const Eigen::MatrixXd& points, VoronoiPartition& part, std::vector<int>& assign) {
  int respawned = 0;
  const int k = part.n_clusters();
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int a : assign) ++counts[static_cast<std::size_t>(a)];
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    Eigen::Index far = 0;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const int a = assign[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(a)] <= 1) continue;  // keep singletons alive
      const double d = (points.row(i) - part.centroids.row(a)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    part.centroids.row(c) = points.row(far);
    --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
    assign[static_cast<std::size_t>(far)] = c;
    ++counts[static_cast<std::size_t>(c)];
    ++respawned;
  }
  return respawned;
}

}  // namespace

VoronoiPartition kmeans_points(const Eigen::MatrixXd& points, int k, const KmeansOptions& opts,
                               int* respawn_warnings) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw std::invalid_argument("kmeans: K must be >= 1");
  if (k > n) throw std::invalid_argument("kmeans: K must be <= number of samples");

  Rng rng(opts.seed);
  VoronoiPartition part;
  part.centroids.resize(k, points.cols());

  // k-means++ seeding
  Eigen::Index first = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  part.centroids.row(0) = points.row(first);
  Eigen::VectorXd dist2 = (points.rowwise() - points.row(first)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index pick;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    } else {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= dist2[i];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    }
    part.centroids.row(c) = points.row(pick);
    dist2 = dist2.cwiseMin((points.rowwise() - points.row(pick)).rowwise().squaredNorm());
  }

  std::vector<int> assign = part.assign_all(points);
  int respawned = 0;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    respawned += respawn_empty(points, part, assign);
    // centroid update
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        part.centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    std::vector<int> next = part.assign_all(points);
    if (next == assign) break;
    assign = std::move(next);
  }
  if (respawn_warnings != nullptr) *respawn_warnings += respawned;
  return part;
}

VoronoiPartition kmeans_baseline(const ExpressionMatrix& x, int k, const KmeansOptions& opts) {
  return kmeans_points(x.values.transpose(), k, opts, nullptr);
}

namespace {

struct HardState {
  VoronoiPartition px, py;
  ContingencyTable table;
  double log_bf = 0.0;
};

HardState evaluate_hard(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys,
                        VoronoiPartition px, VoronoiPartition py, int kx, int ky,
                        const Hyperparams& h) {
  HardState state;
  state.px = std::move(px);
  state.py = std::move(py);
  state.table = contingency_counts(state.px.assign_all(xs), state.py.assign_all(ys), kx, ky);
  state.log_bf = log_bayes_factor(state.table, h);
  return state;
}

}  // namespace

AcModel ac_fit(const ExpressionMatrix& x, const ExpressionMatrix& y, int kx, int ky,
               const Hyperparams& h, const AcOptions& opts) {
  if (x.n_samples() != y.n_samples())
    throw std::invalid_argument("ac_fit: the two matrices must have the same samples");
  const Eigen::Index n = x.n_samples();
  if (kx < 2 || ky < 2) throw std::invalid_argument("ac_fit: need at least two clusters per space");
  if (kx > n || ky > n) throw std::invalid_argument("ac_fit: cluster count exceeds sample count");

  const Eigen::MatrixXd xs = x.values.transpose();  // N x dx
  const Eigen::MatrixXd ys = y.values.transpose();  // N x dy
  const Eigen::Index dx = xs.cols();
  const Eigen::Index dy = ys.cols();

  AcModel best;
  double best_bf = -std::numeric_limits<double>::infinity();
  double best_kmeans_bf = -std::numeric_limits<double>::infinity();
  int respawns = 0;

  for (int restart = 0; restart < opts.restarts; ++restart) {
    KmeansOptions km;
    km.max_iter = opts.kmeans_max_iter;
    km.seed = substream_seed(opts.seed, static_cast<std::uint64_t>(2 * restart));
    VoronoiPartition px = kmeans_points(xs, kx, km, &respawns);
    km.seed = substream_seed(opts.seed, static_cast<std::uint64_t>(2 * restart + 1));
    VoronoiPartition py = kmeans_points(ys, ky, km, &respawns);

    // The K-means initialization itself is a candidate; the returned model can
    // only improve on the best of these.
    HardState kmeans_state = evaluate_hard(xs, ys, px, py, kx, ky, h);
    best_kmeans_bf = std::max(best_kmeans_bf, kmeans_state.log_bf);
    HardState state = kmeans_state;

    // Smoothed ascent over the annealing schedule.
    Eigen::VectorXd theta(kx * dx + ky * dy);
    Eigen::Map<Eigen::MatrixXd>(theta.data(), kx, dx) = px.centroids;
    Eigen::Map<Eigen::MatrixXd>(theta.data() + kx * dx, ky, dy) = py.centroids;
    for (double lambda : opts.lambda_schedule) {
      const SmoothedObjective objective{xs, ys, kx, ky, h, lambda};
      auto negated = [&](const Eigen::VectorXd& t, Eigen::VectorXd& grad) {
        const double v = objective(t, grad);
        grad = -grad;
        return -v;
      };
      optim::Options cg;
      cg.max_iter = opts.cg_max_iter;
      cg.grad_tol = 1e-8;
      theta = optim::minimize_cg(negated, theta, cg).x;
    }
    VoronoiPartition qx{Eigen::Map<const Eigen::MatrixXd>(theta.data(), kx, dx)};
    VoronoiPartition qy{Eigen::Map<const Eigen::MatrixXd>(theta.data() + kx * dx, ky, dy)};
    HardState annealed = evaluate_hard(xs, ys, qx, qy, kx, ky, h);
    if (annealed.log_bf > state.log_bf) state = annealed;

    // Hard refinement: Lloyd-style centroid/assignment sweeps, keeping the
    // best hard Bayes factor seen.
    {
      VoronoiPartition rx = state.px;
      VoronoiPartition ry = state.py;
      for (int iter = 0; iter < opts.refine_max_iter; ++iter) {
        std::vector<int> ax = rx.assign_all(xs);
        std::vector<int> ay = ry.assign_all(ys);
        respawns += respawn_empty(xs, rx, ax);
        respawns += respawn_empty(ys, ry, ay);
        Eigen::MatrixXd sum_x = Eigen::MatrixXd::Zero(kx, dx);
        Eigen::MatrixXd sum_y = Eigen::MatrixXd::Zero(ky, dy);
        std::vector<int> cx(static_cast<std::size_t>(kx), 0), cy(static_cast<std::size_t>(ky), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
          sum_x.row(ax[static_cast<std::size_t>(i)]) += xs.row(i);
          ++cx[static_cast<std::size_t>(ax[static_cast<std::size_t>(i)])];
          sum_y.row(ay[static_cast<std::size_t>(i)]) += ys.row(i);
          ++cy[static_cast<std::size_t>(ay[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < kx; ++c)
          if (cx[static_cast<std::size_t>(c)] > 0) rx.centroids.row(c) = sum_x.row(c) / cx[static_cast<std::size_t>(c)];
        for (int c = 0; c < ky; ++c)
          if (cy[static_cast<std::size_t>(c)] > 0) ry.centroids.row(c) = sum_y.row(c) / cy[static_cast<std::size_t>(c)];
        HardState refined = evaluate_hard(xs, ys, rx, ry, kx, ky, h);
        if (refined.log_bf <= state.log_bf) break;
        state = refined;
      }
    }

    if (state.log_bf > best_bf) {
      best_bf = state.log_bf;
      best.partition_x = state.px;
      best.partition_y = state.py;
      best.table = state.table;
      best.log_bf = state.log_bf;
    }
  }
  best.kmeans_baseline_log_bf = best_kmeans_bf;
  best.respawn_warnings = respawns;
  return best;
}

std::vector<std::pair<int, int>> CooccurrenceRecord::reliable_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (Eigen::Index i = 0; i < frequency.rows(); ++i)
    for (Eigen::Index j = i + 1; j < frequency.cols(); ++j)
      if (together(i, j) > 0 && frequency(i, j) >= threshold)
        out.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return out;
}

CooccurrenceRecord ac_bootstrap(const ExpressionMatrix& x, const ExpressionMatrix& y, int kx,
                                int ky, const Hyperparams& h, int b_runs, double threshold,
                                std::uint64_t seed, const AcOptions& opts, int threads) {
  if (b_runs < 2) throw std::invalid_argument("ac_bootstrap: need at least two runs");
  const Eigen::Index n = x.n_samples();

  struct RunLabels {
    std::vector<char> present;
    std::vector<int> cross;  // flattened (label_x * ky + label_y), -1 if absent
  };
  std::vector<RunLabels> runs(static_cast<std::size_t>(b_runs));

  parallel_for(b_runs, threads, [&](int b) {
    Rng rng(substream_seed(seed, 0xB0 + static_cast<std::uint64_t>(b)));
    std::vector<Eigen::Index> draw(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      draw[static_cast<std::size_t>(i)] =
          static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)));

    ExpressionMatrix bx, by;
    bx.values.resize(x.values.rows(), n);
    by.values.resize(y.values.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      bx.values.col(i) = x.values.col(draw[static_cast<std::size_t>(i)]);
      by.values.col(i) = y.values.col(draw[static_cast<std::size_t>(i)]);
    }
    bx.feature_ids = x.feature_ids;
    by.feature_ids = y.feature_ids;
    for (Eigen::Index i = 0; i < n; ++i) bx.sample_ids.push_back("b" + std::to_string(i));
    by.sample_ids = bx.sample_ids;

    AcOptions run_opts = opts;
    run_opts.seed = substream_seed(seed, 0x5EED + static_cast<std::uint64_t>(b));
    const AcModel model = ac_fit(bx, by, kx, ky, h, run_opts);

    RunLabels labels;
    labels.present.assign(static_cast<std::size_t>(n), 0);
    labels.cross.assign(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index orig = draw[static_cast<std::size_t>(i)];
      if (labels.present[static_cast<std::size_t>(orig)]) continue;
      labels.present[static_cast<std::size_t>(orig)] = 1;
      const int lx = model.partition_x.assign(x.values.col(orig));
      const int ly = model.partition_y.assign(y.values.col(orig));
      labels.cross[static_cast<std::size_t>(orig)] = lx * ky + ly;
    }
    runs[static_cast<std::size_t>(b)] = std::move(labels);
  });

  CooccurrenceRecord record;
  record.threshold = threshold;
  record.frequency = Eigen::MatrixXd::Zero(n, n);
  record.together = Eigen::MatrixXi::Zero(n, n);
  Eigen::MatrixXi same = Eigen::MatrixXi::Zero(n, n);
  for (const auto& run : runs) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!run.present[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = i; j < n; ++j) {
        if (!run.present[static_cast<std::size_t>(j)]) continue;
        record.together(i, j) += 1;
        if (run.cross[static_cast<std::size_t>(i)] == run.cross[static_cast<std::size_t>(j)])
          same(i, j) += 1;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double freq = record.together(i, j) > 0
                              ? static_cast<double>(same(i, j)) / record.together(i, j)
                              : 0.0;
      record.frequency(i, j) = freq;
      record.frequency(j, i) = freq;
      record.together(j, i) = record.together(i, j);
    }
  return record;
}

nlohmann::json model_to_json(const AcModel& model, const std::vector<std::string>& sample_ids) {
  nlohmann::json j;
  j["type"] = "ac_model";
  j["log_bf"] = model.log_bf;
  j["kmeans_baseline_log_bf"] = model.kmeans_baseline_log_bf;
  j["respawn_warnings"] = model.respawn_warnings;
  nlohmann::json counts = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.table.counts.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < model.table.counts.cols(); ++k) row.push_back(model.table.counts(i, k));
    counts.push_back(std::move(row));
  }
  j["contingency"] = counts;
  j["sample_ids"] = sample_ids;
  auto centroids_json = [](const Eigen::MatrixXd& c) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < c.cols(); ++k) row.push_back(c(i, k));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["centroids_x"] = centroids_json(model.partition_x.centroids);
  j["centroids_y"] = centroids_json(model.partition_y.centroids);
  return j;
}

}  // namespace gendep::ac
