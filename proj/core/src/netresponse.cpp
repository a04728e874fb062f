#include "gendep/netresponse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "gendep/parallel.hpp"
#include "gendep/rng.hpp"
#include "gendep/stats.hpp"

namespace gendep::netresponse {

namespace {

using boost::math::digamma;

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kVarianceFloor = 1e-6;

// Variational state for the truncated stick-breaking mixture. Conventions:
// sticks v_r ~ Beta(1, alpha) for r < T (v_T fixed to 1); per dimension,
// precision lambda ~ Gamma(shape a, rate b) and mean | lambda ~
// N(m, 1/(kappa * lambda)).
struct VbState {
  // prior
  double alpha = 1.0;
  double kappa0 = 1e-2;
  double a0 = 1.0;
  Eigen::VectorXd b0;  // per dimension
  Eigen::VectorXd m0;  // per dimension

  // q(v): Beta(gamma1, gamma2), size T-1
  Eigen::VectorXd gamma1, gamma2;
  // q(mean, precision): per component r
  Eigen::VectorXd kappa, a;  // size T
  Eigen::MatrixXd m, b;      // T x D
  // q(z)
  Eigen::MatrixXd phi;  // N x T

  int t_trunc = 0;
};

// E[ln pi_r] under the stick posteriors.
Eigen::VectorXd expected_log_weights(const VbState& s) {
  const int t = s.t_trunc;
  Eigen::VectorXd eln_v(t), eln_1mv(t);
  for (int r = 0; r < t - 1; ++r) {
    const double total = digamma(s.gamma1[r] + s.gamma2[r]);
    eln_v[r] = digamma(s.gamma1[r]) - total;
    eln_1mv[r] = digamma(s.gamma2[r]) - total;
  }
  eln_v[t - 1] = 0.0;  // v_T = 1
  eln_1mv[t - 1] = 0.0;
  Eigen::VectorXd out(t);
  double tail = 0.0;
  for (int r = 0; r < t; ++r) {
    out[r] = eln_v[r] + tail;
    tail += eln_1mv[r];
  }
  return out;
}

// M-step: refresh q(v) and q(mean, precision) from the responsibilities.
void update_parameters(VbState& s, const Eigen::MatrixXd& x) {
  const int t = s.t_trunc;
  const Eigen::Index d = x.cols();
  const Eigen::VectorXd counts = s.phi.colwise().sum();

  double tail = 0.0;
  for (int r = t - 1; r >= 0; --r) {
    if (r < t - 1) {
      s.gamma1[r] = 1.0 + counts[r];
      s.gamma2[r] = s.alpha + tail;
    }
    tail += counts[r];
  }

  for (int r = 0; r < t; ++r) {
    const double nr = counts[r];
    s.kappa[r] = s.kappa0 + nr;
    s.a[r] = s.a0 + 0.5 * nr;
    if (nr > 1e-12) {
      const Eigen::VectorXd xbar = (s.phi.col(r).transpose() * x).transpose() / nr;
      for (Eigen::Index k = 0; k < d; ++k) {
        double scatter = 0.0;
        for (Eigen::Index n = 0; n < x.rows(); ++n) {
          const double diff = x(n, k) - xbar[k];
          scatter += s.phi(n, r) * diff * diff;
        }
        const double dm = xbar[k] - s.m0[k];
        s.m(r, k) = (s.kappa0 * s.m0[k] + nr * xbar[k]) / s.kappa[r];
        s.b(r, k) = s.b0[k] + 0.5 * scatter + 0.5 * s.kappa0 * nr * dm * dm / s.kappa[r];
      }
    } else {
      s.m.row(r) = s.m0.transpose();
      s.b.row(r) = s.b0.transpose();
    }
  }
}

// E-step: responsibilities from the current parameter posteriors.
void update_responsibilities(VbState& s, const Eigen::MatrixXd& x) {
  const int t = s.t_trunc;
  const Eigen::Index n_samples = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::VectorXd eln_pi = expected_log_weights(s);

  Eigen::MatrixXd eln_lambda(t, d), e_lambda(t, d);
  for (int r = 0; r < t; ++r)
    for (Eigen::Index k = 0; k < d; ++k) {
      eln_lambda(r, k) = digamma(s.a[r]) - std::log(s.b(r, k));
      e_lambda(r, k) = s.a[r] / s.b(r, k);
    }

  std::vector<double> logp(static_cast<std::size_t>(t));
  for (Eigen::Index n = 0; n < n_samples; ++n) {
    for (int r = 0; r < t; ++r) {
      double acc = eln_pi[r];
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = x(n, k) - s.m(r, k);
        acc += 0.5 * (eln_lambda(r, k) - kLog2Pi - e_lambda(r, k) * diff * diff - 1.0 / s.kappa[r]);
      }
      logp[static_cast<std::size_t>(r)] = acc;
    }
    const double norm = stats::log_sum_exp(logp);
    for (int r = 0; r < t; ++r) s.phi(n, r) = std::exp(logp[static_cast<std::size_t>(r)] - norm);
  }
}

double lower_bound(const VbState& s, const Eigen::MatrixXd& x) {
  const int t = s.t_trunc;
  const Eigen::Index n_samples = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::VectorXd eln_pi = expected_log_weights(s);

  double elbo = 0.0;

  // E[ln p(X | Z, params)] + E[ln p(Z | V)] + entropy of q(Z)
  for (Eigen::Index n = 0; n < n_samples; ++n) {
    for (int r = 0; r < t; ++r) {
      const double p = s.phi(n, r);
      if (p <= 0.0) continue;
      double acc = eln_pi[r];
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = x(n, k) - s.m(r, k);
        acc += 0.5 * (digamma(s.a[r]) - std::log(s.b(r, k)) - kLog2Pi -
                      (s.a[r] / s.b(r, k)) * diff * diff - 1.0 / s.kappa[r]);
      }
      elbo += p * (acc - std::log(p));
    }
  }

  // sticks: E[ln p(v)] - E[ln q(v)]
  for (int r = 0; r < t - 1; ++r) {
    const double total = digamma(s.gamma1[r] + s.gamma2[r]);
    const double eln_v = digamma(s.gamma1[r]) - total;
    const double eln_1mv = digamma(s.gamma2[r]) - total;
    elbo += std::log(s.alpha) + (s.alpha - 1.0) * eln_1mv;
    const double ln_beta_fn = std::lgamma(s.gamma1[r]) + std::lgamma(s.gamma2[r]) -
                              std::lgamma(s.gamma1[r] + s.gamma2[r]);
    elbo -= (s.gamma1[r] - 1.0) * eln_v + (s.gamma2[r] - 1.0) * eln_1mv - ln_beta_fn;
  }

  // mean/precision blocks: E[ln p] - E[ln q]
  for (int r = 0; r < t; ++r) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double eln_l = digamma(s.a[r]) - std::log(s.b(r, k));
      const double e_l = s.a[r] / s.b(r, k);
      const double dm = s.m(r, k) - s.m0[k];
      // prior
      elbo += 0.5 * (std::log(s.kappa0) - kLog2Pi + eln_l -
                     s.kappa0 * (e_l * dm * dm + 1.0 / s.kappa[r]));
      elbo += s.a0 * std::log(s.b0[k]) - std::lgamma(s.a0) + (s.a0 - 1.0) * eln_l -
              s.b0[k] * e_l;
      // entropy part of q
      elbo -= 0.5 * (std::log(s.kappa[r]) - kLog2Pi + eln_l - 1.0);
      elbo -= s.a[r] * std::log(s.b(r, k)) - std::lgamma(s.a[r]) +
              (s.a[r] - 1.0) * (digamma(s.a[r]) - std::log(s.b(r, k))) - s.a[r];
    }
  }
  return elbo;
}

// k-means++ style seeding for the initial hard responsibilities.
std::vector<int> seed_assignments(const Eigen::MatrixXd& x, int t, Rng& rng) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> centers;
  centers.push_back(static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd dist2 = (x.rowwise() - x.row(centers[0])).rowwise().squaredNorm();
  while (static_cast<int>(centers.size()) < t) {
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
    centers.push_back(pick);
    dist2 = dist2.cwiseMin((x.rowwise() - x.row(pick)).rowwise().squaredNorm());
  }
  std::vector<int> assign(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < t; ++c) {
      const double d2 = (x.row(i) - x.row(centers[static_cast<std::size_t>(c)])).squaredNorm();
      if (d2 < best_d) {
        best_d = d2;
        best = c;
      }
    }
    assign[static_cast<std::size_t>(i)] = best;
  }
  return assign;
}

VdpGmm run_single(const Eigen::MatrixXd& x, const VdpOptions& opts, int t_trunc,
                  std::uint64_t seed, bool random_init) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Rng rng(seed);

  VbState s;
  s.t_trunc = t_trunc;
  s.alpha = opts.concentration;
  s.m0 = x.colwise().mean();
  s.b0.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double var = (x.col(k).array() - s.m0[k]).square().sum() / static_cast<double>(n);
    s.b0[k] = std::max(0.1 * var, 1e-8);
  }
  s.kappa0 = 1e-2;
  s.a0 = 1.0;
  s.gamma1 = Eigen::VectorXd::Ones(std::max(t_trunc - 1, 1));
  s.gamma2 = Eigen::VectorXd::Constant(std::max(t_trunc - 1, 1), s.alpha);
  s.kappa = Eigen::VectorXd::Constant(t_trunc, s.kappa0);
  s.a = Eigen::VectorXd::Constant(t_trunc, s.a0);
  s.m = s.m0.transpose().replicate(t_trunc, 1);
  s.b = s.b0.transpose().replicate(t_trunc, 1);

  s.phi.setZero(n, t_trunc);
  if (random_init) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double total = 0.0;
      for (int r = 0; r < t_trunc; ++r) {
        const double u = 0.05 + rng.uniform();
        s.phi(i, r) = u;
        total += u;
      }
      s.phi.row(i) /= total;
    }
  } else {
    const std::vector<int> assign = seed_assignments(x, t_trunc, rng);
    for (Eigen::Index i = 0; i < n; ++i) s.phi(i, assign[static_cast<std::size_t>(i)]) = 1.0;
  }

  VdpGmm out;
  out.truncation = t_trunc;
  double prev = -std::numeric_limits<double>::infinity();
  for (out.iterations = 1; out.iterations <= opts.max_iter; ++out.iterations) {
    update_parameters(s, x);
    update_responsibilities(s, x);
    const double current = lower_bound(s, x);
    if (std::isfinite(prev) &&
        std::abs(current - prev) < opts.tol * std::max(1.0, std::abs(prev))) {
      prev = current;
      out.converged = true;
      break;
    }
    prev = current;
  }
  out.iterations = std::min(out.iterations, opts.max_iter);
  out.lower_bound = prev;

  // point summaries
  out.weights.resize(t_trunc);
  double stick_left = 1.0;
  for (int r = 0; r < t_trunc; ++r) {
    const double ev = r < t_trunc - 1 ? s.gamma1[r] / (s.gamma1[r] + s.gamma2[r]) : 1.0;
    out.weights[r] = ev * stick_left;
    stick_left *= 1.0 - ev;
  }
  out.means = s.m;
  out.variances = (s.b.array().colwise() / s.a.array()).cwiseMax(kVarianceFloor);
  out.responsibilities = s.phi;
  out.hard_labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    for (int r = 1; r < t_trunc; ++r)
      if (s.phi(i, r) > s.phi(i, best)) best = r;
    out.hard_labels[static_cast<std::size_t>(i)] = best;
  }
  std::vector<char> seen(static_cast<std::size_t>(t_trunc), 0);
  for (int label : out.hard_labels) seen[static_cast<std::size_t>(label)] = 1;
  out.effective_components = static_cast<int>(std::count(seen.begin(), seen.end(), 1));
  return out;
}

}  // namespace

std::vector<int> VdpGmm::effective_indices() const {
  std::vector<char> seen(static_cast<std::size_t>(truncation), 0);
  for (int label : hard_labels) seen[static_cast<std::size_t>(label)] = 1;
  std::vector<int> out;
  for (int r = 0; r < truncation; ++r)
    if (seen[static_cast<std::size_t>(r)]) out.push_back(r);
  return out;
}

VdpGmm fit_vdp_gmm(const Eigen::MatrixXd& samples, const VdpOptions& opts) {
  if (samples.rows() < 2) throw std::invalid_argument("fit_vdp_gmm: need at least two samples");
  if (samples.cols() < 1) throw std::invalid_argument("fit_vdp_gmm: need at least one dimension");
  if (!samples.allFinite()) throw std::invalid_argument("fit_vdp_gmm: non-finite input");
  if (opts.restarts < 1) throw std::invalid_argument("fit_vdp_gmm: restarts must be >= 1");

  int t_trunc = opts.truncation;
  if (t_trunc <= 0) t_trunc = static_cast<int>(std::min<Eigen::Index>(samples.rows(), 20));
  t_trunc = std::max(t_trunc, 1);

  VdpGmm best;
  bool have = false;
  for (int r = 0; r < opts.restarts; ++r) {
    VdpGmm candidate = run_single(samples, opts, t_trunc,
                                  substream_seed(opts.seed, static_cast<std::uint64_t>(r)), r > 0);
    if (!have || candidate.lower_bound > best.lower_bound) {
      best = std::move(candidate);
      have = true;
    }
  }
  return best;
}

std::pair<double, int> subnetwork_cost(const VdpGmm& model, int dims, int n_samples) {
  const int r_eff = std::max(model.effective_components, 1);
  const int q = (r_eff - 1) + r_eff * 2 * dims;
  return {stats::bic(model.lower_bound, q, n_samples), q};
}

namespace {

struct Component {
  std::vector<std::string> genes;  // sorted
  VdpGmm model;
  double cost = 0.0;
  int q = 0;
  bool alive = true;
};

std::string gene_set_key(const std::vector<std::string>& genes) {
  std::string key;
  for (const auto& g : genes) {
    key += g;
    key += '\x1f';
  }
  return key;
}

VdpGmm fit_genes(const ExpressionMatrix& expr, const std::vector<std::string>& genes,
                 const VdpOptions& base) {
  VdpOptions opts = base;
  opts.seed = substream_seed(base.seed, hash_key(gene_set_key(genes)));
  const Eigen::MatrixXd data = expr.rows(genes).transpose();  // samples x dims
  return fit_vdp_gmm(data, opts);
}

}  // namespace

std::vector<Subnetwork> detect_subnetworks(const ExpressionMatrix& expr,
                                           const InteractionNetwork& net,
                                           const DetectOptions& opts) {
  if (opts.max_size < 2) throw std::invalid_argument("detect_subnetworks: max_size must be >= 2");
  std::vector<std::string> genes = net.nodes;
  if (genes.empty()) genes = expr.feature_ids;  // no network: every gene stays a singleton
  std::sort(genes.begin(), genes.end());
  for (const auto& g : genes)
    if (expr.feature_index(g) < 0)
      throw std::invalid_argument("detect_subnetworks: gene absent from expression matrix: " + g);

  const int n_samples = static_cast<int>(expr.n_samples());

  std::vector<Component> comps;
  std::map<std::string, int> gene_component;
  std::map<std::string, double> singleton_cost;
  comps.reserve(genes.size());
  for (const auto& g : genes) {
    Component c;
    c.genes = {g};
    c.model = fit_genes(expr, c.genes, opts.mixture);
    std::tie(c.cost, c.q) = subnetwork_cost(c.model, 1, n_samples);
    gene_component[g] = static_cast<int>(comps.size());
    singleton_cost[g] = c.cost;
    comps.push_back(std::move(c));
  }

  // Component-level adjacency from the gene-level edges.
  std::set<std::pair<int, int>> adjacent;
  for (const auto& [a, b] : net.edges) {
    const int ca = gene_component[a];
    const int cb = gene_component[b];
    if (ca != cb) adjacent.insert({std::min(ca, cb), std::max(ca, cb)});
  }

  struct PairEval {
    double delta = 0.0;
    VdpGmm model;
    double cost = 0.0;
    int q = 0;
  };
  std::map<std::pair<int, int>, PairEval> cache;

  auto evaluate_pairs = [&](const std::vector<std::pair<int, int>>& pairs) {
    std::vector<PairEval> results(pairs.size());
    parallel_for(static_cast<int>(pairs.size()), opts.threads, [&](int idx) {
      const auto [i, j] = pairs[static_cast<std::size_t>(idx)];
      std::vector<std::string> merged;
      std::merge(comps[i].genes.begin(), comps[i].genes.end(), comps[j].genes.begin(),
                 comps[j].genes.end(), std::back_inserter(merged));
      PairEval ev;
      ev.model = fit_genes(expr, merged, opts.mixture);
      std::tie(ev.cost, ev.q) =
          subnetwork_cost(ev.model, static_cast<int>(merged.size()), n_samples);
      ev.delta = ev.cost - comps[i].cost - comps[j].cost;
      results[static_cast<std::size_t>(idx)] = std::move(ev);
    });
    for (std::size_t idx = 0; idx < pairs.size(); ++idx)
      cache[pairs[idx]] = std::move(results[idx]);
  };

  auto mergeable = [&](const std::pair<int, int>& p) {
    return comps[p.first].alive && comps[p.second].alive &&
           comps[p.first].genes.size() + comps[p.second].genes.size() <=
               static_cast<std::size_t>(opts.max_size);
  };

  {
    std::vector<std::pair<int, int>> todo;
    for (const auto& p : adjacent)
      if (mergeable(p)) todo.push_back(p);
    evaluate_pairs(todo);
  }

  for (;;) {
    // Pick the best candidate; ties resolved by the lexicographically smallest
    // leading gene id of the pair, then the other endpoint.
    const std::pair<int, int>* best_pair = nullptr;
    const PairEval* best_eval = nullptr;
    for (const auto& p : adjacent) {
      if (!mergeable(p)) continue;
      const auto it = cache.find(p);
      if (it == cache.end()) continue;
      if (best_eval == nullptr || it->second.delta < best_eval->delta) {
        best_pair = &it->first;
        best_eval = &it->second;
      } else if (it->second.delta == best_eval->delta) {
        const auto key = [&](const std::pair<int, int>& q) {
          return std::minmax(comps[q.first].genes.front(), comps[q.second].genes.front());
        };
        if (key(p) < key(*best_pair)) {
          best_pair = &it->first;
          best_eval = &it->second;
        }
      }
    }
    if (best_eval == nullptr || best_eval->delta >= 0.0) break;

    const auto [i, j] = *best_pair;
    Component merged;
    std::merge(comps[i].genes.begin(), comps[i].genes.end(), comps[j].genes.begin(),
               comps[j].genes.end(), std::back_inserter(merged.genes));
    merged.model = best_eval->model;
    merged.cost = best_eval->cost;
    merged.q = best_eval->q;
    comps[i].alive = false;
    comps[j].alive = false;
    const int id = static_cast<int>(comps.size());
    comps.push_back(std::move(merged));

    // The union inherits the adjacency of both parents.
    std::set<int> neighbor_ids;
    std::set<std::pair<int, int>> next_adjacent;
    for (const auto& [a, b] : adjacent) {
      int na = a, nb = b;
      if (na == i || na == j) na = id;
      if (nb == i || nb == j) nb = id;
      if (na == nb) continue;
      next_adjacent.insert({std::min(na, nb), std::max(na, nb)});
      if (na == id) neighbor_ids.insert(nb);
      if (nb == id) neighbor_ids.insert(na);
    }
    adjacent = std::move(next_adjacent);

    std::vector<std::pair<int, int>> todo;
    for (int nb : neighbor_ids) {
      const std::pair<int, int> p{std::min(nb, id), std::max(nb, id)};
      if (mergeable(p)) todo.push_back(p);
    }
    evaluate_pairs(todo);
  }

  std::vector<Subnetwork> out;
  for (const auto& c : comps) {
    if (!c.alive) continue;
    Subnetwork sub;
    sub.gene_ids = c.genes;
    sub.model = c.model;
    sub.cost = c.cost;
    sub.param_count = c.q;
    double base = 0.0;
    for (const auto& g : c.genes) base += singleton_cost[g];
    sub.improvement = base - c.cost;
    out.push_back(std::move(sub));
  }
  std::sort(out.begin(), out.end(), [](const Subnetwork& a, const Subnetwork& b) {
    if (a.improvement != b.improvement) return a.improvement > b.improvement;
    return a.gene_ids.front() < b.gene_ids.front();
  });
  return out;
}

ResponseAssignment assign_responses(const Subnetwork& sub, const ExpressionMatrix& expr) {
  const Eigen::MatrixXd data = expr.rows(sub.gene_ids).transpose();  // samples x dims
  const std::vector<int> effective = sub.model.effective_indices();
  if (effective.empty()) throw std::invalid_argument("assign_responses: model has no effective components");
  if (data.cols() != sub.model.means.cols())
    throw std::invalid_argument("assign_responses: dimension mismatch");

  double weight_total = 0.0;
  for (int r : effective) weight_total += sub.model.weights[r];

  ResponseAssignment out;
  out.component_ids = effective;
  out.posteriors.resize(data.rows(), static_cast<Eigen::Index>(effective.size()));
  out.hard.resize(static_cast<std::size_t>(data.rows()));
  std::vector<double> logp(effective.size());
  for (Eigen::Index n = 0; n < data.rows(); ++n) {
    for (std::size_t c = 0; c < effective.size(); ++c) {
      const int r = effective[c];
      const stats::DiagGaussian g{sub.model.means.row(r).transpose(),
                                  sub.model.variances.row(r).transpose()};
      logp[c] = std::log(sub.model.weights[r] / weight_total) +
                stats::diag_gaussian_logpdf(data.row(n).transpose(), g);
    }
    const double norm = stats::log_sum_exp(logp);
    int best = 0;
    for (std::size_t c = 0; c < effective.size(); ++c) {
      const double p = std::exp(logp[c] - norm);
      out.posteriors(n, static_cast<Eigen::Index>(c)) = p;
      if (p > out.posteriors(n, best)) best = static_cast<int>(c);
    }
    out.hard[static_cast<std::size_t>(n)] = best;
  }
  return out;
}

nlohmann::json subnetwork_to_json(const Subnetwork& sub, const ResponseAssignment& assignment,
                                  const std::vector<std::string>& sample_ids) {
  nlohmann::json j;
  j["type"] = "subnetwork";
  j["gene_ids"] = sub.gene_ids;
  j["cost"] = sub.cost;
  j["param_count"] = sub.param_count;
  j["improvement"] = sub.improvement;
  j["lower_bound"] = sub.model.lower_bound;
  j["effective_components"] = sub.model.effective_components;
  j["sample_ids"] = sample_ids;
  j["hard_responses"] = assignment.hard;
  nlohmann::json post = nlohmann::json::array();
  for (Eigen::Index n = 0; n < assignment.posteriors.rows(); ++n) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < assignment.posteriors.cols(); ++c)
      row.push_back(assignment.posteriors(n, c));
    post.push_back(std::move(row));
  }
  j["posteriors"] = post;
  return j;
}

}  // namespace gendep::netresponse
