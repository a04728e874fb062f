#include "gendep/simcca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "gendep/optim.hpp"
#include "gendep/parallel.hpp"

namespace gendep::simcca {

namespace {

constexpr double kJitterEigThreshold = 1e-9;
constexpr double kJitter = 1e-6;

// Symmetrize and, when the smallest eigenvalue is below threshold, add jitter
// on the diagonal. Returns the number of jitter applications (0 or 1).
int make_spd(Eigen::MatrixXd& m) {
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  double min_eig = es.eigenvalues().minCoeff();
  if (min_eig >= kJitterEigThreshold) return 0;
  m.diagonal().array() += kJitter - std::min(min_eig, 0.0);
  return 1;
}

double log_det_spd(const Eigen::MatrixXd& m) {
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error("jitter required: covariance not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error("jitter required: covariance not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

struct EStep {
  Eigen::MatrixXd v_z;  // k x k posterior covariance of z
  Eigen::MatrixXd b;    // D x k, (1/N) sum u E[z]^T
  Eigen::MatrixXd a;    // k x k, (1/N) sum E[z z^T]
};

EStep e_step(const Eigen::MatrixXd& s, const Eigen::MatrixXd& w, const Eigen::MatrixXd& p) {
  const Eigen::Index k = w.cols();
  EStep e;
  const Eigen::MatrixXd pw = p * w;
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(k, k) + w.transpose() * pw;
  e.v_z = spd_inverse(precision);
  e.b = s * pw * e.v_z;
  e.a = e.v_z + e.v_z * pw.transpose() * e.b;
  e.a = 0.5 * (e.a + e.a.transpose()).eval();
  return e;
}

}  // namespace

PairedData PairedData::from(const ExpressionMatrix& x, const ExpressionMatrix& y) {
  if (x.sample_ids != y.sample_ids)
    throw std::invalid_argument("PairedData: sample ids of the two matrices must match");
  PairedData d;
  d.x = x.values;
  d.y = y.values;
  d.sample_ids = x.sample_ids;
  return d;
}

void PairedData::center() {
  if (centered) return;
  x.colwise() -= x.rowwise().mean().eval();
  y.colwise() -= y.rowwise().mean().eval();
  centered = true;
}

Eigen::MatrixXd PairedData::joint_covariance() const {
  const Eigen::Index n = n_samples();
  Eigen::MatrixXd u(x.rows() + y.rows(), n);
  u.topRows(x.rows()) = x;
  u.bottomRows(y.rows()) = y;
  return u * u.transpose() / static_cast<double>(n);
}

Prior Prior::identity(Eigen::Index dy, Eigen::Index dx, double sigma_t2) {
  if (dy != dx)
    throw std::invalid_argument("Prior::identity: identity mean requires dx == dy; pass M explicitly");
  Prior p;
  p.m = Eigen::MatrixXd::Identity(dy, dx);
  p.sigma_t2 = sigma_t2;
  return p;
}

Eigen::MatrixXd Model::stacked_w() const {
  Eigen::MatrixXd w(w_x.rows() + t.rows(), w_x.cols());
  w.topRows(w_x.rows()) = w_x;
  w.bottomRows(t.rows()) = t * w_x;
  return w;
}

Eigen::MatrixXd Model::joint_sigma() const {
  const Eigen::Index dx = w_x.rows();
  const Eigen::Index dy = t.rows();
  const Eigen::MatrixXd w = stacked_w();
  Eigen::MatrixXd sigma = w * w.transpose();
  sigma.topLeftCorner(dx, dx) += psi_x;
  sigma.bottomRightCorner(dy, dy) += psi_y;
  return sigma;
}

double objective(const Model& model, const PairedData& data, const Prior& prior) {
  if (!data.centered) throw std::invalid_argument("simcca::objective: data must be centered");
  const Eigen::MatrixXd s = data.joint_covariance();
  const Eigen::MatrixXd sigma = model.joint_sigma();
  double value = log_det_spd(sigma) + (spd_inverse(sigma) * s).trace();
  if (prior.has_penalty()) {
    if (prior.m.rows() != model.t.rows() || prior.m.cols() != model.t.cols())
      throw std::invalid_argument("simcca::objective: prior mean shape mismatch");
    if (prior.sigma_t2 == 0.0) {
      if (model.t != prior.m)
        throw std::invalid_argument("simcca::objective: sigma_t2 = 0 requires T = M exactly");
    } else {
      value += (model.t - prior.m).squaredNorm() / (2.0 * prior.sigma_t2);
    }
  }
  return value;
}

Model fit(const PairedData& input, int k, const Prior& prior, const FitOptions& opts) {
  const Eigen::Index dx = input.x.rows();
  const Eigen::Index dy = input.y.rows();
  const Eigen::Index n = input.n_samples();
  if (k < 1) throw std::invalid_argument("simcca::fit: k must be >= 1");
  if (n <= k) throw std::invalid_argument("simcca::fit: need more samples than latent dimensions");
  if (input.y.cols() != n) throw std::invalid_argument("simcca::fit: column counts differ");

  PairedData data = input;
  data.center();
  const Eigen::MatrixXd s = data.joint_covariance();
  const Eigen::MatrixXd s_xy = s.topRightCorner(dx, dy);

  const bool penalized = prior.has_penalty();
  if (penalized && (prior.m.rows() != dy || prior.m.cols() != dx))
    throw std::invalid_argument("simcca::fit: prior mean must be dy x dx");
  const bool pinned = penalized && prior.sigma_t2 == 0.0;

  Model model;
  model.latent_dim = k;

  // Deterministic start: rank-k SVD of the cross-covariance block for W_x,
  // T at the prior mean (or the zero-coupling pseudo-solve when free), Psi
  // from the residual covariance.
  {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(s_xy, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd scale = svd.singularValues().head(k).array().sqrt();
    model.w_x = svd.matrixU().leftCols(k) * scale.asDiagonal();
    if (penalized) {
      model.t = prior.m;
    } else {
      const Eigen::MatrixXd w_y0 = svd.matrixV().leftCols(k) * scale.asDiagonal();
      // least-squares coupling reproducing W_y0 = T W_x
      model.t = w_y0 * (model.w_x.transpose() * model.w_x)
                           .ldlt()
                           .solve(model.w_x.transpose())
                           .eval();
    }
    model.psi_x = s.topLeftCorner(dx, dx) - model.w_x * model.w_x.transpose();
    const Eigen::MatrixXd w_y = model.t * model.w_x;
    model.psi_y = s.bottomRightCorner(dy, dy) - w_y * w_y.transpose();
    model.jitter_count += make_spd(model.psi_x);
    model.jitter_count += make_spd(model.psi_y);
  }

  // Free W for the unconstrained case; (W_x, T) otherwise.
  Eigen::MatrixXd w_free = model.stacked_w();

  auto current_objective = [&]() {
    const Eigen::MatrixXd sigma =
        penalized ? model.joint_sigma()
                  : (w_free * w_free.transpose() +
                     [&] {
                       Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(dx + dy, dx + dy);
                       psi.topLeftCorner(dx, dx) = model.psi_x;
                       psi.bottomRightCorner(dy, dy) = model.psi_y;
                       return psi;
                     }())
                        .eval();
    double value = log_det_spd(sigma) + (spd_inverse(sigma) * s).trace();
    if (penalized && prior.sigma_t2 > 0.0)
      value += (model.t - prior.m).squaredNorm() / (2.0 * prior.sigma_t2);
    return value;
  };

  double prev = current_objective();
  for (model.iterations = 1; model.iterations <= opts.max_iter; ++model.iterations) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dx + dy, dx + dy);
    const Eigen::MatrixXd p_x = spd_inverse(model.psi_x);
    const Eigen::MatrixXd p_y = spd_inverse(model.psi_y);
    p.topLeftCorner(dx, dx) = p_x;
    p.bottomRightCorner(dy, dy) = p_y;

    const Eigen::MatrixXd w_now = penalized ? model.stacked_w() : w_free;
    const EStep e = e_step(s, w_now, p);
    const Eigen::MatrixXd a_inv = spd_inverse(e.a);

    if (!penalized) {
      w_free = e.b * a_inv;
    } else if (pinned) {
      Eigen::MatrixXd g(dx + dy, dx);
      g.topRows(dx) = Eigen::MatrixXd::Identity(dx, dx);
      g.bottomRows(dy) = prior.m;
      const Eigen::MatrixXd gpg = g.transpose() * p * g;
      model.w_x = spd_inverse(gpg) * g.transpose() * p * e.b * a_inv;
      model.t = prior.m;
    } else {
      // Quasi-Newton step on the penalized M-step surrogate
      //   tr(P (W A W' - 2 W B')) + ||T - M||^2 / (2 sigma_t2),  W = [W_x; T W_x].
      const Eigen::MatrixXd b_x = e.b.topRows(dx);
      const Eigen::MatrixXd b_y = e.b.bottomRows(dy);
      const Eigen::Index n_wx = dx * k;
      const Eigen::Index n_t = dy * dx;
      auto surrogate = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        const Eigen::Map<const Eigen::MatrixXd> w_x(theta.data(), dx, k);
        const Eigen::Map<const Eigen::MatrixXd> t(theta.data() + n_wx, dy, dx);
        const Eigen::MatrixXd w_y = t * w_x;
        const Eigen::MatrixXd px_wx = p_x * w_x;
        const Eigen::MatrixXd py_wy = p_y * w_y;
        double value = (px_wx.transpose() * w_x * e.a).trace() - 2.0 * (px_wx.transpose() * b_x).trace() +
                       (py_wy.transpose() * w_y * e.a).trace() - 2.0 * (py_wy.transpose() * b_y).trace();
        value += (t - prior.m).squaredNorm() / (2.0 * prior.sigma_t2);
        grad.resize(theta.size());
        Eigen::Map<Eigen::MatrixXd> g_wx(grad.data(), dx, k);
        Eigen::Map<Eigen::MatrixXd> g_t(grad.data() + n_wx, dy, dx);
        g_wx = 2.0 * ((px_wx + t.transpose() * py_wy) * e.a - (p_x * b_x + t.transpose() * p_y * b_y));
        g_t = 2.0 * (py_wy * w_x * e.a - p_y * b_y) * w_x.transpose() + (t - prior.m) / prior.sigma_t2;
        return value;
      };
      Eigen::VectorXd theta0(n_wx + n_t);
      Eigen::Map<Eigen::MatrixXd>(theta0.data(), dx, k) = model.w_x;
      Eigen::Map<Eigen::MatrixXd>(theta0.data() + n_wx, dy, dx) = model.t;
      optim::Options inner;
      inner.max_iter = opts.inner_max_iter;
      inner.grad_tol = opts.inner_grad_tol;
      const optim::Result r = optim::minimize_bfgs(surrogate, theta0, inner);
      model.w_x = Eigen::Map<const Eigen::MatrixXd>(r.x.data(), dx, k);
      model.t = Eigen::Map<const Eigen::MatrixXd>(r.x.data() + n_wx, dy, dx);
    }

    // Psi-step: block-diagonal minimizer of the surrogate given the new W.
    const Eigen::MatrixXd w_new = penalized ? model.stacked_w() : w_free;
    const Eigen::MatrixXd c = s - w_new * e.b.transpose() - e.b * w_new.transpose() +
                              w_new * e.a * w_new.transpose();
    model.psi_x = c.topLeftCorner(dx, dx);
    model.psi_y = c.bottomRightCorner(dy, dy);
    model.jitter_count += make_spd(model.psi_x);
    model.jitter_count += make_spd(model.psi_y);

    const double current = current_objective();
    if (std::abs(current - prev) < opts.tol * std::max(1.0, std::abs(prev))) {
      prev = current;
      model.converged = true;
      break;
    }
    prev = current;
  }
  model.iterations = std::min(model.iterations, opts.max_iter);

  if (!penalized) {
    // Recover the coupling reproducing the free W_y on the span of W_x.
    model.w_x = w_free.topRows(dx);
    const Eigen::MatrixXd w_y = w_free.bottomRows(dy);
    model.t = w_y * (model.w_x.transpose() * model.w_x).ldlt().solve(model.w_x.transpose()).eval();
  }
  model.objective = prev;
  return model;
}

double dependency_score(const Model& model) {
  const Eigen::MatrixXd w = model.stacked_w();
  const double shared = w.squaredNorm();  // Tr(W W^T)
  const double specific = model.psi_x.trace() + model.psi_y.trace();
  return shared / specific;
}

double dependency_score_lr(const Model& model, const PairedData& data) {
  PairedData centered = data;
  centered.center();
  const Eigen::MatrixXd s = centered.joint_covariance();
  const Eigen::Index dx = model.w_x.rows();
  const Eigen::Index dy = model.t.rows();
  Eigen::MatrixXd sigma0 = Eigen::MatrixXd::Zero(dx + dy, dx + dy);
  sigma0.topLeftCorner(dx, dx) = s.topLeftCorner(dx, dx);
  sigma0.bottomRightCorner(dy, dy) = s.bottomRightCorner(dy, dy);
  make_spd(sigma0);
  const double independent = log_det_spd(sigma0) + (spd_inverse(sigma0) * s).trace();
  const Eigen::MatrixXd sigma = model.joint_sigma();
  const double joint = log_det_spd(sigma) + (spd_inverse(sigma) * s).trace();
  return independent - joint;
}

Eigen::VectorXd canonical_correlations(const Model& model) {
  const Eigen::Index dx = model.w_x.rows();
  const Eigen::Index dy = model.t.rows();
  const Eigen::MatrixXd sigma = model.joint_sigma();
  const Eigen::MatrixXd s_xx = sigma.topLeftCorner(dx, dx);
  const Eigen::MatrixXd s_yy = sigma.bottomRightCorner(dy, dy);
  const Eigen::MatrixXd s_xy = sigma.topRightCorner(dx, dy);
  const Eigen::MatrixXd cross = s_xy * spd_inverse(s_yy) * s_xy.transpose();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(cross, s_xx);
  const Eigen::Index count = std::min(dx, dy);
  Eigen::VectorXd rho(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double lambda = std::clamp(es.eigenvalues()[dx - 1 - i], 0.0, 1.0);
    rho[i] = std::sqrt(lambda);
  }
  return rho;
}

Eigen::MatrixXd latent_z(const Model& model, const PairedData& data) {
  const Eigen::Index dx = model.w_x.rows();
  const Eigen::Index dy = model.t.rows();
  if (data.x.rows() != dx || data.y.rows() != dy)
    throw std::invalid_argument("latent_z: data dimensions do not match the model");
  PairedData centered = data;
  centered.center();
  Eigen::MatrixXd u(dx + dy, centered.n_samples());
  u.topRows(dx) = centered.x;
  u.bottomRows(dy) = centered.y;

  const Eigen::MatrixXd w = model.stacked_w();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dx + dy, dx + dy);
  p.topLeftCorner(dx, dx) = spd_inverse(model.psi_x);
  p.bottomRightCorner(dy, dy) = spd_inverse(model.psi_y);
  const Eigen::MatrixXd pw = p * w;
  const Eigen::MatrixXd v_z = spd_inverse(
      Eigen::MatrixXd::Identity(model.latent_dim, model.latent_dim) + w.transpose() * pw);
  return v_z * pw.transpose() * u;
}

ScreenResult genome_screen(const ExpressionMatrix& x, const ExpressionMatrix& y,
                           const PositionTable& positions, const Prior& prior,
                           const ScreenOptions& opts) {
  if (opts.window < 1) throw std::invalid_argument("genome_screen: window must be >= 1");

  // Anchors: features shared by both matrices with a known position.
  struct Feature {
    std::string id;
    std::string chromosome;
    std::int64_t coordinate;
  };
  std::vector<Feature> features;
  for (const auto& id : x.feature_ids) {
    if (y.feature_index(id) < 0) continue;
    const auto it = positions.entries.find(id);
    if (it == positions.entries.end()) continue;
    features.push_back({id, it->second.chromosome, it->second.coordinate});
  }
  if (features.empty()) throw std::invalid_argument("genome_screen: no shared positioned features");

  std::map<std::string, std::vector<const Feature*>> by_chromosome;
  for (const auto& f : features) by_chromosome[f.chromosome].push_back(&f);
  for (auto& [chrom, list] : by_chromosome) {
    std::sort(list.begin(), list.end(), [](const Feature* a, const Feature* b) {
      if (a->coordinate != b->coordinate) return a->coordinate < b->coordinate;
      return a->id < b->id;
    });
  }

  ScreenResult result;
  std::vector<const Feature*> anchors;
  for (const auto& f : features) {
    if (static_cast<int>(by_chromosome[f.chromosome].size()) < opts.window) {
      ++result.skipped_anchors;
      continue;
    }
    anchors.push_back(&f);
  }

  result.scores.resize(anchors.size());
  parallel_for(static_cast<int>(anchors.size()), opts.threads, [&](int idx) {
    const Feature* anchor = anchors[static_cast<std::size_t>(idx)];
    const auto& chrom = by_chromosome[anchor->chromosome];

    // d closest features by |coordinate - anchor coordinate|; ties toward the
    // lower coordinate for determinism.
    std::vector<const Feature*> sorted = chrom;
    std::sort(sorted.begin(), sorted.end(), [&](const Feature* a, const Feature* b) {
      const auto da = std::llabs(a->coordinate - anchor->coordinate);
      const auto db = std::llabs(b->coordinate - anchor->coordinate);
      if (da != db) return da < db;
      if (a->coordinate != b->coordinate) return a->coordinate < b->coordinate;
      return a->id < b->id;
    });
    std::vector<std::string> members;
    for (int i = 0; i < opts.window; ++i) members.push_back(sorted[static_cast<std::size_t>(i)]->id);
    std::sort(members.begin(), members.end());

    PairedData window;
    window.x = x.rows(members);
    window.y = y.rows(members);
    window.sample_ids = x.sample_ids;
    const int k = opts.latent_dim > 0 ? opts.latent_dim : opts.window;

    Prior window_prior = prior;
    if (window_prior.has_penalty() && window_prior.m.size() == 0)
      window_prior.m = Eigen::MatrixXd::Identity(opts.window, opts.window);

    const Model model = fit(window, k, window_prior, opts.fit);
    WindowScore& w = result.scores[static_cast<std::size_t>(idx)];
    w.anchor = anchor->id;
    w.members = members;
    w.score = opts.use_lr_score ? dependency_score_lr(model, window) : dependency_score(model);
    w.objective = model.objective;
    w.latent_dim = k;
    w.converged = model.converged;
  });

  std::sort(result.scores.begin(), result.scores.end(), [](const WindowScore& a, const WindowScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.anchor < b.anchor;
  });
  return result;
}

namespace {

// Generalized eigenvalue CCA on explicit covariance blocks.
ConstrainedCcaResult classical_cca(Eigen::MatrixXd s_xx, Eigen::MatrixXd s_yy,
                                   const Eigen::MatrixXd& s_xy, int components) {
  ConstrainedCcaResult out;
  out.jitter_count += make_spd(s_xx);
  out.jitter_count += make_spd(s_yy);
  const Eigen::MatrixXd s_yy_inv = spd_inverse(s_yy);
  const Eigen::MatrixXd cross = s_xy * s_yy_inv * s_xy.transpose();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(cross, s_xx);
  const Eigen::Index dx = s_xx.rows();
  for (int c = 0; c < components; ++c) {
    CcaComponent comp;
    const Eigen::Index idx = dx - 1 - c;
    if (idx < 0) break;
    comp.v_x = es.eigenvectors().col(idx);
    comp.correlation = std::sqrt(std::clamp(es.eigenvalues()[idx], 0.0, 1.0));
    comp.v_y = s_yy_inv * s_xy.transpose() * comp.v_x;
    const double scale = std::sqrt(comp.v_y.transpose() * s_yy * comp.v_y);
    if (scale > 0.0) comp.v_y /= scale;
    out.components.push_back(std::move(comp));
  }
  return out;
}

}  // namespace

ConstrainedCcaResult constrained_cca(const PairedData& input, const Eigen::MatrixXd* t_fixed,
                                     int components) {
  const Eigen::Index dx = input.x.rows();
  const Eigen::Index dy = input.y.rows();
  if (components < 1 || components > dx)
    throw std::invalid_argument("constrained_cca: components must be in [1, dx]");
  PairedData data = input;
  data.center();
  const Eigen::Index n = data.n_samples();

  if (t_fixed == nullptr) {
    const Eigen::MatrixXd s = data.joint_covariance();
    return classical_cca(s.topLeftCorner(dx, dx), s.bottomRightCorner(dy, dy),
                         s.topRightCorner(dx, dy), components);
  }

  if (t_fixed->rows() != dy || t_fixed->cols() != dx)
    throw std::invalid_argument("constrained_cca: T must be dy x dx");
  const Eigen::MatrixXd& t = *t_fixed;

  ConstrainedCcaResult out;
  Eigen::MatrixXd xd = data.x;
  Eigen::MatrixXd yd = data.y;
  for (int c = 0; c < components; ++c) {
    Eigen::MatrixXd s_xx = xd * xd.transpose() / static_cast<double>(n);
    Eigen::MatrixXd s_yy = yd * yd.transpose() / static_cast<double>(n);
    const Eigen::MatrixXd s_xy = xd * yd.transpose() / static_cast<double>(n);
    out.jitter_count += make_spd(s_xx);
    out.jitter_count += make_spd(s_yy);
    const Eigen::MatrixXd sym_c = 0.5 * (s_xy * t + t.transpose() * s_xy.transpose());
    Eigen::MatrixXd d = t.transpose() * s_yy * t;
    out.jitter_count += make_spd(d);

    // Initial direction from the symmetric relaxation, then a quasi-Newton
    // polish of the exact correlation ratio (scale invariant in v).
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sym_c, 0.5 * (s_xx + d));
    Eigen::VectorXd v = es.eigenvectors().col(dx - 1);

    auto neg_corr = [&](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
      const double a = u.dot(sym_c * u);
      const double bx = u.dot(s_xx * u);
      const double by = u.dot(d * u);
      const double denom = std::sqrt(bx * by);
      const double rho = a / denom;
      grad = -(2.0 * (sym_c * u) / denom - rho * (s_xx * u / bx + d * u / by));
      return -rho;
    };
    optim::Options opts;
    opts.max_iter = 500;
    opts.grad_tol = 1e-10;
    const optim::Result r = optim::minimize_bfgs(neg_corr, v / v.norm(), opts);
    v = r.x;

    CcaComponent comp;
    comp.v_x = v / std::sqrt(v.dot(s_xx * v));
    comp.v_y = t * comp.v_x;
    const Eigen::VectorXd proj_x = xd.transpose() * comp.v_x;
    const Eigen::VectorXd proj_y = yd.transpose() * comp.v_y;
    const double denom = proj_x.norm() * proj_y.norm();
    comp.correlation = denom > 0.0 ? proj_x.dot(proj_y) / denom : 0.0;
    out.components.push_back(comp);

    // Deflate the explained projections from both views.
    const Eigen::VectorXd ax = proj_x / proj_x.norm();
    const Eigen::VectorXd ay = proj_y.norm() > 0.0 ? (proj_y / proj_y.norm()).eval() : ax;
    xd -= (xd * ax) * ax.transpose();
    yd -= (yd * ay) * ay.transpose();
  }
  return out;
}

nlohmann::json window_to_json(const WindowScore& w) {
  nlohmann::json j;
  j["type"] = "window_score";
  j["anchor"] = w.anchor;
  j["members"] = w.members;
  j["score"] = w.score;
  j["objective"] = w.objective;
  j["latent_dim"] = w.latent_dim;
  j["converged"] = w.converged;
  return j;
}

}  // namespace gendep::simcca
