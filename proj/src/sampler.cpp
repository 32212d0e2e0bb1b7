#include "lxs/sampler.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "lxs/errors.hpp"

namespace lxs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

// 0.5 z^2 + log Phi(z) without the cancellation for very negative z.
double half_sq_plus_logcdf(double z) {
  if (z > -30.0) return 0.5 * z * z + norm_logcdf(z);
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -std::log(-z) - kLogSqrt2Pi + std::log(series);
}

double log_orthant(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const ChainConfig& cfg,
                   Rng& rng) {
  const Eigen::Index d = mean.size();
  if (d == 1) return norm_logcdf(mean[0] / std::sqrt(cov(0, 0)));
  if (d == 2) {
    const double s1 = std::sqrt(cov(0, 0)), s2 = std::sqrt(cov(1, 1));
    const double r = cov(0, 1) / (s1 * s2);
    if (std::abs(r) < 1.0) return log_bvn_upper(-mean[0] / s1, -mean[1] / s2, r);
  } else if (d == 3) {
    const Eigen::Vector3d sd = cov.diagonal().cwiseSqrt();
    const Eigen::Vector3d h = -mean.cwiseQuotient(sd);
    const Eigen::Matrix3d r = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
    const double lp = log_tvn_upper(h, r);
    if (!std::isnan(lp)) return lp;
  }
  OrthantProblem prob{mean, cov, Eigen::VectorXd::Zero(d)};
  return orthant_prob(prob, rng, cfg.orthant).log_estimate;
}

double draw_prior_coefficient(double pi, double lambda, Rng& rng) {
  if (uniform01(rng) < pi) return 0.0;
  return -std::log(uniform01(rng)) / lambda;
}

// Breakpoint index of `label` among the knots of `tree`.
int breakpoint_index(const KnotTree& tree, const Dyadic& label) {
  int idx = 1;
  for (const auto& node : tree.nodes()) {
    if (node == label) return idx;
    ++idx;
  }
  throw LabelError(label.str() + " not in tree");
}

}  // namespace

std::vector<double> default_ladder() {
  return {1 / 30.0, 1 / 24.0, 1 / 12.0, 1 / 9.0, 1 / 5.0, 1 / 3.5,
          1 / 2.0,  1 / 1.7,  1 / 1.3,  1 / 1.2, 1 / 1.1, 1.0};
}

void ChainConfig::validate() const {
  if (n_iters < 1) throw ConfigError("n_iters must be positive");
  if (burn_in < 0 || burn_in >= n_iters) throw ConfigError("burn_in must be in [0, n_iters)");
  if (thin < 1) throw ConfigError("thin must be positive");
  if (temperatures.empty() || temperatures.back() != 1.0)
    throw ConfigError("temperature ladder must end at 1");
  for (std::size_t i = 0; i < temperatures.size(); ++i) {
    if (!(temperatures[i] > 0.0)) throw ConfigError("temperatures must be positive");
    if (i > 0 && !(temperatures[i] > temperatures[i - 1]))
      throw ConfigError("temperatures must be strictly increasing");
  }
  if (!(alpha_step >= 0.0)) throw ConfigError("alpha_step must be nonnegative");
}

double spike_slab_log_odds(double q, double u, double pi, double lambda) {
  const double prior = std::log1p(-pi) + std::log(lambda) - std::log(pi);
  return prior + 0.5 * std::log(2.0 * std::numbers::pi / q) + half_sq_plus_logcdf(u / std::sqrt(q));
}

RjMarginal rj_log_marginal(const Eigen::MatrixXd& xa, const Eigen::VectorXd& r, double tau,
                           double pi, double lambda, const ChainConfig& cfg, Rng& rng) {
  RjMarginal out;
  const Eigen::Index d = xa.cols();
  Eigen::MatrixXd g;
  Eigen::VectorXd u;
  if (tau > 0.0) {
    g = tau * (xa.transpose() * xa);
    u = tau * (xa.transpose() * r);
    u.array() -= lambda;
    for (Eigen::Index i = 0; i < d; ++i)
      if (g(i, i) > 1e-10 * lambda * lambda) out.informative.push_back(static_cast<int>(i));
  }
  const int di = static_cast<int>(out.informative.size());
  if (di == 0) {
    out.log_terms = {0.0};
    return out;
  }

  Eigen::MatrixXd q(di, di);
  Eigen::VectorXd ui(di);
  for (int a = 0; a < di; ++a) {
    ui[a] = u[out.informative[a]];
    for (int b = 0; b < di; ++b) q(a, b) = g(out.informative[a], out.informative[b]);
  }
  {
    const Eigen::VectorXd s = q.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd corr = s.asDiagonal() * q * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > cfg.max_condition) {
      out.ok = false;
      return out;
    }
  }

  const double log_pi = std::log(pi), log_slab = std::log1p(-pi) + std::log(lambda);
  const std::size_t n_masks = std::size_t{1} << di;
  out.log_terms.assign(n_masks, -kInf);
  // Pass 1: everything but the orthant factor, plus an upper bound on it from
  // the smallest univariate marginal.
  struct Pending {
    unsigned mask;
    double base, bound;
    Eigen::VectorXd mu;
    Eigen::MatrixXd cov;
  };
  std::vector<Pending> pending;
  double best = -kInf;
  std::vector<int> idx;
  for (unsigned mask = 0; mask < n_masks; ++mask) {
    idx.clear();
    for (int a = 0; a < di; ++a)
      if (mask & (1u << a)) idx.push_back(a);
    const int s = static_cast<int>(idx.size());
    double term = (di - s) * log_pi + s * log_slab;
    if (s <= 1) {
      if (s == 1) {
        const double qq = q(idx[0], idx[0]);
        term += 0.5 * std::log(2.0 * std::numbers::pi / qq) + half_sq_plus_logcdf(ui[idx[0]] / std::sqrt(qq));
      }
      out.log_terms[mask] = term;
      best = std::max(best, term);
      continue;
    }
    Eigen::MatrixXd qs(s, s);
    Eigen::VectorXd us(s);
    for (int a = 0; a < s; ++a) {
      us[a] = ui[idx[a]];
      for (int b = 0; b < s; ++b) qs(a, b) = q(idx[a], idx[b]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(qs);
    if (llt.info() != Eigen::Success) {
      out.ok = false;
      return out;
    }
    Pending pd{mask, 0.0, 0.0, llt.solve(us), {}};
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(s, s));
    pd.cov = 0.5 * (cov + cov.transpose());
    double logdet = 0.0;
    for (int a = 0; a < s; ++a) logdet += 2.0 * std::log(llt.matrixL()(a, a));
    pd.base = term + 0.5 * us.dot(pd.mu) + 0.5 * s * kLog2Pi - 0.5 * logdet;
    pd.bound = 0.0;
    for (int a = 0; a < s; ++a) pd.bound = std::min(pd.bound, norm_logcdf(pd.mu[a] / std::sqrt(pd.cov(a, a))));
    pending.push_back(std::move(pd));
  }
  // Pass 2: exact orthant factors, largest bound first; terms bounded below
  // e^-40 of the best exact term keep their bound.
  std::sort(pending.begin(), pending.end(),
            [](const Pending& x, const Pending& y) { return x.base + x.bound > y.base + y.bound; });
  for (const Pending& pd : pending) {
    if (pd.base + pd.bound < best - 40.0) {
      out.log_terms[pd.mask] = pd.base + pd.bound;
      continue;
    }
    const double lp = log_orthant(pd.mu, pd.cov, cfg, rng);
    if (!std::isfinite(lp) && lp != -kInf) {
      out.ok = false;
      return out;
    }
    out.log_terms[pd.mask] = pd.base + lp;
    best = std::max(best, pd.base + lp);
  }
  out.log_value = log_sum_exp(out.log_terms);
  if (!std::isfinite(out.log_value)) out.ok = false;
  return out;
}

Eigen::VectorXd rtmvn_positive(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
  const Eigen::Index d = mean.size();
  if (d == 1) {
    return Eigen::VectorXd::Constant(1, rtruncnorm_positive(mean[0], std::sqrt(cov(0, 0)), rng));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw MatrixError("covariance is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::VectorXd z(d), x(d);
  for (int attempt = 0; attempt < 200; ++attempt) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = std_normal(rng);
    x = mean + l * z;
    if ((x.array() > 0.0).all()) return x;
  }
  // Univariate conditionals from a feasible start.
  const Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(d, d));
  for (Eigen::Index i = 0; i < d; ++i) x[i] = std::max(mean[i], 1e-3 * std::sqrt(cov(i, i)));
  for (int sweep = 0; sweep < 50; ++sweep) {
    for (Eigen::Index i = 0; i < d; ++i) {
      double shift = 0.0;
      for (Eigen::Index j = 0; j < d; ++j)
        if (j != i) shift += prec(i, j) * (x[j] - mean[j]);
      const double m = mean[i] - shift / prec(i, i);
      x[i] = rtruncnorm_positive(m, 1.0 / std::sqrt(prec(i, i)), rng);
    }
  }
  return x;
}

SamplerData SamplerData::from(const Dataset& d) {
  SamplerData s;
  s.xw = d.working_xs();
  s.y = Eigen::Map<const Eigen::VectorXd>(d.ys.data(), static_cast<Eigen::Index>(d.ys.size()));
  return s;
}

Chain::Chain(SamplerData data, Hyperparameters hp, ModelState init, double kappa,
             std::uint64_t seed, ChainConfig cfg)
    : data_(std::move(data)), hp_(std::move(hp)), cfg_(std::move(cfg)), kappa_(kappa),
      alpha_step_(cfg_.alpha_step), rng_(seed) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw ConfigError("temperature must lie in (0, 1]");
  set_state(std::move(init));
}

void Chain::set_state(ModelState s) {
  if (!state_is_valid(s, hp_)) throw DomainError("initial state violates the model invariants");
  rep_.state = std::move(s);
  rebuild();
}

void Chain::set_response(Eigen::VectorXd y) {
  if (y.size() != data_.y.size()) throw DomainError("response length changed");
  data_.y = std::move(y);
  rebuild();
}

double Chain::tau() const { return cfg_.use_likelihood ? kappa_ / rep_.state.sigma2 : 0.0; }

Eigen::VectorXd Chain::coefficients() const {
  Eigen::VectorXd c(rep_.state.beta.size() + 1);
  c[0] = rep_.state.beta0;
  c.tail(rep_.state.beta.size()) = rep_.state.beta;
  return c;
}

Eigen::MatrixXd Chain::build_design(const LxBasis& basis) const {
  return lx_design_matrix(basis, data_.xw);
}

void Chain::rebuild() {
  rep_.basis.emplace(make_basis(rep_.state.tree, rep_.state.alpha, hp_));
  rep_.x = build_design(*rep_.basis);
  rep_.resid = data_.y - rep_.x * coefficients();
  rep_.ss = rep_.resid.squaredNorm();
  refresh_loglik();
}

void Chain::refresh_loglik() {
  if (!cfg_.use_likelihood) {
    rep_.loglik = 0.0;
    return;
  }
  const double n = static_cast<double>(data_.y.size());
  rep_.loglik = -0.5 * n * (kLog2Pi + std::log(rep_.state.sigma2)) - 0.5 * rep_.ss / rep_.state.sigma2;
}

void Chain::gibbs_beta() {
  auto& s = rep_.state;
  auto& r = rep_.resid;
  const double t = tau();
  for (Eigen::Index k = 0; k < s.beta.size(); ++k) {
    const auto col = rep_.x.col(k + 1);
    if (s.beta[k] != 0.0) r += s.beta[k] * col;
    const double q = t * col.squaredNorm();
    double nb = 0.0;
    if (!(q > 0.0)) {
      nb = draw_prior_coefficient(s.pi, s.lambda, rng_);
    } else {
      const double u = t * col.dot(r) - s.lambda;
      const double lo = spike_slab_log_odds(q, u, s.pi, s.lambda);
      const double p_slab = 1.0 / (1.0 + std::exp(-lo));
      if (uniform01(rng_) < p_slab) nb = rtruncnorm_positive(u / q, 1.0 / std::sqrt(q), rng_);
    }
    if (nb != 0.0) r -= nb * col;
    s.beta[k] = nb;
  }
  // intercept
  const double n = static_cast<double>(r.size());
  r.array() += s.beta0;
  const double prec = t * n + 1.0 / hp_.c;
  const double mean = t * r.sum() / prec;
  s.beta0 = mean + std_normal(rng_) / std::sqrt(prec);
  r.array() -= s.beta0;
  rep_.ss = r.squaredNorm();
  refresh_loglik();
}

void Chain::update_alpha() {
  auto& s = rep_.state;
  const double mu = hp_.alpha_prior_mean();
  for (std::size_t h = 0; h < s.alpha.size(); ++h) {
    ++stats_.alpha_tries;
    std::vector<double> prop = s.alpha;
    prop[h] += alpha_step_ * std_normal(rng_);
    if (prop[h] < hp_.a || prop[h] > hp_.b) continue;
    bool separated = true;
    for (std::size_t o = 0; o < prop.size(); ++o)
      if (o != h && std::abs(prop[o] - prop[h]) < kMinAlphaSeparation) separated = false;
    if (!separated) continue;

    LxBasis basis = make_basis(s.tree, prop, hp_);
    Eigen::MatrixXd x = build_design(basis);
    Eigen::VectorXd resid = data_.y - x * coefficients();
    const double ss = resid.squaredNorm();
    double log_acc = -0.5 * ((prop[h] - mu) * (prop[h] - mu) - (s.alpha[h] - mu) * (s.alpha[h] - mu));
    if (cfg_.use_likelihood) log_acc += -0.5 * kappa_ * (ss - rep_.ss) / s.sigma2;
    if (std::log(uniform01(rng_)) < log_acc) {
      ++stats_.alpha_accepts;
      s.alpha = std::move(prop);
      rep_.basis.emplace(std::move(basis));
      rep_.x = std::move(x);
      rep_.resid = std::move(resid);
      rep_.ss = ss;
      refresh_loglik();
    }
  }
}

void Chain::update_hypers() {
  auto& s = rep_.state;
  const long total = s.beta.size();
  const long nonzero = (s.beta.array() > 0.0).count();
  s.pi = rbeta(hp_.nu + static_cast<double>(total - nonzero), hp_.omega + static_cast<double>(nonzero), rng_);
  s.pi = std::clamp(s.pi, 1e-300, 1.0 - 1e-16);
  s.lambda = rtruncgamma(hp_.delta + static_cast<double>(nonzero), hp_.kappa + s.beta.sum(), hp_.lambda_floor, rng_);
  double shape = hp_.sigma2_shape, rate = hp_.sigma2_rate;
  if (cfg_.use_likelihood) {
    shape += 0.5 * kappa_ * static_cast<double>(data_.y.size());
    rate += 0.5 * kappa_ * rep_.ss;
  }
  s.sigma2 = 1.0 / rgamma(shape, rate, rng_);
  refresh_loglik();
}

void Chain::rescale_lambda() {
  auto& s = rep_.state;
  ++stats_.lambda_tries;
  const double proposal = rtruncgamma(hp_.delta, hp_.kappa, hp_.lambda_floor, rng_);
  const double scale = s.lambda / proposal;
  Eigen::VectorXd resid;
  double ss = rep_.ss;
  if (cfg_.use_likelihood) {
    // fitted - beta0 scales with the slopes
    const Eigen::VectorXd slope_part = (data_.y - rep_.resid).array() - s.beta0;
    resid = data_.y - scale * slope_part;
    resid.array() -= s.beta0;
    ss = resid.squaredNorm();
    const double log_acc = -0.5 * kappa_ * (ss - rep_.ss) / s.sigma2;
    if (!(std::log(uniform01(rng_)) < log_acc)) return;
  }
  if (!(s.beta * scale).allFinite()) return;
  ++stats_.lambda_accepts;
  s.lambda = proposal;
  s.beta *= scale;
  if (cfg_.use_likelihood) {
    rep_.resid = std::move(resid);
    rep_.ss = ss;
    refresh_loglik();
  }
}

Chain::RjEvaluation Chain::evaluate_move(const MoveProposal& move) {
  RjEvaluation ev;
  auto& s = rep_.state;
  const int j = hp_.order;
  const bool insert = move.kind == MoveKind::Insert;
  KnotTree new_tree = apply_move(s.tree, move);
  const KnotTree& big_tree = insert ? new_tree : s.tree;
  const int m = breakpoint_index(big_tree, move.label);
  const int first = m - 1;

  LxBasis new_basis = make_basis(new_tree, s.alpha, hp_);
  Eigen::MatrixXd new_x = build_design(new_basis);
  const Eigen::MatrixXd& x_big = insert ? new_x : rep_.x;
  const Eigen::MatrixXd& x_small = insert ? rep_.x : new_x;
  const int n_cur = insert ? j : j + 1;

  Eigen::VectorXd r = rep_.resid;
  for (int k = first; k < first + n_cur; ++k)
    if (s.beta[k] != 0.0) r += s.beta[k] * rep_.x.col(k + 1);

  const double t = tau();
  RjMarginal big = rj_log_marginal(x_big.middleCols(first + 1, j + 1), r, t, s.pi, s.lambda, cfg_, rng_);
  RjMarginal small = rj_log_marginal(x_small.middleCols(first + 1, j), r, t, s.pi, s.lambda, cfg_, rng_);

  const double lp_big = log_prior(big_tree);
  const double lp_small = log_prior(insert ? s.tree : new_tree);
  const double sign = insert ? 1.0 : -1.0;
  ev.ok = big.ok && small.ok;
  ev.log_marginal_big = big.log_value;
  ev.log_marginal_small = small.log_value;
  ev.log_tree_ratio = sign * (lp_big - lp_small);
  ev.log_proposal_ratio = std::log(move.reverse_prob) - std::log(move.forward_prob);
  ev.log_h = sign * (big.log_value - small.log_value) + ev.log_tree_ratio + ev.log_proposal_ratio;
  return ev;
}

void Chain::rj_knot_move() {
  auto& s = rep_.state;
  const int j = hp_.order;
  const MoveProposal move = propose_move(s.tree, rng_);
  const bool insert = move.kind == MoveKind::Insert;
  (insert ? stats_.insert_tries : stats_.delete_tries)++;

  KnotTree new_tree = apply_move(s.tree, move);
  const KnotTree& big_tree = insert ? new_tree : s.tree;
  const int first = breakpoint_index(big_tree, move.label) - 1;
  const int n_cur = insert ? j : j + 1;
  const int n_new = insert ? j + 1 : j;

  LxBasis new_basis = make_basis(new_tree, s.alpha, hp_);
  Eigen::MatrixXd new_x = build_design(new_basis);

  Eigen::VectorXd r = rep_.resid;
  for (int k = first; k < first + n_cur; ++k)
    if (s.beta[k] != 0.0) r += s.beta[k] * rep_.x.col(k + 1);

  const double t = tau();
  RjMarginal m_cur, m_new;
  try {
    m_cur = rj_log_marginal(rep_.x.middleCols(first + 1, n_cur), r, t, s.pi, s.lambda, cfg_, rng_);
    m_new = rj_log_marginal(new_x.middleCols(first + 1, n_new), r, t, s.pi, s.lambda, cfg_, rng_);
  } catch (const Error&) {
    ++stats_.rj_failures;
    return;
  }
  if (!m_cur.ok || !m_new.ok) {
    ++stats_.rj_failures;
    return;
  }
  const double log_h = (m_new.log_value - m_cur.log_value) + (log_prior(new_tree) - log_prior(s.tree)) +
                       std::log(move.reverse_prob) - std::log(move.forward_prob);
  if (!(std::log(uniform01(rng_)) < log_h)) return;

  // Refresh the affected block from its conditional in the new model.
  Eigen::VectorXd block = Eigen::VectorXd::Zero(n_new);
  std::vector<bool> informative(n_new, false);
  for (int i : m_new.informative) informative[i] = true;
  for (int i = 0; i < n_new; ++i)
    if (!informative[i]) block[i] = draw_prior_coefficient(s.pi, s.lambda, rng_);
  const int di = static_cast<int>(m_new.informative.size());
  if (di > 0) {
    double u0 = uniform01(rng_);
    unsigned mask = 0;
    for (unsigned p = 0; p < m_new.log_terms.size(); ++p) {
      u0 -= std::exp(m_new.log_terms[p] - m_new.log_value);
      mask = p;
      if (u0 <= 0.0) break;
    }
    std::vector<int> idx;
    for (int a = 0; a < di; ++a)
      if (mask & (1u << a)) idx.push_back(m_new.informative[a]);
    if (!idx.empty()) {
      const int ns = static_cast<int>(idx.size());
      Eigen::MatrixXd xs(new_x.rows(), ns);
      for (int a = 0; a < ns; ++a) xs.col(a) = new_x.col(first + 1 + idx[a]);
      const Eigen::MatrixXd q = t * (xs.transpose() * xs);
      Eigen::VectorXd u = t * (xs.transpose() * r);
      u.array() -= s.lambda;
      Eigen::LLT<Eigen::MatrixXd> llt(q);
      const Eigen::VectorXd mu = llt.solve(u);
      Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(ns, ns));
      cov = 0.5 * (cov + cov.transpose());
      const Eigen::VectorXd draw = rtmvn_positive(mu, cov, rng_);
      for (int a = 0; a < ns; ++a) block[idx[a]] = draw[a];
    }
  }

  Eigen::VectorXd beta(new_basis.n_basis());
  for (int k = 0; k < first; ++k) beta[k] = s.beta[k];
  for (int i = 0; i < n_new; ++i) beta[first + i] = block[i];
  for (int k = first + n_cur; k < s.beta.size(); ++k) beta[k - n_cur + n_new] = s.beta[k];

  (insert ? stats_.insert_accepts : stats_.delete_accepts)++;
  s.tree = std::move(new_tree);
  s.beta = std::move(beta);
  rep_.basis.emplace(std::move(new_basis));
  rep_.x = std::move(new_x);
  rep_.resid = data_.y - rep_.x * coefficients();
  rep_.ss = rep_.resid.squaredNorm();
  refresh_loglik();
}

void Chain::sweep() {
  gibbs_beta();
  update_alpha();
  update_hypers();
  rescale_lambda();
  rj_knot_move();
}

void Chain::adapt_alpha(long iteration, double accept_rate) {
  const double gain = 1.0 / std::pow(1.0 + static_cast<double>(iteration) / 10.0, 0.6);
  alpha_step_ = std::clamp(alpha_step_ * std::exp(gain * (accept_rate - cfg_.alpha_target)), 1e-5, 2.0);
}

void swap_states(Chain& a, Chain& b) { std::swap(a.rep_, b.rep_); }

bool has_flat_region(const ModelState& state, const Hyperparameters& hp) {
  const KnotVector kv(working_knots(state.tree), hp.order);
  std::array<double, kMaxOrder> vals{};
  for (double a : state.alpha) {
    if (!(a > kWorkingLo && a < kWorkingHi)) continue;
    const int span = kv.span(a);
    basis_funs(kv, span, a, vals.data());
    bool flat = true;
    for (int r = 0; r < hp.order; ++r) {
      const int k = span - hp.order + 1 + r;
      if (vals[r] > 0.0 && state.beta[k] != 0.0) flat = false;
    }
    if (flat) return true;
  }
  return false;
}

ModelState initial_state(const SamplerData& data, const Hyperparameters& hp, Rng& rng) {
  ModelState s;
  s.beta = Eigen::VectorXd::Zero(n_coefficients(s.tree, hp.order));
  const double n = static_cast<double>(data.y.size());
  s.beta0 = n > 0 ? data.y.mean() : 0.0;
  while (static_cast<int>(s.alpha.size()) < hp.h) {
    const double a = sample_alpha_prior(hp, rng);
    bool ok = true;
    for (double o : s.alpha) ok = ok && std::abs(a - o) >= kMinAlphaSeparation;
    if (ok) s.alpha.push_back(a);
  }
  std::sort(s.alpha.begin(), s.alpha.end());
  s.pi = hp.nu / (hp.nu + hp.omega);
  s.lambda = std::max(1.0, 2.0 * hp.lambda_floor);
  const double var = n > 1 ? (data.y.array() - s.beta0).square().sum() / (n - 1.0) : 1.0;
  s.sigma2 = var > 0.0 ? var : 1.0;
  return s;
}

RunResult run_tempered(const Dataset& dataset, const Hyperparameters& hp, const ChainConfig& cfg) {
  hp.validate();
  cfg.validate();
  if (static_cast<int>(dataset.n()) < hp.order + 2)
    throw InsufficientDataError("need at least order + 2 observations");
  const auto t0 = std::chrono::steady_clock::now();
  const SamplerData data = SamplerData::from(dataset);
  const int nt = static_cast<int>(cfg.temperatures.size());

  std::vector<Chain> chains;
  chains.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    Rng init_rng(derive_seed(cfg.seed, 1000 + t));
    ModelState init = initial_state(data, hp, init_rng);
    chains.emplace_back(data, hp, std::move(init), cfg.temperatures[t], derive_seed(cfg.seed, t), cfg);
  }
  Rng swap_rng(derive_seed(cfg.seed, 999));

  RunResult out;
  auto& diag = out.diagnostics;
  diag.temperatures = cfg.temperatures;
  diag.swap_tries.assign(std::max(nt - 1, 0), 0);
  diag.swap_accepts.assign(std::max(nt - 1, 0), 0);
  out.draws.reserve(static_cast<std::size_t>((cfg.n_iters - cfg.burn_in) / cfg.thin + 1));

  for (long it = 0; it < cfg.n_iters; ++it) {
    for (auto& c : chains) {
      const long tries0 = c.stats().alpha_tries, acc0 = c.stats().alpha_accepts;
      c.sweep();
      if (it < cfg.burn_in && c.stats().alpha_tries > tries0) {
        const double rate = static_cast<double>(c.stats().alpha_accepts - acc0) /
                            static_cast<double>(c.stats().alpha_tries - tries0);
        c.adapt_alpha(it, rate);
      }
    }
    if (nt > 1) {
      const int i = std::min(static_cast<int>(uniform01(swap_rng) * (nt - 1)), nt - 2);
      ++diag.swap_tries[i];
      const double log_acc = (chains[i].kappa() - chains[i + 1].kappa()) *
                             (chains[i + 1].loglik() - chains[i].loglik());
      if (std::log(uniform01(swap_rng)) < log_acc) {
        ++diag.swap_accepts[i];
        swap_states(chains[i], chains[i + 1]);
      }
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      const Chain& target = chains.back();
      Draw d;
      d.iteration = it;
      d.state = target.state();
      d.loglik = target.loglik();
      d.logpost = log_prior(d.state, hp) + d.loglik;
      d.signature = shape_signature(d.state.alpha);
      d.flat_region = has_flat_region(d.state, hp);
      diag.tree_size_trace.push_back(static_cast<int>(d.state.tree.size()));
      diag.logpost_trace.push_back(d.logpost);
      out.draws.push_back(std::move(d));
    }
  }
  for (const auto& c : chains) {
    diag.per_rung.push_back(c.stats());
    diag.final_alpha_steps.push_back(c.alpha_step());
  }
  diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace lxs
