#include "lxs/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lxs/errors.hpp"

namespace lxs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::pair<double, double> default_bounds(double lo, double hi) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError("predictor interval must satisfy lo < hi");
  const double half = 0.5 * (hi - lo);
  return {lo - half, hi + half};
}

WorkingScale::WorkingScale(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError("predictor interval must satisfy lo < hi");
}

namespace {

WorkingScale declared_scale(const std::vector<double>& x,
                            const std::optional<std::pair<double, double>>& interval) {
  if (interval) return WorkingScale(interval->first, interval->second);
  if (x.empty()) throw InsufficientDataError("dataset is empty");
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  return WorkingScale(*mn, *mx);
}

}  // namespace

Dataset::Dataset(std::vector<double> x, std::vector<double> y,
                 std::optional<std::pair<double, double>> interval)
    : xs(std::move(x)), ys(std::move(y)), scale(declared_scale(xs, interval)) {
  if (xs.size() != ys.size()) throw DomainError("x and y lengths differ");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw DomainError("non-finite observation at row " + std::to_string(i + 1));
    if (xs[i] < scale.lo() || xs[i] > scale.hi())
      throw DomainError("x at row " + std::to_string(i + 1) + " outside the declared interval");
  }
}

std::vector<double> Dataset::working_xs() const {
  std::vector<double> w(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    w[i] = std::clamp(scale.to_working(xs[i]), kWorkingLo, kWorkingHi);
  return w;
}

double Hyperparameters::alpha_prior_mean() const {
  if (alpha_mean) return *alpha_mean;
  return 0.5 * (b - a) + kWorkingLo;
}

void Hyperparameters::validate() const {
  if (h < 0) throw ConfigError("h must be nonnegative");
  if (order < 1 || order > kMaxOrder) throw ConfigError("order must be in [1, 6]");
  if (!(m != 0.0) || !std::isfinite(m)) throw ConfigError("m must be nonzero");
  for (double v : {nu, omega, delta, kappa, lambda_floor, c, sigma2_shape, sigma2_rate}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("prior parameters must be positive");
  }
  if (!(a < kWorkingLo && b > kWorkingHi))
    throw ConfigError("change point bounds must satisfy a < -0.5 and b > 0.5 (working units)");
}

std::vector<double> working_knots(const KnotTree& tree) {
  auto knots = tree.knot_set();
  for (double& t : knots) t -= 0.5;
  return knots;
}

LxBasis make_basis(const KnotTree& tree, std::vector<double> alpha, const Hyperparameters& hp) {
  return LxBasis(KnotVector(working_knots(tree), hp.order), std::move(alpha), hp.m);
}

bool state_is_valid(const ModelState& state, const Hyperparameters& hp) {
  if (state.beta.size() != n_coefficients(state.tree, hp.order)) return false;
  if ((state.beta.array() < 0.0).any() || !state.beta.allFinite()) return false;
  if (static_cast<int>(state.alpha.size()) != hp.h) return false;
  for (std::size_t i = 0; i < state.alpha.size(); ++i) {
    if (!(state.alpha[i] >= hp.a && state.alpha[i] <= hp.b)) return false;
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(state.alpha[i] - state.alpha[j]) < kMinAlphaSeparation) return false;
  }
  if (!(state.pi > 0.0 && state.pi < 1.0)) return false;
  if (!(state.lambda > hp.lambda_floor) || !std::isfinite(state.lambda)) return false;
  if (!(state.sigma2 > 0.0) || !std::isfinite(state.sigma2)) return false;
  return std::isfinite(state.beta0);
}

double log_prior(const ModelState& state, const Hyperparameters& hp) {
  if (!state_is_valid(state, hp)) return -kInf;
  double lp = log_prior(state.tree);

  const double log_pi = std::log(state.pi), log_1mpi = std::log1p(-state.pi);
  const double log_lam = std::log(state.lambda);
  for (Eigen::Index k = 0; k < state.beta.size(); ++k) {
    const double bk = state.beta[k];
    lp += (bk == 0.0) ? log_pi : log_1mpi + log_lam - state.lambda * bk;
  }

  lp += -0.5 * state.beta0 * state.beta0 / hp.c - 0.5 * std::log(hp.c) - kLogSqrt2Pi;
  lp += beta_logpdf(state.pi, hp.nu, hp.omega);
  lp += gamma_logpdf(state.lambda, hp.delta, hp.kappa) -
        std::log(gamma_sf(hp.lambda_floor, hp.delta, hp.kappa));
  const double mu = hp.alpha_prior_mean();
  for (double a : state.alpha) lp += truncnorm_logpdf(a, mu, 1.0, hp.a, hp.b);
  // Density of sigma^2 when the precision is Gamma(shape, rate).
  lp += gamma_logpdf(1.0 / state.sigma2, hp.sigma2_shape, hp.sigma2_rate) -
        2.0 * std::log(state.sigma2);
  return lp;
}

double gaussian_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("sigma^2 must be positive");
  const double ss = (y - fitted).squaredNorm();
  const double n = static_cast<double>(y.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) - 0.5 * ss / sigma2;
}

Eigen::VectorXd curve_eval(const ModelState& state, const Hyperparameters& hp,
                           std::span<const double> xs_working) {
  const LxBasis basis = make_basis(state.tree, state.alpha, hp);
  const Eigen::MatrixXd x = lx_design_matrix(basis, xs_working);
  Eigen::VectorXd coef(basis.n_columns());
  coef[0] = state.beta0;
  coef.tail(basis.n_basis()) = state.beta;
  return x * coef;
}

double log_likelihood(const ModelState& state, const Dataset& data, const Hyperparameters& hp) {
  if (!(state.sigma2 > 0.0)) throw DomainError("sigma^2 must be positive");
  const auto w = data.working_xs();
  const Eigen::VectorXd fitted = curve_eval(state, hp, w);
  const Eigen::Map<const Eigen::VectorXd> y(data.ys.data(), static_cast<Eigen::Index>(data.ys.size()));
  return gaussian_loglik(y, fitted, state.sigma2);
}

Signature shape_signature(std::span<const double> alpha, double lo, double hi) {
  Signature s;
  for (double a : alpha) {
    if (a <= lo) {
      ++s.below;
    } else if (a >= hi) {
      ++s.above;
    } else {
      ++s.inside;
    }
  }
  return s;
}

double sample_alpha_prior(const Hyperparameters& hp, Rng& rng) {
  return rtruncnorm(hp.alpha_prior_mean(), 1.0, hp.a, hp.b, rng);
}

ModelState sample_prior_state(const Hyperparameters& hp, Rng& rng) {
  ModelState s;
  s.tree = sample_tree_prior(rng);
  s.pi = rbeta(hp.nu, hp.omega, rng);
  s.lambda = rtruncgamma(hp.delta, hp.kappa, hp.lambda_floor, rng);
  const int nb = n_coefficients(s.tree, hp.order);
  s.beta.resize(nb);
  for (int k = 0; k < nb; ++k) {
    s.beta[k] = (uniform01(rng) < s.pi) ? 0.0 : -std::log(uniform01(rng)) / s.lambda;
  }
  s.beta0 = std::sqrt(hp.c) * std_normal(rng);
  s.alpha.clear();
  while (static_cast<int>(s.alpha.size()) < hp.h) {
    const double a = sample_alpha_prior(hp, rng);
    bool ok = true;
    for (double other : s.alpha) ok = ok && std::abs(a - other) >= kMinAlphaSeparation;
    if (ok) s.alpha.push_back(a);
  }
  s.sigma2 = 1.0 / rgamma(hp.sigma2_shape, hp.sigma2_rate, rng);
  return s;
}

}  // namespace lxs
