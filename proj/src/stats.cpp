#include "lxs/stats.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "lxs/errors.hpp"

namespace lxs {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x6c78u};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double norm_logcdf(double x) {
  if (x > -30.0) return std::log(norm_cdf(x));
  // Asymptotic expansion of the Mills ratio.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
                        105.0 / (x2 * x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - kLogSqrt2Pi + std::log(series);
}

double norm_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double norm_quantile_log(double log_p) {
  if (log_p > -600.0) return norm_quantile(std::exp(log_p));
  // Newton on log Phi(x) = log_p from the leading-order tail solution.
  const double t = -2.0 * log_p;
  double x = -std::sqrt(t - std::log(t) - 2.0 * std::log(std::sqrt(2.0 * std::numbers::pi)));
  for (int it = 0; it < 8; ++it) {
    const double f = norm_logcdf(x) - log_p;
    const double slope = std::exp(norm_logpdf(x) - norm_logcdf(x));
    x -= f / slope;
  }
  return x;
}

double log_sum_exp(std::span<const double> v) {
  double mx = -kInf;
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

double uniform01(Rng& rng) {
  // 53 random bits, never exactly 0.
  double u;
  do {
    u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  } while (u == 0.0);
  return u;
}

double std_normal(Rng& rng) { return norm_quantile(uniform01(rng)); }

double rtruncnorm_positive(double mean, double sd, Rng& rng) {
  const double lo = -mean / sd;  // standardized lower bound
  double z;
  if (lo < 30.0) {
    // Sample the upper tail through the lower tail for precision.
    const double tail = norm_cdf(-lo);
    z = -norm_quantile(uniform01(rng) * tail);
    z = std::max(z, lo);
  } else {
    // Robert (1995) exponential rejection for far tails.
    const double rate = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
    while (true) {
      z = lo - std::log(uniform01(rng)) / rate;
      const double d = z - rate;
      if (uniform01(rng) <= std::exp(-0.5 * d * d)) break;
    }
  }
  double x = mean + sd * z;
  if (!(x > 0.0)) x = std::numeric_limits<double>::min();
  return x;
}

double truncnorm_positive_mean(double mean, double sd) {
  const double lo = -mean / sd;
  return mean + sd * std::exp(norm_logpdf(lo) - norm_logcdf(-lo));
}

double rgamma(double shape, double rate, Rng& rng) {
  std::gamma_distribution<double> g(shape, 1.0 / rate);
  return g(rng);
}

double rtruncgamma(double shape, double rate, double floor, Rng& rng) {
  const double upper_tail = boost::math::gamma_q(shape, rate * floor);
  if (upper_tail <= 0.0) return floor * (1.0 + 1e-12);
  double x;
  do {
    x = boost::math::gamma_q_inv(shape, uniform01(rng) * upper_tail) / rate;
  } while (!(x > floor));
  return x;
}

double rbeta(double a, double b, Rng& rng) {
  const double x = rgamma(a, 1.0, rng);
  const double y = rgamma(b, 1.0, rng);
  double p = x / (x + y);
  if (!(p > 0.0)) p = std::numeric_limits<double>::min();
  if (!(p < 1.0)) p = 1.0 - std::numeric_limits<double>::epsilon();
  return p;
}

double gamma_logpdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return -kInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double gamma_sf(double x, double shape, double rate) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(shape, rate * x);
}

double beta_logpdf(double x, double a, double b) {
  if (!(x > 0.0 && x < 1.0)) return -kInf;
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

double truncnorm_logpdf(double x, double mean, double var, double lo, double hi) {
  if (x < lo || x > hi) return -kInf;
  const double sd = std::sqrt(var);
  const double mass = norm_cdf((hi - mean) / sd) - norm_cdf((lo - mean) / sd);
  return norm_logpdf((x - mean) / sd) - std::log(sd) - std::log(mass);
}

double truncnorm_cdf(double x, double mean, double var, double lo, double hi) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double sd = std::sqrt(var);
  const double flo = norm_cdf((lo - mean) / sd);
  const double fhi = norm_cdf((hi - mean) / sd);
  return (norm_cdf((x - mean) / sd) - flo) / (fhi - flo);
}

double rtruncnorm(double mean, double var, double lo, double hi, Rng& rng) {
  const double sd = std::sqrt(var);
  const double flo = norm_cdf((lo - mean) / sd);
  const double fhi = norm_cdf((hi - mean) / sd);
  const double u = flo + uniform01(rng) * (fhi - flo);
  return std::clamp(mean + sd * norm_quantile(u), lo, hi);
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                     std::span<const int> free_cols, int max_iter) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() != b.size()) throw DomainError("nnls: dimension mismatch");
  if (max_iter <= 0) max_iter = 30 * n + 100;

  std::vector<char> passive(n, 0), is_free(n, 0);
  for (int c : free_cols) is_free[c] = passive[c] = 1;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

  auto solve_passive = [&]() {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (passive[i]) idx.push_back(i);
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) ap.col(i) = a.col(idx[i]);
    Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < idx.size(); ++i) z[idx[i]] = zp[i];
    return z;
  };

  if (!free_cols.empty()) x = solve_passive();
  const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());

  for (int iter = 0; iter < max_iter; ++iter) {
    Eigen::VectorXd w = a.transpose() * (b - a * x);
    int best = -1;
    double best_w = tol;
    for (int i = 0; i < n; ++i)
      if (!passive[i] && w[i] > best_w) best_w = w[i], best = i;
    if (best < 0) break;
    passive[best] = 1;

    while (true) {
      Eigen::VectorXd z = solve_passive();
      double step = 1.0;
      bool feasible = true;
      for (int i = 0; i < n; ++i) {
        if (passive[i] && !is_free[i] && z[i] <= 0.0) {
          feasible = false;
          const double denom = x[i] - z[i];
          if (denom > 0.0) step = std::min(step, x[i] / denom);
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      x += step * (z - x);
      for (int i = 0; i < n; ++i) {
        if (passive[i] && !is_free[i] && x[i] <= 1e-14) {
          passive[i] = 0;
          x[i] = 0.0;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (!is_free[i]) x[i] = std::max(0.0, x[i]);
  return x;
}

}  // namespace lxs
