#pragma once

// Scalar distribution helpers shared by the model, the sampler and the
// orthant integrator. Everything takes an explicit engine.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace lxs {

using Rng = std::mt19937_64;

/// Independent child seed for stream `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

/// Standard normal CDF.
double norm_cdf(double x);
/// log Phi(x), accurate deep into the lower tail.
double norm_logcdf(double x);
/// Inverse standard normal CDF; p in (0,1).
double norm_quantile(double p);
/// Inverse standard normal CDF from log p; usable far below DBL_MIN.
double norm_quantile_log(double log_p);

inline double norm_logpdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double log_sum_exp(std::span<const double> v);

double uniform01(Rng& rng);
double std_normal(Rng& rng);

/// Draw from N(mean, sd^2) truncated to (0, inf).
double rtruncnorm_positive(double mean, double sd, Rng& rng);
/// Mean of N(mean, sd^2) truncated to (0, inf).
double truncnorm_positive_mean(double mean, double sd);

/// Gamma(shape, rate) truncated to (floor, inf), drawn by inverse CDF.
double rtruncgamma(double shape, double rate, double floor, Rng& rng);
double rgamma(double shape, double rate, Rng& rng);
double rbeta(double a, double b, Rng& rng);

double gamma_logpdf(double x, double shape, double rate);
/// P(X > x) for X ~ Gamma(shape, rate).
double gamma_sf(double x, double shape, double rate);
double beta_logpdf(double x, double a, double b);

/// Log density of N(mean, var) truncated to [lo, hi]; -inf outside.
double truncnorm_logpdf(double x, double mean, double var, double lo, double hi);
/// P(X <= x) for the same truncated normal.
double truncnorm_cdf(double x, double mean, double var, double lo, double hi);
double rtruncnorm(double mean, double var, double lo, double hi, Rng& rng);

/// Nonnegative least squares (Lawson-Hanson active set).
/// Columns listed in `free_cols` are unconstrained.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                     std::span<const int> free_cols = {}, int max_iter = 0);

}  // namespace lxs
