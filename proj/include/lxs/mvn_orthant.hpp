#pragma once

// Multivariate normal orthant probabilities P(X > lower), X ~ N(mean, cov),
// by separation of variables over a randomized rank-1 lattice.

#include <Eigen/Dense>

#include "lxs/stats.hpp"

namespace lxs {

inline constexpr int kMaxOrthantDim = 16;

struct OrthantProblem {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd lower;  // entries may be -inf
};

struct OrthantOptions {
  double abs_tol = 1e-4;
  double rel_tol = 0.0;         // stop when error <= rel_tol * estimate, if positive
  int shifts = 12;
  int min_points = 32;          // per shift, first round
  int max_points = 1 << 17;     // per shift
};

struct OrthantResult {
  double estimate = 0.0;
  double error = 0.0;           // standard error over shifts
  double log_estimate = 0.0;    // finite even when estimate underflows
  int points = 0;               // per shift
};

OrthantResult orthant_prob(const OrthantProblem& problem, Rng& rng,
                           const OrthantOptions& options = {});

/// Plain Monte Carlo indicator average; error is the binomial standard error.
OrthantResult mc_oracle(const OrthantProblem& problem, long n_samples, Rng& rng);

/// P(X > h, Y > k) for standard bivariate normal with correlation r.
double bvn_upper(double h, double k, double r);

/// log P(X > h, Y > k); switches to a log-domain 1-D integral when the
/// probability is too small for the closed form to be relatively accurate.
double log_bvn_upper(double h, double k, double r);

/// log P(Z > h) for a standard trivariate normal with correlation matrix r, by
/// conditioning on the most restrictive coordinate. NaN when the conditioning
/// is degenerate (a correlation of +-1).
double log_tvn_upper(const Eigen::Vector3d& h, const Eigen::Matrix3d& r);

/// Validates symmetry, size and finiteness; throws MatrixError.
void check_problem(const OrthantProblem& problem);

}  // namespace lxs
