#pragma once

// Parameter state, priors, likelihood and curve evaluation.
//
// Predictors are mapped affinely from the declared interval [lo, hi] onto the
// working interval [-0.5, 0.5]; knot labels in [0, 1] map to label - 0.5.
// Change points, a and b are stored in working units.

#include <compare>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lxs/bspline.hpp"
#include "lxs/knot_tree.hpp"
#include "lxs/stats.hpp"

namespace lxs {

inline constexpr double kWorkingLo = -0.5;
inline constexpr double kWorkingHi = 0.5;

/// a = inf X - D, b = sup X + D with D = (sup X - inf X) / 2.
std::pair<double, double> default_bounds(double lo, double hi);

class WorkingScale {
 public:
  WorkingScale(double lo, double hi);
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double to_working(double x) const { return (x - lo_) / (hi_ - lo_) - 0.5; }
  double to_original(double w) const { return lo_ + (w + 0.5) * (hi_ - lo_); }

 private:
  double lo_, hi_;
};

struct Dataset {
  std::vector<double> xs;  // original units
  std::vector<double> ys;
  WorkingScale scale;

  /// Declared interval defaults to [min x, max x].
  Dataset(std::vector<double> x, std::vector<double> y,
          std::optional<std::pair<double, double>> interval = std::nullopt);

  std::size_t n() const { return xs.size(); }
  std::vector<double> working_xs() const;
};

struct Hyperparameters {
  int h = 2;           // maximum number of interior extrema
  int order = 2;       // B-spline order
  double m = 100.0;    // signed scale
  double nu = 2.0, omega = 18.0;   // Beta prior on pi
  double delta = 0.2, kappa = 2.0; // Gamma prior on lambda
  double lambda_floor = 1e-5;
  double c = 100.0;                // intercept prior variance
  double sigma2_shape = 1.0, sigma2_rate = 1.0;  // Gamma prior on 1/sigma^2
  double a = -1.0, b = 1.0;        // change point bounds, working units
  std::optional<double> alpha_mean;  // override for the change point prior mean

  /// (b - a) / 2 read on the [0, 1]-normalised axis, in working units.
  double alpha_prior_mean() const;
  void validate() const;
};

struct ModelState {
  KnotTree tree;
  double beta0 = 0.0;
  Eigen::VectorXd beta;       // length n_coefficients(tree, order); zeros allowed
  std::vector<double> alpha;  // working units
  double pi = 0.1;
  double lambda = 1.0;
  double sigma2 = 1.0;
};

/// Number of non-intercept coefficients for a tree.
inline int n_coefficients(const KnotTree& tree, int order) {
  return static_cast<int>(tree.size()) + order;
}

/// Tree knots in working units.
std::vector<double> working_knots(const KnotTree& tree);
LxBasis make_basis(const KnotTree& tree, std::vector<double> alpha, const Hyperparameters& hp);

/// Full log prior; -inf for any invariant violation.
double log_prior(const ModelState& state, const Hyperparameters& hp);

/// Gaussian log likelihood given fitted values.
double gaussian_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& fitted, double sigma2);
double log_likelihood(const ModelState& state, const Dataset& data, const Hyperparameters& hp);

/// beta0 + sum_k beta_k B*_k(x) at working-unit points.
Eigen::VectorXd curve_eval(const ModelState& state, const Hyperparameters& hp,
                           std::span<const double> xs_working);

struct Signature {
  int below = 0, inside = 0, above = 0;
  friend auto operator<=>(const Signature&, const Signature&) = default;
};

/// Counts of change points at or below lo, strictly inside, at or above hi.
Signature shape_signature(std::span<const double> alpha, double lo = kWorkingLo,
                          double hi = kWorkingHi);

/// True when every ModelState invariant holds.
bool state_is_valid(const ModelState& state, const Hyperparameters& hp);

/// One draw from the joint prior.
ModelState sample_prior_state(const Hyperparameters& hp, Rng& rng);

/// Draw alpha_h from its truncated normal prior.
double sample_alpha_prior(const Hyperparameters& hp, Rng& rng);

}  // namespace lxs
