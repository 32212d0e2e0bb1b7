#pragma once

// Posterior sampler: spike/slab Gibbs for the coefficients, random-walk
// Metropolis for the change points, conjugate hyperparameter updates, a
// reversible-jump knot move with the affected coefficients integrated out,
// and parallel tempering over a ladder of likelihood powers.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lxs/bspline.hpp"
#include "lxs/knot_tree.hpp"
#include "lxs/model.hpp"
#include "lxs/mvn_orthant.hpp"
#include "lxs/stats.hpp"

namespace lxs {

std::vector<double> default_ladder();

struct ChainConfig {
  long n_iters = 50000;
  long burn_in = 10000;
  long thin = 1;
  std::vector<double> temperatures = default_ladder();
  double alpha_step = 0.1;     // initial random-walk scale, working units
  double alpha_target = 0.3;   // burn-in adaptation target
  std::uint64_t seed = 1;
  bool use_likelihood = true;  // false samples the prior through the same moves
  OrthantOptions orthant{.abs_tol = 1e-4, .rel_tol = 1e-3, .shifts = 12, .min_points = 32, .max_points = 1 << 12};
  double max_condition = 1e10;  // RJ moves touching worse-conditioned blocks are rejected

  void validate() const;
};

/// Log odds (slab : spike) of one coefficient whose likelihood contributes
/// exp(u * beta - q * beta^2 / 2) after completing the square with the
/// exponential prior, i.e. u = tau * b'r - lambda and q = tau * b'b.
double spike_slab_log_odds(double q, double u, double pi, double lambda);

struct RjMarginal {
  double log_value = 0.0;       // log sum over spike/slab patterns
  std::vector<double> log_terms;  // per pattern, bit i set = coefficient i in the slab
  std::vector<int> informative;   // indices (into the affected block) integrated out
  bool ok = true;
};

/// log of sum_S pi^{|A\S|} ((1-pi) lambda)^{|S|} integral_{beta_S > 0}
///   exp(tau beta_S' X_S' r - tau/2 beta_S' X_S' X_S beta_S - lambda 1'beta_S).
/// Columns with zero norm (or tau = 0) integrate to one and are skipped.
RjMarginal rj_log_marginal(const Eigen::MatrixXd& xa, const Eigen::VectorXd& r, double tau,
                           double pi, double lambda, const ChainConfig& cfg, Rng& rng);

/// Draw from N(mean, cov) truncated to the positive orthant.
Eigen::VectorXd rtmvn_positive(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng);

struct MoveStats {
  long alpha_tries = 0, alpha_accepts = 0;
  long insert_tries = 0, insert_accepts = 0;
  long delete_tries = 0, delete_accepts = 0;
  long rj_failures = 0;
  long lambda_tries = 0, lambda_accepts = 0;
};

/// Data as seen by the sampler: working-unit predictors and responses.
struct SamplerData {
  std::vector<double> xw;
  Eigen::VectorXd y;
  static SamplerData from(const Dataset& d);
};

/// One tempered chain with cached design matrix and residuals.
class Chain {
 public:
  Chain(SamplerData data, Hyperparameters hp, ModelState init, double kappa,
        std::uint64_t seed, ChainConfig cfg = {});

  void gibbs_beta();
  void update_alpha();
  void update_hypers();
  /// Joint move (lambda, beta) -> (lambda', beta * lambda / lambda') with
  /// lambda' from its truncated prior; accepted on the likelihood ratio.
  void rescale_lambda();
  void rj_knot_move();
  /// Full sweep in the order used by run_tempered.
  void sweep();

  /// log p(proposed) - log p(current) pieces of a knot move, without acting on it.
  struct RjEvaluation {
    double log_h = 0.0;
    double log_marginal_big = 0.0, log_marginal_small = 0.0;
    double log_tree_ratio = 0.0, log_proposal_ratio = 0.0;
    bool ok = true;
  };
  RjEvaluation evaluate_move(const MoveProposal& move);

  const ModelState& state() const { return rep_.state; }
  void set_state(ModelState s);
  void set_response(Eigen::VectorXd y);
  const SamplerData& data() const { return data_; }
  const Hyperparameters& hp() const { return hp_; }
  const LxBasis& basis() const { return *rep_.basis; }
  const Eigen::MatrixXd& design() const { return rep_.x; }
  const Eigen::VectorXd& residual() const { return rep_.resid; }

  /// Untempered log-likelihood of the current state (0 when the likelihood is off).
  double loglik() const { return rep_.loglik; }
  double kappa() const { return kappa_; }
  double alpha_step() const { return alpha_step_; }
  void set_alpha_step(double s) { alpha_step_ = s; }
  /// Robbins-Monro step toward the target acceptance; call during burn-in.
  void adapt_alpha(long iteration, double accept_rate);
  const MoveStats& stats() const { return stats_; }
  Rng& rng() { return rng_; }

  friend void swap_states(Chain& a, Chain& b);

 private:
  struct Replica {
    ModelState state;
    std::optional<LxBasis> basis;
    Eigen::MatrixXd x;       // n x (nb + 1), column 0 = 1
    Eigen::VectorXd resid;   // y - x * coef
    double ss = 0.0;
    double loglik = 0.0;
  };

  SamplerData data_;
  Hyperparameters hp_;
  ChainConfig cfg_;
  double kappa_;
  double alpha_step_;
  Rng rng_;
  Replica rep_;
  MoveStats stats_;

  double tau() const;
  Eigen::VectorXd coefficients() const;
  void rebuild();
  void refresh_loglik();
  Eigen::MatrixXd build_design(const LxBasis& basis) const;
};

struct Draw {
  long iteration = 0;
  ModelState state;
  double loglik = 0.0;
  double logpost = 0.0;
  Signature signature;
  bool flat_region = false;
};

struct Diagnostics {
  std::vector<double> temperatures;
  std::vector<MoveStats> per_rung;
  std::vector<long> swap_tries, swap_accepts;  // per adjacent pair (t, t+1)
  std::vector<double> final_alpha_steps;
  std::vector<int> tree_size_trace;            // target chain, every kept draw
  std::vector<double> logpost_trace;
  double seconds = 0.0;
};

struct RunResult {
  std::vector<Draw> draws;
  Diagnostics diagnostics;
};

/// True when every interior change point lies where all order-j B-splines
/// that are nonzero there carry zero weight.
bool has_flat_region(const ModelState& state, const Hyperparameters& hp);

/// Starting state for a chain: root tree, zero slopes, prior change points.
ModelState initial_state(const SamplerData& data, const Hyperparameters& hp, Rng& rng);

RunResult run_tempered(const Dataset& data, const Hyperparameters& hp, const ChainConfig& cfg);

}  // namespace lxs
