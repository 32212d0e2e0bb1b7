#pragma once

// Simulation study: the f1..f7 curve-fitting and g1..g9 shape-testing truth
// functions, replicate orchestration, IMSE and ROC summaries.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lxs/model.hpp"
#include "lxs/sampler.hpp"

namespace lxs {

/// Value of a named truth function ("f1".."f7", "g1".."g9") on [0, 1].
/// Throws LookupError for an unknown id.
double true_function(const std::string& id, double x);
bool is_true_function(const std::string& id);
std::vector<std::string> true_function_ids();

/// Shape class a truth function belongs to, as a pair of hypothesis specs
/// (alternative, null): increasing vs rest, non-monotone vs monotone, or two
/// extrema max-first vs rest.
std::pair<std::string, std::string> shape_test_for(const std::string& id);

/// Mean squared difference; throws DomainError on a length mismatch.
double imse(std::span<const double> fitted, std::span<const double> truth);

/// Mann-Whitney area under the ROC curve, ties counted one half.
/// Throws DomainError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct Scenario {
  std::string id;
  std::string function;
  int n = 100;
  double sigma2 = 1.0;
  int replicates = 10;
  int grid = 0;  // IMSE points; 0 = the design points
  Hyperparameters hp;
  ChainConfig chain;
};

/// Scenario ids: "<fn>-lownoise" (sigma^2 = 1, n = 100), "<fn>-highnoise"
/// (sigma^2 = 4, n = 100) and "<fn>-n<N>" (sigma^2 = 1, n = N).
Scenario make_scenario(const std::string& id, const Hyperparameters& hp, const ChainConfig& chain,
                       int replicates = 10);

/// y_i = f(x_i) + N(0, sigma^2) on n equidistant points of [0, 1].
Dataset simulate_data(const std::string& function, int n, double sigma2, Rng& rng);

/// Pointwise posterior mean of the curve at working-unit points.
Eigen::VectorXd posterior_mean(std::span<const Draw> draws, const Hyperparameters& hp,
                               std::span<const double> xs_working);

struct ReplicateRecord {
  std::string scenario;
  int replicate = 0;
  double imse = 0.0;
  double bf = 0.0;  // the test matching the function's true shape class
  bool bf_lower_bound = false;
  double bf_increasing = 0.0, bf_nonmonotone = 0.0, bf_two_extrema = 0.0;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

/// One record per replicate; replicate r uses data and sampler seeds derived
/// from a seed drawn from `rng`, so records depend only on the rng state.
std::vector<ReplicateRecord> run_replicates(const Scenario& scenario, Rng& rng);

struct ReplicateSummary {
  int count = 0;
  double mean_imse = 0.0, se_imse = 0.0;
  double mean_bf = 0.0, se_bf = 0.0;
  double mean_log10_bf = 0.0, se_log10_bf = 0.0;
  double mean_seconds = 0.0, se_seconds = 0.0;
  int bf_above_6 = 0;
};

ReplicateSummary summarize(std::span<const ReplicateRecord> records);

void write_replicates_csv(std::ostream& os, std::span<const ReplicateRecord> records);

}  // namespace lxs
