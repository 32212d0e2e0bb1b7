#pragma once

// Shape hypotheses over change point signatures and Bayes factors estimated
// as posterior odds over prior odds.
//
// A signature (below, inside, above) fixes the curve shape: with sign s of M,
// the derivative at the left end of the interval has sign
// s * (-1)^(inside + above) and flips at each interior change point.

#include <span>
#include <string>
#include <vector>

#include "lxs/model.hpp"
#include "lxs/sampler.hpp"

namespace lxs {

struct ShapeHypothesis {
  std::vector<Signature> signatures;
  std::string label;

  bool contains(const Signature& s) const;
};

/// Every (below, inside, above) with below + inside + above = h.
std::vector<Signature> all_signatures(int h);

/// Kinds of the interior extrema left to right ("max", "min"), or
/// "increasing" / "decreasing" when there are none.
std::string describe_shape(const Signature& s, double m);

/// Parses one hypothesis. Accepted forms:
///   monotone                     inside = 0
///   monotone-increasing          inside = 0, increasing on the interval
///   monotone-decreasing
///   non-monotone                 inside >= 1
///   has-extrema(F)               inside >= F
///   extrema(K) / extrema(K,max-first) / extrema(K,min-first)
///   b:i:a;b:i:a                  explicit signature list
/// Throws SpecError for anything else or for signatures not summing to h.
ShapeHypothesis parse_hypothesis(const std::string& spec, int h, double m);

/// Parses a pair; either side may be "complement" (of the other side).
/// Throws SpecError when the two overlap.
std::pair<ShapeHypothesis, ShapeHypothesis> parse_hypotheses(const std::string& spec1,
                                                              const std::string& spec2, int h,
                                                              double m);

struct AlphaRegionProbs {
  double below = 0.0, inside = 0.0, above = 0.0;
};

/// Prior probability that one change point falls at or below, inside, or at or
/// above the working interval.
AlphaRegionProbs alpha_region_probs(const Hyperparameters& hp);

/// Multinomial probability of a signature given per-alpha region probabilities.
double signature_prob(const Signature& s, const AlphaRegionProbs& p);

/// Prior mass of a hypothesis; throws DomainError when it is empty.
double prior_shape_prob(const ShapeHypothesis& hyp, const Hyperparameters& hp);

struct SignatureCount {
  Signature signature;
  long count = 0;
  long flat = 0;
  double prior = 0.0;
};

struct BayesFactorReport {
  long n1 = 0, n2 = 0, n_total = 0;
  double q1 = 0.0, q2 = 0.0;
  double bf = 0.0;
  bool lower_bound = false;  // n2 was 0 and replaced by 1
  long flat1 = 0, flat2 = 0, flat_total = 0;
  std::vector<SignatureCount> by_signature;
};

/// BF12 = (N1 / N2) * (q2 / q1). Throws IndeterminateError when N1 = N2 = 0
/// and SpecError when the hypotheses overlap.
BayesFactorReport bayes_factor(std::span<const Draw> draws, const ShapeHypothesis& hyp1,
                               const ShapeHypothesis& hyp2, const Hyperparameters& hp);

enum class Direction { FavorMonotone, FavorNonMonotone };

/// {inside = 0} against {inside >= 1}, or the reverse.
BayesFactorReport monotonicity_test(std::span<const Draw> draws, Direction direction,
                                    const Hyperparameters& hp);

}  // namespace lxs
