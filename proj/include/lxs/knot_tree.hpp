#pragma once

// Binary infill tree over dyadic knot labels. The root 1/2 is always present;
// a node a/2^m has children (2a-1)/2^(m+1) and (2a+1)/2^(m+1), and a node at
// depth N spawns each child independently with probability 0.5^(N+1).

#include <compare>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lxs/stats.hpp"

namespace lxs {

inline constexpr int kMaxLabelLevel = 60;

/// Dyadic rational num / 2^level in lowest terms (num odd, 0 < num < 2^level).
struct Dyadic {
  std::uint64_t num = 1;
  int level = 1;

  double value() const;
  int depth() const { return level - 1; }
  std::string str() const;  // "a/2^m"
  static Dyadic parse(std::string_view text);

  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);
  friend bool operator==(const Dyadic& a, const Dyadic& b) = default;
};

/// Validating constructor; throws LabelError unless num/2^level is in lowest
/// dyadic form inside (0, 1).
Dyadic make_label(std::uint64_t num, int level);

std::pair<Dyadic, Dyadic> children(const Dyadic& label);
/// Parent of a non-root label.
Dyadic parent(const Dyadic& label);

class KnotTree {
 public:
  /// Root-only tree.
  KnotTree();
  /// Throws LabelError if the root is missing or some node lacks its parent.
  static KnotTree from_labels(std::span<const Dyadic> labels);

  bool contains(const Dyadic& label) const { return nodes_.contains(label); }
  bool has_children(const Dyadic& label) const;
  std::size_t size() const { return nodes_.size(); }
  const std::set<Dyadic>& nodes() const { return nodes_; }

  /// Sorted node values with the end knots 0 and 1 added.
  std::vector<double> knot_set() const;

  KnotTree inserted(const Dyadic& label) const;
  KnotTree erased(const Dyadic& label) const;

  std::vector<std::string> labels() const;
  static KnotTree from_strings(std::span<const std::string> labels);

  friend bool operator==(const KnotTree&, const KnotTree&) = default;

 private:
  std::set<Dyadic> nodes_;
};

/// Log prior mass under the depth-decaying branching process.
double log_prior(const KnotTree& tree);

/// Absent children of present nodes, ascending by value.
std::vector<Dyadic> insertion_candidates(const KnotTree& tree);
/// Present childless non-root nodes, ascending by value.
std::vector<Dyadic> deletion_candidates(const KnotTree& tree);

enum class MoveKind { Insert, Delete };

struct MoveProposal {
  MoveKind kind = MoveKind::Insert;
  Dyadic label;
  double forward_prob = 1.0;  // q(current -> proposed)
  double reverse_prob = 1.0;  // q(proposed -> current)
};

/// Probability of proposing `kind` at `label` from `tree`.
double proposal_prob(const KnotTree& tree, MoveKind kind);

MoveProposal propose_move(const KnotTree& tree, Rng& rng);
KnotTree apply_move(const KnotTree& tree, const MoveProposal& move);

/// Direct simulation of the branching process.
KnotTree sample_tree_prior(Rng& rng);

}  // namespace lxs
