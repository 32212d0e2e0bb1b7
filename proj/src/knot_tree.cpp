#include "lxs/knot_tree.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "lxs/errors.hpp"

namespace lxs {

double Dyadic::value() const { return std::ldexp(static_cast<double>(num), -level); }

std::string Dyadic::str() const { return std::to_string(num) + "/2^" + std::to_string(level); }

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  const int top = std::max(a.level, b.level);
  const std::uint64_t x = a.num << (top - a.level);
  const std::uint64_t y = b.num << (top - b.level);
  return x <=> y;
}

Dyadic make_label(std::uint64_t num, int level) {
  if (level < 1 || level > kMaxLabelLevel)
    throw LabelError("label level " + std::to_string(level) + " out of range");
  if (num % 2 == 0 || num >= (std::uint64_t{1} << level))
    throw LabelError(std::to_string(num) + "/2^" + std::to_string(level) +
                     " is not a dyadic label in lowest terms inside (0, 1)");
  return Dyadic{num, level};
}

namespace {

std::uint64_t parse_uint(std::string_view s, std::string_view whole) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw LabelError("cannot parse label '" + std::string(whole) + "'");
  return v;
}

}  // namespace

Dyadic Dyadic::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) throw LabelError("label '" + std::string(text) + "' lacks '/'");
  const std::uint64_t num = parse_uint(text.substr(0, slash), text);
  std::string_view den = text.substr(slash + 1);
  int level = 0;
  if (den.starts_with("2^")) {
    level = static_cast<int>(parse_uint(den.substr(2), text));
  } else {
    std::uint64_t d = parse_uint(den, text);
    if (d == 0 || (d & (d - 1)) != 0)
      throw LabelError("label '" + std::string(text) + "' is not dyadic");
    while (d > 1) d >>= 1, ++level;
  }
  return make_label(num, level);
}

std::pair<Dyadic, Dyadic> children(const Dyadic& label) {
  const Dyadic checked = make_label(label.num, label.level);
  if (checked.level + 1 > kMaxLabelLevel) throw LabelError("tree depth limit reached");
  return {Dyadic{2 * checked.num - 1, checked.level + 1}, Dyadic{2 * checked.num + 1, checked.level + 1}};
}

Dyadic parent(const Dyadic& label) {
  if (label.level <= 1) throw LabelError("the root has no parent");
  const std::uint64_t lo = (label.num - 1) / 2, hi = (label.num + 1) / 2;
  return Dyadic{lo % 2 == 1 ? lo : hi, label.level - 1};
}

KnotTree::KnotTree() { nodes_.insert(Dyadic{1, 1}); }

KnotTree KnotTree::from_labels(std::span<const Dyadic> labels) {
  KnotTree tree;
  tree.nodes_.clear();
  for (const auto& l : labels) tree.nodes_.insert(make_label(l.num, l.level));
  if (!tree.nodes_.contains(Dyadic{1, 1})) throw LabelError("tree must contain the root 1/2");
  for (const auto& l : tree.nodes_) {
    if (l.level > 1 && !tree.nodes_.contains(parent(l)))
      throw LabelError("node " + l.str() + " has no parent in the tree");
  }
  return tree;
}

bool KnotTree::has_children(const Dyadic& label) const {
  if (label.level >= kMaxLabelLevel) return false;
  const auto [l, r] = children(label);
  return nodes_.contains(l) || nodes_.contains(r);
}

std::vector<double> KnotTree::knot_set() const {
  std::vector<double> out;
  out.reserve(nodes_.size() + 2);
  out.push_back(0.0);
  for (const auto& l : nodes_) out.push_back(l.value());
  out.push_back(1.0);
  return out;
}

KnotTree KnotTree::inserted(const Dyadic& label) const {
  if (contains(label)) throw LabelError(label.str() + " already present");
  if (!contains(parent(label))) throw LabelError(label.str() + " has no parent in the tree");
  KnotTree out = *this;
  out.nodes_.insert(label);
  return out;
}

KnotTree KnotTree::erased(const Dyadic& label) const {
  if (label == Dyadic{1, 1}) throw LabelError("the root cannot be deleted");
  if (!contains(label)) throw LabelError(label.str() + " not present");
  if (has_children(label)) throw LabelError(label.str() + " has children");
  KnotTree out = *this;
  out.nodes_.erase(label);
  return out;
}

std::vector<std::string> KnotTree::labels() const {
  std::vector<std::string> out;
  for (const auto& l : nodes_) out.push_back(l.str());
  return out;
}

KnotTree KnotTree::from_strings(std::span<const std::string> labels) {
  std::vector<Dyadic> parsed;
  for (const auto& s : labels) parsed.push_back(Dyadic::parse(s));
  return from_labels(parsed);
}

double log_prior(const KnotTree& tree) {
  double lp = 0.0;
  for (const auto& node : tree.nodes()) {
    if (node.level >= kMaxLabelLevel) continue;
    const double p = std::ldexp(1.0, -node.level);  // 0.5^(depth + 1)
    const auto [l, r] = children(node);
    for (const auto& c : {l, r}) lp += tree.contains(c) ? std::log(p) : std::log1p(-p);
  }
  return lp;
}

std::vector<Dyadic> insertion_candidates(const KnotTree& tree) {
  std::set<Dyadic> out;
  for (const auto& node : tree.nodes()) {
    if (node.level >= kMaxLabelLevel) continue;
    const auto [l, r] = children(node);
    if (!tree.contains(l)) out.insert(l);
    if (!tree.contains(r)) out.insert(r);
  }
  return {out.begin(), out.end()};
}

std::vector<Dyadic> deletion_candidates(const KnotTree& tree) {
  std::vector<Dyadic> out;
  for (const auto& node : tree.nodes()) {
    if (node.level > 1 && !tree.has_children(node)) out.push_back(node);
  }
  return out;
}

double proposal_prob(const KnotTree& tree, MoveKind kind) {
  const auto ins = insertion_candidates(tree);
  const auto del = deletion_candidates(tree);
  if (kind == MoveKind::Insert) {
    if (ins.empty()) return 0.0;
    const double p_kind = del.empty() ? 1.0 : 0.5;
    return p_kind / static_cast<double>(ins.size());
  }
  if (del.empty()) return 0.0;
  const double p_kind = ins.empty() ? 1.0 : 0.5;
  return p_kind / static_cast<double>(del.size());
}

MoveProposal propose_move(const KnotTree& tree, Rng& rng) {
  const auto ins = insertion_candidates(tree);
  const auto del = deletion_candidates(tree);
  MoveProposal move;
  if (del.empty() || (!ins.empty() && uniform01(rng) < 0.5)) {
    move.kind = MoveKind::Insert;
    const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(ins.size()));
    move.label = ins[std::min(i, ins.size() - 1)];
  } else {
    move.kind = MoveKind::Delete;
    const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(del.size()));
    move.label = del[std::min(i, del.size() - 1)];
  }
  move.forward_prob = proposal_prob(tree, move.kind);
  const KnotTree next = apply_move(tree, move);
  move.reverse_prob =
      proposal_prob(next, move.kind == MoveKind::Insert ? MoveKind::Delete : MoveKind::Insert);
  return move;
}

KnotTree apply_move(const KnotTree& tree, const MoveProposal& move) {
  return move.kind == MoveKind::Insert ? tree.inserted(move.label) : tree.erased(move.label);
}

KnotTree sample_tree_prior(Rng& rng) {
  std::vector<Dyadic> nodes{Dyadic{1, 1}};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Dyadic node = nodes[i];
    if (node.level >= kMaxLabelLevel) continue;
    const double p = std::ldexp(1.0, -node.level);
    const auto [l, r] = children(node);
    if (uniform01(rng) < p) nodes.push_back(l);
    if (uniform01(rng) < p) nodes.push_back(r);
  }
  return KnotTree::from_labels(nodes);
}

}  // namespace lxs
