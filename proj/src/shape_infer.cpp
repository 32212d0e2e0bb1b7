#include "lxs/shape_infer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <sstream>

#include "lxs/errors.hpp"
#include "lxs/stats.hpp"

namespace lxs {

bool ShapeHypothesis::contains(const Signature& s) const {
  return std::find(signatures.begin(), signatures.end(), s) != signatures.end();
}

std::vector<Signature> all_signatures(int h) {
  std::vector<Signature> out;
  for (int b = 0; b <= h; ++b)
    for (int i = 0; b + i <= h; ++i) out.push_back({b, i, h - b - i});
  return out;
}

std::string describe_shape(const Signature& s, double m) {
  bool up = (m > 0.0) == ((s.inside + s.above) % 2 == 0);
  if (s.inside == 0) return up ? "increasing" : "decreasing";
  std::string out;
  for (int k = 0; k < s.inside; ++k) {
    if (k) out += ",";
    out += up ? "max" : "min";
    up = !up;
  }
  return out;
}

namespace {

ShapeHypothesis filtered(int h, const std::string& label, auto keep) {
  ShapeHypothesis out;
  out.label = label;
  for (const Signature& s : all_signatures(h))
    if (keep(s)) out.signatures.push_back(s);
  return out;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

ShapeHypothesis parse_hypothesis(const std::string& raw, int h, double m) {
  const std::string spec = trim(raw);
  std::smatch mt;
  if (spec == "monotone") return filtered(h, spec, [](const Signature& s) { return s.inside == 0; });
  if (spec == "monotone-increasing" || spec == "monotone-decreasing") {
    const std::string want = spec.substr(9);
    return filtered(h, spec, [&](const Signature& s) { return s.inside == 0 && describe_shape(s, m) == want; });
  }
  if (spec == "non-monotone")
    return filtered(h, spec, [](const Signature& s) { return s.inside >= 1; });
  if (std::regex_match(spec, mt, std::regex(R"(has-extrema\((\d+)\))"))) {
    const int f = std::stoi(mt[1]);
    return filtered(h, spec, [f](const Signature& s) { return s.inside >= f; });
  }
  if (std::regex_match(spec, mt, std::regex(R"(extrema\((\d+)(?:,\s*(max-first|min-first))?\))"))) {
    const int k = std::stoi(mt[1]);
    const std::string order = mt[2];
    return filtered(h, spec, [&](const Signature& s) {
      if (s.inside != k) return false;
      if (order.empty() || k == 0) return order.empty();
      return describe_shape(s, m).starts_with(order == "max-first" ? "max" : "min");
    });
  }
  if (std::regex_match(spec, std::regex(R"(\d+:\d+:\d+(\s*;\s*\d+:\d+:\d+)*)"))) {
    ShapeHypothesis out;
    out.label = spec;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ';')) {
      Signature s;
      char c1, c2;
      std::stringstream(trim(item)) >> s.below >> c1 >> s.inside >> c2 >> s.above;
      if (s.below + s.inside + s.above != h)
        throw SpecError("signature " + trim(item) + " does not sum to h = " + std::to_string(h));
      if (!out.contains(s)) out.signatures.push_back(s);
    }
    return out;
  }
  throw SpecError("unrecognised hypothesis '" + spec + "'");
}

std::pair<ShapeHypothesis, ShapeHypothesis> parse_hypotheses(const std::string& spec1,
                                                              const std::string& spec2, int h,
                                                              double m) {
  const bool c1 = trim(spec1) == "complement", c2 = trim(spec2) == "complement";
  if (c1 && c2) throw SpecError("both hypotheses are 'complement'");
  auto complement = [h](const ShapeHypothesis& other) {
    return filtered(h, "complement of " + other.label,
                    [&](const Signature& s) { return !other.contains(s); });
  };
  ShapeHypothesis a, b;
  if (c1) {
    b = parse_hypothesis(spec2, h, m);
    a = complement(b);
  } else {
    a = parse_hypothesis(spec1, h, m);
    b = c2 ? complement(a) : parse_hypothesis(spec2, h, m);
  }
  for (const Signature& s : a.signatures)
    if (b.contains(s)) throw SpecError("hypotheses '" + a.label + "' and '" + b.label + "' overlap");
  return {a, b};
}

AlphaRegionProbs alpha_region_probs(const Hyperparameters& hp) {
  const double mu = hp.alpha_prior_mean();
  AlphaRegionProbs p;
  p.below = truncnorm_cdf(kWorkingLo, mu, 1.0, hp.a, hp.b);
  p.above = 1.0 - truncnorm_cdf(kWorkingHi, mu, 1.0, hp.a, hp.b);
  p.inside = std::max(0.0, 1.0 - p.below - p.above);
  return p;
}

double signature_prob(const Signature& s, const AlphaRegionProbs& p) {
  auto term = [](double prob, int k) { return k == 0 ? 0.0 : k * std::log(prob); };
  const int h = s.below + s.inside + s.above;
  const double log_coef = std::lgamma(h + 1.0) - std::lgamma(s.below + 1.0) -
                          std::lgamma(s.inside + 1.0) - std::lgamma(s.above + 1.0);
  return std::exp(log_coef + term(p.below, s.below) + term(p.inside, s.inside) +
                  term(p.above, s.above));
}

double prior_shape_prob(const ShapeHypothesis& hyp, const Hyperparameters& hp) {
  if (hyp.signatures.empty()) throw DomainError("hypothesis '" + hyp.label + "' is empty");
  const AlphaRegionProbs p = alpha_region_probs(hp);
  double q = 0.0;
  for (const Signature& s : hyp.signatures) q += signature_prob(s, p);
  return q;
}

BayesFactorReport bayes_factor(std::span<const Draw> draws, const ShapeHypothesis& hyp1,
                               const ShapeHypothesis& hyp2, const Hyperparameters& hp) {
  for (const Signature& s : hyp1.signatures)
    if (hyp2.contains(s)) throw SpecError("hypotheses overlap");
  BayesFactorReport r;
  r.q1 = prior_shape_prob(hyp1, hp);
  r.q2 = prior_shape_prob(hyp2, hp);

  const AlphaRegionProbs p = alpha_region_probs(hp);
  std::map<Signature, SignatureCount> table;
  for (const Signature& s : all_signatures(hp.h)) table[s] = {s, 0, 0, signature_prob(s, p)};
  for (const Draw& d : draws) {
    auto& row = table[d.signature];
    row.signature = d.signature;
    ++row.count;
    ++r.n_total;
    if (d.flat_region) {
      ++row.flat;
      ++r.flat_total;
    }
    if (hyp1.contains(d.signature)) {
      ++r.n1;
      r.flat1 += d.flat_region;
    } else if (hyp2.contains(d.signature)) {
      ++r.n2;
      r.flat2 += d.flat_region;
    }
  }
  for (auto& [s, row] : table) r.by_signature.push_back(row);

  if (r.n1 == 0 && r.n2 == 0)
    throw IndeterminateError("no draws fall in either hypothesis");
  const double n2 = r.n2 == 0 ? 1.0 : static_cast<double>(r.n2);
  r.lower_bound = r.n2 == 0;
  r.bf = (static_cast<double>(r.n1) / n2) * (r.q2 / r.q1);
  return r;
}

BayesFactorReport monotonicity_test(std::span<const Draw> draws, Direction direction,
                                    const Hyperparameters& hp) {
  const ShapeHypothesis mono = parse_hypothesis("monotone", hp.h, hp.m);
  const ShapeHypothesis non = parse_hypothesis("non-monotone", hp.h, hp.m);
  return direction == Direction::FavorMonotone ? bayes_factor(draws, mono, non, hp)
                                               : bayes_factor(draws, non, mono, hp);
}

}  // namespace lxs
