#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "lxs/errors.hpp"
#include "lxs/shape_infer.hpp"

using namespace lxs;

namespace {

std::vector<Draw> draws_with(const std::vector<std::pair<Signature, int>>& counts) {
  std::vector<Draw> out;
  for (const auto& [s, n] : counts)
    for (int i = 0; i < n; ++i) {
      Draw d;
      d.signature = s;
      out.push_back(d);
    }
  return out;
}

Hyperparameters hp_with_h(int h) {
  Hyperparameters hp;
  hp.h = h;
  return hp;
}

}  // namespace

TEST_SUITE("shape_infer") {
  TEST_CASE("full lattice has prior mass one") {
    for (int h = 0; h <= 5; ++h) {
      const Hyperparameters hp = hp_with_h(h);
      ShapeHypothesis all{all_signatures(h), "all"};
      CHECK(all.signatures.size() == static_cast<std::size_t>((h + 1) * (h + 2) / 2));
      CHECK(std::abs(prior_shape_prob(all, hp) - 1.0) < 1e-12);
    }
  }

  TEST_CASE("all mass inside gives n_in = h with probability one") {
    const AlphaRegionProbs p{0.0, 1.0, 0.0};
    CHECK(signature_prob({0, 1, 0}, p) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(signature_prob({1, 0, 0}, p) == 0.0);
    CHECK(signature_prob({0, 0, 1}, p) == 0.0);

    // bounds squeezed onto the interval
    Hyperparameters hp = hp_with_h(1);
    hp.a = -0.5 - 1e-12;
    hp.b = 0.5 + 1e-12;
    CHECK(prior_shape_prob(parse_hypothesis("extrema(1)", 1, hp.m), hp) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("signature probabilities match prior simulation") {
    // X = [0, 1] with default bounds: a = -1, b = 1 in working units, mean 0.5.
    const Hyperparameters hp = hp_with_h(2);
    const AlphaRegionProbs p = alpha_region_probs(hp);
    std::mt19937_64 eng(2024);
    std::normal_distribution<double> norm(0.5, 1.0);
    auto draw = [&] {
      while (true) {
        const double a = norm(eng);
        if (a >= -1.0 && a <= 1.0) return a;
      }
    };
    std::map<Signature, long> counts;
    const long n = 1000000;
    for (long i = 0; i < n; ++i) {
      const double a1 = draw(), a2 = draw();
      Signature s;
      for (double a : {a1, a2}) (a <= -0.5 ? s.below : a >= 0.5 ? s.above : s.inside)++;
      ++counts[s];
    }
    for (const Signature& s : all_signatures(2)) {
      const double q = signature_prob(s, p);
      const double freq = static_cast<double>(counts[s]) / n;
      const double se = std::sqrt(q * (1.0 - q) / n);
      CAPTURE(s.below);
      CAPTURE(s.inside);
      CHECK(std::abs(freq - q) < 3.0 * se);
    }
  }

  TEST_CASE("equal prior odds give the posterior odds") {
    const Hyperparameters hp = hp_with_h(1);
    const ShapeHypothesis h1{{{1, 0, 0}}, "below"};
    const ShapeHypothesis h2{{{0, 0, 1}}, "above"};
    // below and above are not equally likely a priori, so use a symmetric pair
    Hyperparameters sym = hp;
    sym.alpha_mean = 0.0;
    CHECK(prior_shape_prob(h1, sym) == doctest::Approx(prior_shape_prob(h2, sym)).epsilon(1e-12));
    const auto draws = draws_with({{{1, 0, 0}, 75}, {{0, 0, 1}, 25}, {{0, 1, 0}, 10}});
    const BayesFactorReport r = bayes_factor(draws, h1, h2, sym);
    CHECK(r.n1 == 75);
    CHECK(r.n2 == 25);
    CHECK(r.n_total == 110);
    CHECK(r.bf == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_FALSE(r.lower_bound);
  }

  TEST_CASE("swapping hypotheses inverts the Bayes factor") {
    const Hyperparameters hp = hp_with_h(2);
    const auto draws = draws_with({{{0, 0, 2}, 13}, {{0, 1, 1}, 40}, {{0, 2, 0}, 7}, {{1, 1, 0}, 3}});
    const auto [a, b] = parse_hypotheses("monotone", "non-monotone", 2, hp.m);
    const double ab = bayes_factor(draws, a, b, hp).bf;
    const double ba = bayes_factor(draws, b, a, hp).bf;
    CHECK(ab * ba == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("no draws in the second hypothesis reports a flagged lower bound") {
    const Hyperparameters hp = hp_with_h(2);
    const auto draws = draws_with({{{0, 0, 2}, 30}, {{1, 0, 1}, 20}});
    const BayesFactorReport r = monotonicity_test(draws, Direction::FavorMonotone, hp);
    CHECK(r.lower_bound);
    CHECK(r.n2 == 0);
    CHECK(r.bf == doctest::Approx(50.0 * r.q2 / r.q1));
  }

  TEST_CASE("no draws in either hypothesis is indeterminate") {
    const Hyperparameters hp = hp_with_h(2);
    const auto draws = draws_with({{{0, 1, 1}, 5}});
    const ShapeHypothesis h1{{{0, 2, 0}}, "two"}, h2{{{0, 0, 2}}, "none above"};
    CHECK_THROWS_AS(bayes_factor(draws, h1, h2, hp), IndeterminateError);
  }

  TEST_CASE("signature counts partition the draws") {
    const Hyperparameters hp = hp_with_h(3);
    std::mt19937_64 eng(5);
    std::vector<Draw> draws;
    const auto sigs = all_signatures(3);
    for (int i = 0; i < 500; ++i) {
      Draw d;
      d.signature = sigs[eng() % sigs.size()];
      d.flat_region = eng() % 7 == 0;
      draws.push_back(d);
    }
    const auto [a, b] = parse_hypotheses("extrema(2)", "complement", 3, hp.m);
    const BayesFactorReport r = bayes_factor(draws, a, b, hp);
    long total = 0, flat = 0;
    for (const auto& row : r.by_signature) total += row.count, flat += row.flat;
    CHECK(total == 500);
    CHECK(flat == r.flat_total);
    CHECK(r.n1 + r.n2 == 500);
    CHECK(r.flat1 + r.flat2 == r.flat_total);
  }

  TEST_CASE("hypothesis parsing") {
    const auto mono = parse_hypothesis("monotone", 2, 100.0);
    CHECK(mono.signatures.size() == 3);
    CHECK(parse_hypothesis("has-extrema(1)", 2, 100.0).signatures.size() == 3);
    CHECK(parse_hypothesis("monotone-increasing", 2, 100.0).signatures ==
          std::vector<Signature>{{0, 0, 2}, {2, 0, 0}});
    CHECK(parse_hypothesis("monotone-decreasing", 2, 100.0).signatures == std::vector<Signature>{{1, 0, 1}});
    CHECK(parse_hypothesis("monotone-decreasing", 2, -100.0).signatures.size() == 2);
    CHECK(parse_hypothesis("has-extrema(2)", 2, 100.0).signatures == std::vector<Signature>{{0, 2, 0}});
    CHECK(parse_hypothesis("0:2:0; 1:1:0", 2, 100.0).signatures.size() == 2);
    CHECK_THROWS_AS(parse_hypothesis("0:2:1", 2, 100.0), SpecError);
    CHECK_THROWS_AS(parse_hypothesis("wiggly", 2, 100.0), SpecError);
    CHECK_THROWS_AS(parse_hypotheses("monotone", "monotone", 2, 100.0), SpecError);
    CHECK_THROWS_AS(parse_hypotheses("complement", "complement", 2, 100.0), SpecError);
    CHECK_THROWS_AS(prior_shape_prob(parse_hypothesis("has-extrema(3)", 2, 100.0), hp_with_h(2)),
                    DomainError);
  }

  TEST_CASE("extremum order follows the sign of M and the parity of the signature") {
    CHECK(describe_shape({0, 2, 0}, 100.0) == "max,min");
    CHECK(describe_shape({0, 2, 0}, -100.0) == "min,max");
    CHECK(describe_shape({0, 2, 1}, 100.0) == "min,max");
    CHECK(describe_shape({1, 1, 0}, 100.0) == "min");
    CHECK(describe_shape({0, 0, 2}, 100.0) == "increasing");
    CHECK(describe_shape({0, 0, 1}, 100.0) == "decreasing");
    // H = 3: only (1,2,0) starts with a maximum among the two-extrema signatures
    const auto h = parse_hypothesis("extrema(2,max-first)", 3, 100.0);
    CHECK(h.signatures == std::vector<Signature>{{1, 2, 0}});
  }

  TEST_CASE("derivative sign on the grid matches the described shape") {
    // f'(x) = M prod (x - alpha_h) over a grid inside [-0.5, 0.5]
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const int h = 1 + static_cast<int>(eng() % 3);
      std::vector<double> alpha;
      for (int k = 0; k < h; ++k) alpha.push_back(u(eng));
      const double m = eng() % 2 ? 100.0 : -100.0;
      std::string seen;
      int last = 0, kinds = 0;
      for (int i = 0; i <= 2000; ++i) {
        const double x = -0.5 + i / 2000.0;
        double d = m;
        for (double a : alpha) d *= x - a;
        const int sg = d > 0 ? 1 : d < 0 ? -1 : 0;
        if (sg == 0) continue;
        if (last != 0 && sg != last) {
          seen += std::string(kinds++ ? "," : "") + (last > 0 ? "max" : "min");
        }
        last = sg;
      }
      const Signature s = shape_signature(alpha);
      const std::string want = describe_shape(s, m);
      if (s.inside == 0) {
        CHECK(kinds == 0);
        CHECK(want == (last > 0 ? "increasing" : "decreasing"));
      } else {
        CHECK(seen == want);
      }
    }
  }
}
