#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lxs/errors.hpp"
#include "lxs/sim_harness.hpp"

using namespace lxs;

namespace {

// Sign pattern of central differences on a fine grid: +1 / -1 runs, merged.
std::vector<int> slope_runs(const std::string& id) {
  std::vector<int> runs;
  const int n = 20000;
  const double h = 1e-6;
  for (int i = 1; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double d = true_function(id, x + h) - true_function(id, x - h);
    const int s = d > 0 ? 1 : d < 0 ? -1 : 0;
    if (s != 0 && (runs.empty() || runs.back() != s)) runs.push_back(s);
  }
  return runs;
}

ChainConfig tiny_chain() {
  ChainConfig c;
  c.n_iters = 60;
  c.burn_in = 20;
  c.temperatures = {0.5, 1.0};
  return c;
}

}  // namespace

TEST_SUITE("sim_harness") {
  TEST_CASE("truth function values") {
    CHECK(true_function("f1", 1.0) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(true_function("f4", 0.5) == 0.0);
    CHECK(true_function("f2", 0.5) == doctest::Approx(12.0).epsilon(1e-15));
    CHECK(true_function("g8", 0.3) == true_function("g5", 0.3));
    CHECK(true_function("g9", 0.3) == doctest::Approx(true_function("f7", 0.3) + 2.0).epsilon(1e-15));
    CHECK(true_function("g3", 0.0) == 1.0);
    CHECK_THROWS_AS(true_function("f8", 0.5), LookupError);
    CHECK(true_function_ids().size() == 16);
  }

  TEST_CASE("truth functions have the stated number of extrema") {
    for (const char* id : {"f1", "f2", "g1", "g2", "g3"}) {
      CAPTURE(id);
      CHECK(slope_runs(id) == std::vector<int>{1});
    }
    CHECK(slope_runs("f3") == std::vector<int>{-1});
    CHECK(slope_runs("f4") == std::vector<int>{-1, 1});
    CHECK(slope_runs("f5") == std::vector<int>{1, -1});
    CHECK(slope_runs("g4") == std::vector<int>{1, -1});
    for (const char* id : {"f6", "f7", "g5", "g6", "g7", "g8", "g9"}) {
      CAPTURE(id);
      // max then min
      CHECK(slope_runs(id) == std::vector<int>{1, -1, 1});
    }
  }

  TEST_CASE("imse") {
    const std::vector<double> t = {1.0, 2.0, 3.0};
    CHECK(imse(t, t) == 0.0);
    CHECK(imse(std::vector<double>{2.0, 3.0, 4.0}, t) == doctest::Approx(1.0));
    CHECK_THROWS_AS(imse(std::vector<double>{1.0}, t), DomainError);
  }

  TEST_CASE("roc auc") {
    CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}) == 1.0);
    CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{1, 0, 1, 0}) == 0.5);
    CHECK(roc_auc(std::vector<double>{0.9, 0.7, 0.8, 0.1}, std::vector<int>{1, 1, 0, 0}) ==
          doctest::Approx(0.75));
    // brute-force pair count
    const std::vector<double> s = {0.3, 0.1, 0.4, 0.4, 0.9, 0.2, 0.4};
    const std::vector<int> l = {1, 0, 1, 0, 1, 0, 0};
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j)
        if (l[i] && !l[j]) {
          pairs += 1.0;
          wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    CHECK(roc_auc(s, l) == doctest::Approx(wins / pairs).epsilon(1e-14));
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DomainError);
  }

  TEST_CASE("scenario ids") {
    const Scenario a = make_scenario("f4-lownoise", {}, {});
    CHECK(a.function == "f4");
    CHECK(a.sigma2 == 1.0);
    CHECK(a.n == 100);
    CHECK(a.replicates == 10);
    CHECK(make_scenario("f2-highnoise", {}, {}).sigma2 == 4.0);
    const Scenario g = make_scenario("g7-n300", {}, {});
    CHECK(g.n == 300);
    CHECK(g.sigma2 == 1.0);
    CHECK_THROWS_AS(make_scenario("f9-lownoise", {}, {}), LookupError);
    CHECK_THROWS_AS(make_scenario("f4", {}, {}), LookupError);
    CHECK_THROWS_AS(make_scenario("g7-n5", {}, {}), LookupError);
  }

  TEST_CASE("simulated data are the truth plus noise of the stated variance") {
    Rng rng(3);
    const Dataset d = simulate_data("f4", 20000, 4.0, rng);
    double s = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) {
      const double e = d.ys[i] - true_function("f4", d.xs[i]);
      s += e, ss += e * e;
    }
    const double n = static_cast<double>(d.n());
    CHECK(std::abs(s / n) < 3.0 * 2.0 / std::sqrt(n));
    CHECK(std::abs(ss / n - 4.0) < 3.0 * 4.0 * std::sqrt(2.0 / n));
    CHECK(d.xs.front() == 0.0);
    CHECK(d.xs.back() == 1.0);
  }

  TEST_CASE("zero replicates give no records") {
    Scenario sc = make_scenario("f4-lownoise", {}, tiny_chain(), 0);
    Rng rng(1);
    CHECK(run_replicates(sc, rng).empty());
  }

  TEST_CASE("identical seeds give identical records") {
    Scenario sc = make_scenario("g7-n30", {}, tiny_chain(), 2);
    Rng r1(17), r2(17);
    const auto a = run_replicates(sc, r1);
    const auto b = run_replicates(sc, r2);
    REQUIRE(a.size() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].imse == b[i].imse);
      CHECK(a[i].bf == b[i].bf);
      CHECK(a[i].bf_increasing == b[i].bf_increasing);
      CHECK(a[i].seed == b[i].seed);
      CHECK(a[i].bf == a[i].bf_two_extrema);
    }
    CHECK(a[0].seed != a[1].seed);
  }

  TEST_CASE("summary means match the per-replicate rows") {
    std::vector<ReplicateRecord> recs(4);
    const double im[] = {0.1, 0.2, 0.4, 0.3}, bf[] = {1.0, 10.0, 100.0, 7.0};
    for (int i = 0; i < 4; ++i) recs[i].imse = im[i], recs[i].bf = bf[i], recs[i].seconds = i;
    const ReplicateSummary s = summarize(recs);
    CHECK(s.count == 4);
    CHECK(s.mean_imse == doctest::Approx(0.25));
    CHECK(s.mean_bf == doctest::Approx(29.5));
    CHECK(s.mean_log10_bf == doctest::Approx((0.0 + 1.0 + 2.0 + std::log10(7.0)) / 4.0));
    CHECK(s.bf_above_6 == 3);
    const double var = ((0.15 * 0.15) + (0.05 * 0.05) + (0.15 * 0.15) + (0.05 * 0.05)) / 3.0;
    CHECK(s.se_imse == doctest::Approx(std::sqrt(var / 4.0)));

    std::ostringstream os;
    write_replicates_csv(os, recs);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line.starts_with("scenario,replicate,imse,bf,seconds"));
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 4);
  }
}
