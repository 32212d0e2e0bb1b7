#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lxs/errors.hpp"
#include "lxs/io.hpp"

using namespace lxs;

namespace {

XyData parse_csv(const std::string& text) {
  std::istringstream in(text);
  return read_xy_csv(in, "mem.csv");
}

std::vector<Draw> prior_draws(const Hyperparameters& hp, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Draw> out;
  for (int i = 0; i < n; ++i) {
    Draw d;
    d.iteration = i;
    d.state = sample_prior_state(hp, rng);
    d.signature = shape_signature(d.state.alpha);
    d.loglik = -1.5 * i;
    d.logpost = -2.5 * i;
    d.flat_region = i % 3 == 0;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("csv reading") {
    const XyData d = parse_csv("\xEF\xBB\xBFx,y\r\n0,1.5\n\n0.5, -2e-1\n1,+3\n");
    CHECK(d.xs == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(d.ys == std::vector<double>{1.5, -0.2, 3.0});
    CHECK(parse_csv("x,y\n").xs.empty());
    CHECK(parse_csv("").xs.empty());
  }

  TEST_CASE("csv errors name the line") {
    auto message = [](const std::string& text) {
      try {
        parse_csv(text);
      } catch (const ParseError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message("a,b\n1,2\n").find("mem.csv:1") != std::string::npos);
    CHECK(message("x,y\n1,2\n3\n").find("mem.csv:3") != std::string::npos);
    CHECK(message("x,y\n1,2,3\n").find("mem.csv:2") != std::string::npos);
    CHECK(message("x,y\n1,nan\n").find("mem.csv:2") != std::string::npos);
    CHECK(message("x,y\n1,2x\n").find("mem.csv:2") != std::string::npos);
    CHECK_THROWS_AS(read_xy_csv_file("/nonexistent/file.csv"), ParseError);
  }

  TEST_CASE("settings") {
    const Settings s = parse_settings(R"({"h": 3, "order": 3, "m": 50, "interval": [0, 2],
        "n_iters": 200, "burn_in": 50, "temperatures": [0.25, 1.0], "seed": 9, "alpha_mean": 0.1})");
    CHECK(s.hp.h == 3);
    CHECK(s.hp.order == 3);
    CHECK(s.hp.m == 50.0);
    CHECK(s.hp.alpha_mean == 0.1);
    REQUIRE(s.interval);
    CHECK(s.interval->second == 2.0);
    CHECK(s.chain.n_iters == 200);
    CHECK(s.chain.temperatures == std::vector<double>{0.25, 1.0});
    CHECK(s.chain.seed == 9);
    CHECK(parse_settings("{}").hp.h == Hyperparameters{}.h);

    CHECK_THROWS_AS(parse_settings(R"({"hh": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_settings(R"({"h": "two"})"), ConfigError);
    CHECK_THROWS_AS(parse_settings(R"({"interval": [1, 0]})"), ConfigError);
    CHECK_THROWS_AS(parse_settings("[1]"), ConfigError);
    CHECK_THROWS_AS(parse_settings("{"), ConfigError);
    CHECK_THROWS_AS(parse_settings(R"({"nu": -1})"), ConfigError);
    CHECK_THROWS_AS(parse_settings(R"({"burn_in": 100, "n_iters": 50})"), ConfigError);
  }

  TEST_CASE("draws round trip") {
    Hyperparameters hp;
    hp.h = 3;
    const WorkingScale scale(2.0, 7.0);
    const auto draws = prior_draws(hp, 40, 4);
    std::ostringstream os;
    write_draws(os, draws, hp, scale);
    std::istringstream in(os.str());
    const auto back = read_draws(in, scale);
    REQUIRE(back.size() == draws.size());
    for (std::size_t i = 0; i < draws.size(); ++i) {
      const ModelState &a = draws[i].state, &b = back[i].state;
      CHECK(back[i].iteration == draws[i].iteration);
      CHECK(a.tree == b.tree);
      CHECK(a.beta0 == b.beta0);
      CHECK(a.beta == b.beta);
      REQUIRE(a.alpha.size() == b.alpha.size());
      for (std::size_t k = 0; k < a.alpha.size(); ++k) CHECK(b.alpha[k] == doctest::Approx(a.alpha[k]).epsilon(1e-13));
      CHECK(a.pi == b.pi);
      CHECK(a.lambda == b.lambda);
      CHECK(a.sigma2 == b.sigma2);
      CHECK(back[i].signature == draws[i].signature);
      CHECK(back[i].flat_region == draws[i].flat_region);
      CHECK(back[i].logpost == draws[i].logpost);
    }
    // change points are written in original units
    std::istringstream first(os.str());
    std::string line;
    std::getline(first, line);
    const auto j = nlohmann::json::parse(line);
    CHECK(j["alpha"][0].get<double>() == doctest::Approx(scale.to_original(draws[0].state.alpha[0])));

    std::istringstream bad("{\"iteration\": 1}\n");
    CHECK_THROWS_AS(read_draws(bad, scale), ParseError);
  }

  TEST_CASE("summary band") {
    Hyperparameters hp;
    const WorkingScale scale(0.0, 10.0);
    const auto draws = prior_draws(hp, 200, 11);
    const Band b = posterior_band(draws, hp, scale, 200);
    REQUIRE(b.x.size() == 200);
    CHECK(b.x.front() == 0.0);
    CHECK(b.x.back() == doctest::Approx(10.0));
    std::vector<double> xw = {scale.to_working(b.x[57])};
    double s = 0.0;
    for (const Draw& d : draws) s += curve_eval(d.state, hp, xw)(0);
    CHECK(b.mean[57] == doctest::Approx(s / 200.0).epsilon(1e-12));
    for (std::size_t i = 0; i < b.x.size(); ++i) {
      CHECK(b.lower[i] <= b.mean[i]);
      CHECK(b.mean[i] <= b.upper[i]);
    }
    std::ostringstream os;
    write_band_csv(os, b);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,mean,lower,upper");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 200);
  }

  TEST_CASE("bayes factor report") {
    Hyperparameters hp;
    const auto draws = prior_draws(hp, 300, 5);
    const auto [h1, h2] = parse_hypotheses("monotone", "complement", hp.h, hp.m);
    const BayesFactorReport r = bayes_factor(draws, h1, h2, hp);
    std::ostringstream os;
    write_bf_report(os, r, h1, h2, hp);
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j["hypothesis1"]["count"].get<long>() + j["hypothesis2"]["count"].get<long>() == 300);
    CHECK(j["bayes_factor"].get<double>() == doctest::Approx(r.bf));
    CHECK(j["hypothesis1"]["prior"].get<double>() == doctest::Approx(r.q1));
    CHECK(j["lower_bound"].get<bool>() == r.lower_bound);
    long tally = 0;
    for (const auto& row : j["by_signature"]) tally += row["count"].get<long>();
    CHECK(tally == 300);
  }
}
