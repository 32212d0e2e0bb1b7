#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lxs/errors.hpp"
#include "lxs/model.hpp"

using namespace lxs;

namespace {

ModelState toy_state() {
  ModelState s;
  s.beta = Eigen::VectorXd{{0.0, 0.7}};
  s.beta0 = 1.3;
  s.alpha = {0.2, -0.3};
  s.pi = 0.15;
  s.lambda = 2.5;
  s.sigma2 = 0.8;
  s.tree = KnotTree{};
  return s;
}

// Textbook densities written out directly.
double normal_pdf(double x, double m, double v) {
  return std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(2 * std::numbers::pi * v);
}
double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Regularized upper incomplete gamma by the lower series.
double upper_gamma_q(double a, double x) {
  double term = 1.0 / std::tgamma(a + 1.0), sum = term;
  for (int n = 1; n < 200; ++n) {
    term *= x / (a + n);
    sum += term;
  }
  return 1.0 - std::pow(x, a) * std::exp(-x) * sum;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("default bounds") {
    CHECK(default_bounds(0.0, 1.0) == std::pair{-0.5, 1.5});
    CHECK(default_bounds(-0.5, 0.5) == std::pair{-1.0, 1.0});
    CHECK(default_bounds(0.0, 2.0) == std::pair{-1.0, 3.0});
    CHECK_THROWS_AS(default_bounds(1.0, 1.0), DomainError);
  }

  TEST_CASE("log prior against an independent density sum") {
    Hyperparameters hp;
    hp.order = 1;  // root-only tree gives two coefficients
    const auto s = toy_state();
    double expect = std::log(0.25);  // tree
    expect += std::log(0.15);         // beta_1 = 0
    expect += std::log(0.85 * 2.5 * std::exp(-2.5 * 0.7));
    expect += std::log(normal_pdf(1.3, 0.0, 100.0));
    expect += std::log(std::pow(0.15, 1.0) * std::pow(0.85, 17.0) / (std::tgamma(2.0) * std::tgamma(18.0) / std::tgamma(20.0)));
    // Gamma(0.2, rate 2) truncated at 1e-5
    const double lam_pdf = std::pow(2.0, 0.2) * std::pow(2.5, -0.8) * std::exp(-5.0) / std::tgamma(0.2);
    expect += std::log(lam_pdf / upper_gamma_q(0.2, 2.0 * 1e-5));
    const double mu = hp.alpha_prior_mean();
    const double z = phi((1.0 - mu)) - phi((-1.0 - mu));
    expect += std::log(normal_pdf(0.2, mu, 1.0) / z) + std::log(normal_pdf(-0.3, mu, 1.0) / z);
    // precision ~ Gamma(1, 1) => sigma^2 density exp(-1/s2) / s2^2
    expect += std::log(std::exp(-1.0 / 0.8) / (0.8 * 0.8));
    CHECK(log_prior(s, hp) == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("invalid states have zero prior mass") {
    Hyperparameters hp;
    hp.order = 1;
    auto s = toy_state();
    s.beta[1] = -0.01;
    CHECK(log_prior(s, hp) == -std::numeric_limits<double>::infinity());
    s = toy_state();
    s.alpha[0] = hp.b + 0.1;
    CHECK(log_prior(s, hp) == -std::numeric_limits<double>::infinity());
    s = toy_state();
    s.alpha[1] = s.alpha[0];
    CHECK(log_prior(s, hp) == -std::numeric_limits<double>::infinity());
    s = toy_state();
    s.beta = Eigen::VectorXd::Zero(3);
    CHECK(log_prior(s, hp) == -std::numeric_limits<double>::infinity());
  }

  TEST_CASE("alpha prior mean") {
    Hyperparameters hp;
    CHECK(hp.alpha_prior_mean() == 0.5);
    hp.alpha_mean = 0.0;
    CHECK(hp.alpha_prior_mean() == 0.0);
  }

  TEST_CASE("log likelihood") {
    Hyperparameters hp;
    ModelState s;
    s.beta = Eigen::VectorXd::Zero(n_coefficients(s.tree, hp.order));
    s.alpha = {0.1, 0.3};
    s.beta0 = 2.0;
    s.sigma2 = 1.0;
    Dataset one({0.5}, {2.0}, std::pair{0.0, 1.0});
    CHECK(log_likelihood(s, one, hp) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-14));

    Eigen::VectorXd y{{1.0, 2.0}}, f{{0.0, 0.5}};
    const double base = gaussian_loglik(y, y, 1.0);
    const double q1 = gaussian_loglik(y, f, 1.0) - base;
    const double q2 = gaussian_loglik(y, y + 2.0 * (f - y), 1.0) - base;
    CHECK(q2 == doctest::Approx(4.0 * q1).epsilon(1e-14));

    s.sigma2 = 0.0;
    CHECK_THROWS_AS(log_likelihood(s, one, hp), DomainError);
  }

  TEST_CASE("log likelihood against a pointwise density sum") {
    Rng rng(3);
    Hyperparameters hp;
    for (int rep = 0; rep < 10; ++rep) {
      const auto s = sample_prior_state(hp, rng);
      std::vector<double> x, y;
      for (int i = 0; i < 30; ++i) {
        x.push_back(uniform01(rng) * 4.0 - 1.0);
        y.push_back(std_normal(rng) * 3.0);
      }
      Dataset d(x, y, std::pair{-1.0, 3.0});
      const auto w = d.working_xs();
      const auto fitted = curve_eval(s, hp, w);
      double expect = 0.0;
      for (int i = 0; i < 30; ++i) {
        const double r = y[i] - fitted[i];
        expect += -0.5 * r * r / s.sigma2 - 0.5 * std::log(2 * std::numbers::pi * s.sigma2);
      }
      CHECK(log_likelihood(s, d, hp) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  TEST_CASE("dataset validation") {
    CHECK_THROWS_AS(Dataset({0.0, 1.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(Dataset({}, {}), InsufficientDataError);
    CHECK_THROWS_AS(Dataset({0.0, 2.0}, {1.0, 1.0}, std::pair{0.0, 1.0}), DomainError);
    Dataset d({2.0, 4.0, 3.0}, {0.0, 0.0, 0.0});
    CHECK(d.working_xs() == std::vector{-0.5, 0.5, 0.0});
  }

  TEST_CASE("shape signature") {
    CHECK(shape_signature(std::vector{-0.4, 0.3}) == Signature{0, 2, 0});
    CHECK(shape_signature(std::vector{-0.6, 0.7}) == Signature{1, 0, 1});
    CHECK(shape_signature(std::vector{-0.5, 0.5}) == Signature{1, 0, 1});
  }

  TEST_CASE("constant and linear curves") {
    Hyperparameters hp;
    Rng rng(5);
    auto s = sample_prior_state(hp, rng);
    s.beta.setZero();
    s.beta0 = 3.0;
    const std::vector<double> xs{-0.5, -0.1, 0.2, 0.5};
    CHECK((curve_eval(s, hp, xs).array() == 3.0).all());

    auto a = sample_prior_state(hp, rng);
    auto b = a;
    b.beta0 = -1.7;
    for (Eigen::Index k = 0; k < b.beta.size(); ++k) b.beta[k] = uniform01(rng);
    auto sum = a;
    sum.beta0 = 2.0 * a.beta0 + 3.0 * b.beta0;
    sum.beta = 2.0 * a.beta + 3.0 * b.beta;
    const Eigen::VectorXd lhs = curve_eval(sum, hp, xs);
    const Eigen::VectorXd rhs = 2.0 * curve_eval(a, hp, xs) + 3.0 * curve_eval(b, hp, xs);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }

  TEST_CASE("prior draws satisfy every invariant and the spike rate") {
    Hyperparameters hp;
    Rng rng(6);
    long zeros = 0, total = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto s = sample_prior_state(hp, rng);
      REQUIRE(state_is_valid(s, hp));
      REQUIRE(std::isfinite(log_prior(s, hp)));
      zeros += (s.beta.array() == 0.0).count();
      total += s.beta.size();
    }
    const double rate = double(zeros) / double(total);
    CHECK(std::abs(rate - 0.1) < 3.0 * std::sqrt(0.09 / double(total)));
  }

  TEST_CASE("hyperparameter validation") {
    Hyperparameters hp;
    CHECK_NOTHROW(hp.validate());
    hp.m = 0.0;
    CHECK_THROWS_AS(hp.validate(), ConfigError);
    hp = Hyperparameters{};
    hp.order = 7;
    CHECK_THROWS_AS(hp.validate(), ConfigError);
    hp = Hyperparameters{};
    hp.a = -0.2;
    CHECK_THROWS_AS(hp.validate(), ConfigError);
  }
}
