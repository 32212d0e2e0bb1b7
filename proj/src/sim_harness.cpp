#include "lxs/sim_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <regex>

#include "lxs/errors.hpp"
#include "lxs/shape_infer.hpp"
#include "lxs/stats.hpp"

namespace lxs {

namespace {

constexpr double kPi = std::numbers::pi;

double g5(double x) { return 1.0 + 2.0 * x - 1.56 * std::exp(-50.0 * (x - 0.5) * (x - 0.5)); }

const std::map<std::string, std::function<double(double)>>& table() {
  static const std::map<std::string, std::function<double(double)>> t = {
      {"f1", [](double x) { return 10.0 * x * x; }},
      {"f2", [](double x) { return 2.0 + 20.0 * norm_cdf((x - 0.5) / 0.071); }},
      {"f3", [](double x) { return 5.0 * std::cos(kPi * x); }},
      {"f4", [](double x) { return 10.0 * (x - 0.5) * (x - 0.5); }},
      {"f5", [](double x) { return -2.5 + 10.0 * std::exp(-50.0 * (x - 0.35) * (x - 0.35)); }},
      {"f6", [](double x) { return 1.0 + 2.5 * std::sin(2.0 * kPi * (x + 8.0)) + 10.0 * x; }},
      {"f7", [](double x) { return 5.0 * std::sin(2.0 * kPi * x) / std::pow(x + 0.75, 3) - 2.5 * (x + 10.5); }},
      {"g1", [](double x) { return 2.0 + 0.5 * x + norm_cdf((x - 0.5) / 0.071); }},
      {"g2", [](double x) { return 0.5 * std::sin(2.0 * kPi * (x + 8.0)) + 4.75 * x; }},
      {"g3", [](double x) { return 1.0 + 2.25 * x; }},
      {"g4", [](double x) { return -2.0 * (x - 0.75) * (x - 0.75); }},
      {"g5", g5},
      {"g6", [](double x) {
         const double d = x - 0.5;
         return (x < 0.5 ? 15.0 * d * d * d : 0.0) + 0.3 * d - std::exp(-250.0 * (x - 0.25) * (x - 0.25));
       }},
      {"g7", [](double x) { return 0.85 * std::sin(2.0 * kPi * (x + 8.0)) + 4.75 * x; }},
      {"g8", g5},
      {"g9", [](double x) {
         return 5.0 * std::sin(2.0 * kPi * x) / std::pow(x + 0.75, 3) - 2.5 * (x + 10.5) + 2.0;
       }},
  };
  return t;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

double true_function(const std::string& id, double x) {
  const auto it = table().find(id);
  if (it == table().end()) throw LookupError("unknown function '" + id + "'");
  return it->second(x);
}

bool is_true_function(const std::string& id) { return table().contains(id); }

std::vector<std::string> true_function_ids() {
  std::vector<std::string> out;
  for (const auto& [k, v] : table()) out.push_back(k);
  return out;
}

std::pair<std::string, std::string> shape_test_for(const std::string& id) {
  static const std::map<std::string, int> cls = {
      {"f1", 1}, {"f2", 1}, {"f3", 1}, {"f4", 2}, {"f5", 2}, {"f6", 3}, {"f7", 3}, {"g1", 1},
      {"g2", 1}, {"g3", 1}, {"g4", 2}, {"g5", 2}, {"g6", 2}, {"g7", 3}, {"g8", 3}, {"g9", 3}};
  const auto it = cls.find(id);
  if (it == cls.end()) throw LookupError("unknown function '" + id + "'");
  switch (it->second) {
    case 1: return {"monotone-increasing", "complement"};
    case 2: return {"non-monotone", "monotone"};
    default: return {"extrema(2,max-first)", "complement"};
  }
}

double imse(std::span<const double> fitted, std::span<const double> truth) {
  if (fitted.size() != truth.size()) throw DomainError("fitted and truth lengths differ");
  if (fitted.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < fitted.size(); ++i) s += (fitted[i] - truth[i]) * (fitted[i] - truth[i]);
  return s / static_cast<double>(fitted.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DomainError("scores and labels lengths differ");
  // rank-sum form with average ranks for ties
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  double n_pos = 0.0, n_neg = 0.0, rank_pos = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      n_pos += 1.0;
      rank_pos += rank[i];
    } else {
      n_neg += 1.0;
    }
  }
  if (n_pos == 0.0 || n_neg == 0.0) throw DomainError("ROC needs both positive and negative labels");
  return (rank_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

Scenario make_scenario(const std::string& id, const Hyperparameters& hp, const ChainConfig& chain,
                       int replicates) {
  std::smatch m;
  if (!std::regex_match(id, m, std::regex(R"(([fg]\d)-(lownoise|highnoise|n(\d+)))")) ||
      !is_true_function(m[1]))
    throw LookupError("unknown scenario '" + id + "'");
  Scenario s;
  s.id = id;
  s.function = m[1];
  if (m[2] == "highnoise") s.sigma2 = 4.0;
  if (m[3].matched) s.n = std::stoi(m[3]);
  if (s.n < 10) throw LookupError("scenario '" + id + "' needs n >= 10");
  s.replicates = replicates;
  s.hp = hp;
  s.chain = chain;
  return s;
}

Dataset simulate_data(const std::string& function, int n, double sigma2, Rng& rng) {
  std::vector<double> x(n), y(n);
  const double sd = std::sqrt(sigma2);
  for (int i = 0; i < n; ++i) {
    x[i] = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    y[i] = true_function(function, x[i]) + sd * std_normal(rng);
  }
  return Dataset(std::move(x), std::move(y), std::pair{0.0, 1.0});
}

Eigen::VectorXd posterior_mean(std::span<const Draw> draws, const Hyperparameters& hp,
                               std::span<const double> xs_working) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(xs_working.size()));
  for (const Draw& d : draws) acc += curve_eval(d.state, hp, xs_working);
  if (!draws.empty()) acc /= static_cast<double>(draws.size());
  return acc;
}

std::vector<ReplicateRecord> run_replicates(const Scenario& sc, Rng& rng) {
  std::vector<ReplicateRecord> out;
  using Test = std::pair<ShapeHypothesis, ShapeHypothesis>;
  auto test = [&](const std::string& a, const std::string& b) {
    return parse_hypotheses(a, b, sc.hp.h, sc.hp.m);
  };
  const auto [alt, null] = shape_test_for(sc.function);
  const Test t_own = test(alt, null);
  if (t_own.first.signatures.empty() || t_own.second.signatures.empty())
    throw DomainError("the shape test for " + sc.function + " is empty at h = " + std::to_string(sc.hp.h));
  const Test t_inc = test("monotone-increasing", "complement");
  const Test t_non = test("non-monotone", "monotone");
  const Test t_two = test("extrema(2,max-first)", "complement");

  for (int r = 0; r < sc.replicates; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    ReplicateRecord rec;
    rec.scenario = sc.id;
    rec.replicate = r;
    rec.seed = rng();
    Rng data_rng(derive_seed(rec.seed, 0));
    const Dataset data = simulate_data(sc.function, sc.n, sc.sigma2, data_rng);
    ChainConfig cfg = sc.chain;
    cfg.seed = derive_seed(rec.seed, 1);
    const RunResult res = run_tempered(data, sc.hp, cfg);

    std::vector<double> grid_x;
    if (sc.grid > 0) {
      for (int i = 0; i < sc.grid; ++i) grid_x.push_back(sc.grid == 1 ? 0.5 : static_cast<double>(i) / (sc.grid - 1));
    } else {
      grid_x = data.xs;
    }
    std::vector<double> wx, truth;
    for (double x : grid_x) {
      wx.push_back(data.scale.to_working(x));
      truth.push_back(true_function(sc.function, x));
    }
    const Eigen::VectorXd fit = posterior_mean(res.draws, sc.hp, wx);
    rec.imse = imse(std::span<const double>(fit.data(), static_cast<std::size_t>(fit.size())), truth);

    auto bf = [&](const Test& t) {
      if (t.first.signatures.empty() || t.second.signatures.empty())
        return std::numeric_limits<double>::quiet_NaN();
      return bayes_factor(res.draws, t.first, t.second, sc.hp).bf;
    };
    const BayesFactorReport own = bayes_factor(res.draws, t_own.first, t_own.second, sc.hp);
    rec.bf = own.bf;
    rec.bf_lower_bound = own.lower_bound;
    rec.bf_increasing = bf(t_inc);
    rec.bf_nonmonotone = bf(t_non);
    rec.bf_two_extrema = bf(t_two);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(rec);
  }
  return out;
}

ReplicateSummary summarize(std::span<const ReplicateRecord> records) {
  ReplicateSummary s;
  s.count = static_cast<int>(records.size());
  std::vector<double> imses, bfs, lbfs, secs;
  for (const auto& r : records) {
    imses.push_back(r.imse);
    bfs.push_back(r.bf);
    lbfs.push_back(std::log10(r.bf));
    secs.push_back(r.seconds);
    s.bf_above_6 += r.bf > 6.0;
  }
  s.mean_imse = mean_of(imses), s.se_imse = se_of(imses);
  s.mean_bf = mean_of(bfs), s.se_bf = se_of(bfs);
  s.mean_log10_bf = mean_of(lbfs), s.se_log10_bf = se_of(lbfs);
  s.mean_seconds = mean_of(secs), s.se_seconds = se_of(secs);
  return s;
}

void write_replicates_csv(std::ostream& os, std::span<const ReplicateRecord> records) {
  const auto old = os.precision(17);
  os << "scenario,replicate,imse,bf,seconds,bf_lower_bound,bf_increasing,bf_nonmonotone,bf_two_extrema,seed\n";
  for (const auto& r : records) {
    os << r.scenario << ',' << r.replicate << ',' << r.imse << ',' << r.bf << ',' << r.seconds << ','
       << (r.bf_lower_bound ? 1 : 0) << ',' << r.bf_increasing << ',' << r.bf_nonmonotone << ','
       << r.bf_two_extrema << ',' << r.seed << '\n';
  }
  os.precision(old);
}

}  // namespace lxs
