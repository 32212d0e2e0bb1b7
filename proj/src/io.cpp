#include "lxs/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "lxs/errors.hpp"

namespace lxs {

using json = nlohmann::ordered_json;

namespace {

std::string strip(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return std::string(s);
}

bool parse_double(std::string_view text, double& out) {
  const std::string t = strip(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

double type7_quantile(std::vector<double>& v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(v.begin(), v.begin() + lo, v.end());
  const double a = v[lo];
  if (lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + lo + 1, v.end());
  return a + (h - static_cast<double>(lo)) * (b - a);
}

double rate(long accepts, long tries) {
  return tries > 0 ? static_cast<double>(accepts) / static_cast<double>(tries) : 0.0;
}

}  // namespace

XyData read_xy_csv(std::istream& in, const std::string& source) {
  XyData out;
  std::string line;
  long lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const std::string t = strip(line);
    if (t.empty()) continue;
    if (!header) {
      std::string compact;
      for (char c : t)
        if (c != ' ' && c != '\t') compact += c;
      if (compact != "x,y")
        throw ParseError(source + ":" + std::to_string(lineno) + ": expected header \"x,y\"");
      header = true;
      continue;
    }
    const auto comma = t.find(',');
    double x = 0.0, y = 0.0;
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos ||
        !parse_double(std::string_view(t).substr(0, comma), x) ||
        !parse_double(std::string_view(t).substr(comma + 1), y))
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected two numbers, got \"" + t + "\"");
    out.xs.push_back(x);
    out.ys.push_back(y);
  }
  if (!header && lineno > 0) throw ParseError(source + ": missing \"x,y\" header");
  return out;
}

XyData read_xy_csv_file(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_xy_csv(in, path);
}

Settings parse_settings(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  Settings s;
  auto& hp = s.hp;
  auto& ch = s.chain;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "h") hp.h = v.get<int>();
      else if (key == "order") hp.order = v.get<int>();
      else if (key == "m") hp.m = v.get<double>();
      else if (key == "nu") hp.nu = v.get<double>();
      else if (key == "omega") hp.omega = v.get<double>();
      else if (key == "delta") hp.delta = v.get<double>();
      else if (key == "kappa") hp.kappa = v.get<double>();
      else if (key == "lambda_floor") hp.lambda_floor = v.get<double>();
      else if (key == "c") hp.c = v.get<double>();
      else if (key == "sigma2_shape") hp.sigma2_shape = v.get<double>();
      else if (key == "sigma2_rate") hp.sigma2_rate = v.get<double>();
      else if (key == "a") hp.a = v.get<double>();
      else if (key == "b") hp.b = v.get<double>();
      else if (key == "alpha_mean") hp.alpha_mean = v.get<double>();
      else if (key == "interval") {
        const auto iv = v.get<std::vector<double>>();
        if (iv.size() != 2 || !(iv[0] < iv[1])) throw ConfigError("interval must be [lo, hi] with lo < hi");
        s.interval = std::pair{iv[0], iv[1]};
      }
      else if (key == "n_iters") ch.n_iters = v.get<long>();
      else if (key == "burn_in") ch.burn_in = v.get<long>();
      else if (key == "thin") ch.thin = v.get<long>();
      else if (key == "temperatures") ch.temperatures = v.get<std::vector<double>>();
      else if (key == "alpha_step") ch.alpha_step = v.get<double>();
      else if (key == "alpha_target") ch.alpha_target = v.get<double>();
      else if (key == "seed") ch.seed = v.get<std::uint64_t>();
      else if (key == "orthant_abs_tol") ch.orthant.abs_tol = v.get<double>();
      else if (key == "orthant_rel_tol") ch.orthant.rel_tol = v.get<double>();
      else if (key == "orthant_max_points") ch.orthant.max_points = v.get<int>();
      else if (key == "max_condition") ch.max_condition = v.get<double>();
      else if (key == "replicates") s.replicates = v.get<int>();
      else if (key == "imse_grid") s.imse_grid = v.get<int>();
      else throw ConfigError("unknown configuration key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
  }
  if (s.replicates < 0) throw ConfigError("replicates must be nonnegative");
  if (s.imse_grid < 0) throw ConfigError("imse_grid must be nonnegative");
  hp.validate();
  ch.validate();
  return s;
}

Settings load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_settings(ss.str());
}

void write_draws(std::ostream& os, std::span<const Draw> draws, const Hyperparameters& hp,
                 const WorkingScale& scale) {
  for (const Draw& d : draws) {
    const ModelState& s = d.state;
    json alpha = json::array();
    for (double a : s.alpha) alpha.push_back(scale.to_original(a));
    json j = {
        {"iteration", d.iteration},
        {"tree", s.tree.labels()},
        {"beta0", s.beta0},
        {"beta", std::vector<double>(s.beta.data(), s.beta.data() + s.beta.size())},
        {"alpha", alpha},
        {"pi", s.pi},
        {"lambda", s.lambda},
        {"sigma2", s.sigma2},
        {"loglik", d.loglik},
        {"logpost", d.logpost},
        {"signature",
         {{"below", d.signature.below},
          {"inside", d.signature.inside},
          {"above", d.signature.above},
          {"shape", describe_shape(d.signature, hp.m)},
          {"flat_region", d.flat_region}}},
    };
    os << j.dump() << '\n';
  }
}

std::vector<Draw> read_draws(std::istream& in, const WorkingScale& scale) {
  std::vector<Draw> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    try {
      const json j = json::parse(line);
      Draw d;
      d.iteration = j.at("iteration").get<long>();
      const auto labels = j.at("tree").get<std::vector<std::string>>();
      d.state.tree = KnotTree::from_strings(labels);
      d.state.beta0 = j.at("beta0").get<double>();
      const auto beta = j.at("beta").get<std::vector<double>>();
      d.state.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
      for (double a : j.at("alpha").get<std::vector<double>>()) d.state.alpha.push_back(scale.to_working(a));
      d.state.pi = j.at("pi").get<double>();
      d.state.lambda = j.at("lambda").get<double>();
      d.state.sigma2 = j.at("sigma2").get<double>();
      d.loglik = j.at("loglik").get<double>();
      d.logpost = j.at("logpost").get<double>();
      const json& sg = j.at("signature");
      d.signature = {sg.at("below").get<int>(), sg.at("inside").get<int>(), sg.at("above").get<int>()};
      d.flat_region = sg.at("flat_region").get<bool>();
      out.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw ParseError("draws line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_diagnostics(std::ostream& os, const Diagnostics& diag, std::size_t n_draws) {
  json rungs = json::array();
  for (std::size_t t = 0; t < diag.per_rung.size(); ++t) {
    const MoveStats& m = diag.per_rung[t];
    rungs.push_back({
        {"temperature", diag.temperatures[t]},
        {"alpha_accept", rate(m.alpha_accepts, m.alpha_tries)},
        {"insert_accept", rate(m.insert_accepts, m.insert_tries)},
        {"delete_accept", rate(m.delete_accepts, m.delete_tries)},
        {"lambda_accept", rate(m.lambda_accepts, m.lambda_tries)},
        {"insert_tries", m.insert_tries},
        {"delete_tries", m.delete_tries},
        {"rj_failures", m.rj_failures},
        {"final_alpha_step", t < diag.final_alpha_steps.size() ? diag.final_alpha_steps[t] : 0.0},
    });
  }
  json swaps = json::array();
  for (std::size_t i = 0; i < diag.swap_tries.size(); ++i)
    swaps.push_back({{"pair", {i, i + 1}},
                     {"tries", diag.swap_tries[i]},
                     {"accept", rate(diag.swap_accepts[i], diag.swap_tries[i])}});
  double mean_size = 0.0;
  for (int k : diag.tree_size_trace) mean_size += k;
  if (!diag.tree_size_trace.empty()) mean_size /= static_cast<double>(diag.tree_size_trace.size());
  const json j = {
      {"draws", n_draws},
      {"seconds", diag.seconds},
      {"rungs", rungs},
      {"swaps", swaps},
      {"mean_tree_size", mean_size},
      {"tree_size_trace", diag.tree_size_trace},
      {"logpost_trace", diag.logpost_trace},
  };
  os << j.dump(2) << '\n';
}

Band posterior_band(std::span<const Draw> draws, const Hyperparameters& hp, const WorkingScale& scale,
                    int points) {
  Band b;
  std::vector<double> w;
  for (int i = 0; i < points; ++i) {
    const double x = points == 1 ? 0.5 * (scale.lo() + scale.hi())
                                 : scale.lo() + (scale.hi() - scale.lo()) * i / (points - 1);
    b.x.push_back(x);
    w.push_back(scale.to_working(x));
  }
  const auto nd = draws.size();
  Eigen::MatrixXd curves(points, static_cast<Eigen::Index>(nd));
  for (std::size_t d = 0; d < nd; ++d) curves.col(static_cast<Eigen::Index>(d)) = curve_eval(draws[d].state, hp, w);
  std::vector<double> row(nd);
  for (int i = 0; i < points; ++i) {
    double s = 0.0;
    for (std::size_t d = 0; d < nd; ++d) s += row[d] = curves(i, static_cast<Eigen::Index>(d));
    if (nd == 0) {
      b.mean.push_back(std::nan("")), b.lower.push_back(std::nan("")), b.upper.push_back(std::nan(""));
      continue;
    }
    const double mean = s / static_cast<double>(nd);
    double lo = type7_quantile(row, 0.025), hi = type7_quantile(row, 0.975);
    // the mean can sit outside a very skewed 95% band only by rounding
    lo = std::min(lo, mean), hi = std::max(hi, mean);
    b.mean.push_back(mean);
    b.lower.push_back(lo);
    b.upper.push_back(hi);
  }
  return b;
}

void write_band_csv(std::ostream& os, const Band& band) {
  const auto old = os.precision(17);
  os << "x,mean,lower,upper\n";
  for (std::size_t i = 0; i < band.x.size(); ++i)
    os << band.x[i] << ',' << band.mean[i] << ',' << band.lower[i] << ',' << band.upper[i] << '\n';
  os.precision(old);
}

void write_bf_report(std::ostream& os, const BayesFactorReport& r, const ShapeHypothesis& hyp1,
                     const ShapeHypothesis& hyp2, const Hyperparameters& hp) {
  auto sigs = [](const ShapeHypothesis& h) {
    json a = json::array();
    for (const Signature& s : h.signatures) a.push_back({s.below, s.inside, s.above});
    return a;
  };
  json table = json::array();
  for (const SignatureCount& row : r.by_signature)
    table.push_back({{"signature", {row.signature.below, row.signature.inside, row.signature.above}},
                     {"shape", describe_shape(row.signature, hp.m)},
                     {"count", row.count},
                     {"flat_region", row.flat},
                     {"prior", row.prior}});
  const json j = {
      {"hypothesis1", {{"spec", hyp1.label}, {"signatures", sigs(hyp1)}, {"count", r.n1}, {"prior", r.q1},
                       {"flat_region", r.flat1}}},
      {"hypothesis2", {{"spec", hyp2.label}, {"signatures", sigs(hyp2)}, {"count", r.n2}, {"prior", r.q2},
                       {"flat_region", r.flat2}}},
      {"bayes_factor", r.bf},
      {"log10_bayes_factor", std::log10(r.bf)},
      {"lower_bound", r.lower_bound},
      {"draws", r.n_total},
      {"flat_region_draws", r.flat_total},
      {"estimator", "posterior odds divided by prior odds of the signature classes"},
      {"by_signature", table},
  };
  os << j.dump(2) << '\n';
}

void write_simulation_summary(std::ostream& os, const Scenario& sc, std::span<const ReplicateRecord> records) {
  const ReplicateSummary s = summarize(records);
  const json j = {
      {"scenario", sc.id},
      {"function", sc.function},
      {"n", sc.n},
      {"sigma2", sc.sigma2},
      {"replicates", s.count},
      {"n_iters", sc.chain.n_iters},
      {"burn_in", sc.chain.burn_in},
      {"imse", {{"mean", s.mean_imse}, {"se", s.se_imse}}},
      {"bf", {{"mean", s.mean_bf}, {"se", s.se_bf}, {"above_6", s.bf_above_6}}},
      {"log10_bf", {{"mean", s.mean_log10_bf}, {"se", s.se_log10_bf}}},
      {"seconds", {{"mean", s.mean_seconds}, {"se", s.se_seconds}}},
  };
  os << j.dump(2) << '\n';
}

}  // namespace lxs
