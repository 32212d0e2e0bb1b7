// lxspline: fit, test and simulate from the command line.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "lxs/errors.hpp"
#include "lxs/io.hpp"
#include "lxs/sampler.hpp"
#include "lxs/shape_infer.hpp"
#include "lxs/sim_harness.hpp"

namespace fs = std::filesystem;
using namespace lxs;

namespace {

struct Options {
  std::string data, config, out = ".";
  std::optional<std::uint64_t> seed;
  std::string hyp1, hyp2, scenario;
};

Settings settings_for(const Options& o) {
  Settings s = o.config.empty() ? Settings{} : load_settings(o.config);
  if (o.seed) s.chain.seed = *o.seed;
  return s;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + (dir / name).string() + "'");
  return f;
}

fs::path prepare_outdir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ConfigError("cannot create output directory '" + out + "'");
  return out;
}

struct Fitted {
  Dataset data;
  RunResult result;
};

Fitted fit_and_write(const Options& o, const Settings& s, const fs::path& dir) {
  if (o.data.empty()) throw ConfigError("--data is required");
  XyData xy = read_xy_csv_file(o.data);
  if (static_cast<int>(xy.xs.size()) < s.hp.order + 2)
    throw InsufficientDataError("need at least " + std::to_string(s.hp.order + 2) + " rows, got " +
                                std::to_string(xy.xs.size()));
  Dataset data(std::move(xy.xs), std::move(xy.ys), s.interval);
  RunResult res = run_tempered(data, s.hp, s.chain);

  {
    auto f = open_out(dir, "draws.ndjson");
    write_draws(f, res.draws, s.hp, data.scale);
  }
  {
    auto f = open_out(dir, "diagnostics.json");
    write_diagnostics(f, res.diagnostics, res.draws.size());
  }
  {
    auto f = open_out(dir, "summary.csv");
    write_band_csv(f, posterior_band(res.draws, s.hp, data.scale, 200));
  }
  return {std::move(data), std::move(res)};
}

int cmd_fit(const Options& o) {
  const Settings s = settings_for(o);
  const fs::path dir = prepare_outdir(o.out);
  fit_and_write(o, s, dir);
  return 0;
}

int cmd_test(const Options& o) {
  const Settings s = settings_for(o);
  if (o.hyp1.empty() || o.hyp2.empty()) throw SpecError("--hyp1 and --hyp2 are required");
  const auto [h1, h2] = parse_hypotheses(o.hyp1, o.hyp2, s.hp.h, s.hp.m);
  prior_shape_prob(h1, s.hp);
  prior_shape_prob(h2, s.hp);
  const fs::path dir = prepare_outdir(o.out);
  const Fitted fit = fit_and_write(o, s, dir);
  const BayesFactorReport report = bayes_factor(fit.result.draws, h1, h2, s.hp);
  auto f = open_out(dir, "bf_report.json");
  write_bf_report(f, report, h1, h2, s.hp);
  std::cout << "BF = " << report.bf << (report.lower_bound ? " (lower bound)" : "") << "\n";
  return 0;
}

int cmd_simulate(const Options& o) {
  const Settings s = settings_for(o);
  if (o.scenario.empty()) throw LookupError("--scenario is required");
  Scenario sc = make_scenario(o.scenario, s.hp, s.chain, s.replicates);
  sc.grid = s.imse_grid;
  const fs::path dir = prepare_outdir(o.out);
  Rng rng(s.chain.seed);
  const auto records = run_replicates(sc, rng);
  {
    auto f = open_out(dir, "replicates.csv");
    write_replicates_csv(f, records);
  }
  auto f = open_out(dir, "summary.json");
  write_simulation_summary(f, sc, records);
  return 0;
}

int fail(const std::string& kind, const std::string& message, int code) {
  const nlohmann::ordered_json j = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian local extrema splines"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub, bool needs_data) {
    auto* d = sub->add_option("--data", o.data, "CSV with header x,y");
    if (needs_data) d->required();
    sub->add_option("--config", o.config, "JSON configuration");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "random seed (overrides the config)");
  };
  auto* fit = app.add_subcommand("fit", "fit a curve and write draws, diagnostics and summary.csv");
  common(fit, true);
  auto* test = app.add_subcommand("test", "fit, then report the Bayes factor of hyp1 against hyp2");
  common(test, true);
  test->add_option("--hyp1", o.hyp1, "hypothesis spec")->required();
  test->add_option("--hyp2", o.hyp2, "hypothesis spec, or 'complement'")->required();
  auto* sim = app.add_subcommand("simulate", "run a simulation scenario");
  common(sim, false);
  sim->add_option("--scenario", o.scenario, "e.g. f4-lownoise, f2-highnoise, g7-n300")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*fit) return cmd_fit(o);
    if (*test) return cmd_test(o);
    return cmd_simulate(o);
  } catch (const Error& e) {
    return fail(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
}
