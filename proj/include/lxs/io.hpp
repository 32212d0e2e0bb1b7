#pragma once

// File formats: "x,y" CSV input, JSON configuration, newline-delimited JSON
// draws, diagnostics, the plot-ready summary band and the JSON reports.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lxs/model.hpp"
#include "lxs/sampler.hpp"
#include "lxs/shape_infer.hpp"
#include "lxs/sim_harness.hpp"

namespace lxs {

struct XyData {
  std::vector<double> xs, ys;
};

/// Reads a CSV with header "x,y". Throws ParseError naming the line.
XyData read_xy_csv(std::istream& in, const std::string& source = "input");
XyData read_xy_csv_file(const std::string& path);

struct Settings {
  Hyperparameters hp;
  ChainConfig chain;
  std::optional<std::pair<double, double>> interval;  // declared predictor interval
  int replicates = 10;
  int imse_grid = 0;
};

/// Flat JSON object; hyperparameter fields use the model symbols, a and b are
/// in working units. Unknown keys throw ConfigError.
Settings parse_settings(const std::string& json_text);
Settings load_settings(const std::string& path);

/// One JSON object per draw, change points in original units.
void write_draws(std::ostream& os, std::span<const Draw> draws, const Hyperparameters& hp,
                 const WorkingScale& scale);
/// Inverse of write_draws.
std::vector<Draw> read_draws(std::istream& in, const WorkingScale& scale);

void write_diagnostics(std::ostream& os, const Diagnostics& diag, std::size_t n_draws);

struct Band {
  std::vector<double> x, mean, lower, upper;
};

/// Pointwise posterior mean and 2.5% / 97.5% quantiles of f on an evenly
/// spaced grid over the declared interval.
Band posterior_band(std::span<const Draw> draws, const Hyperparameters& hp, const WorkingScale& scale,
                    int points = 200);
void write_band_csv(std::ostream& os, const Band& band);

void write_bf_report(std::ostream& os, const BayesFactorReport& report, const ShapeHypothesis& hyp1,
                     const ShapeHypothesis& hyp2, const Hyperparameters& hp);

void write_simulation_summary(std::ostream& os, const Scenario& scenario,
                              std::span<const ReplicateRecord> records);

}  // namespace lxs
