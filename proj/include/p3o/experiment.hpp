#pragma once

#include <string>
#include <vector>

#include "p3o/config.hpp"
#include "p3o/csvlog.hpp"
#include "p3o/trainer.hpp"

namespace p3o {

// One training cell per (variant, env, seed); overrides start from the
// env's defaults.
struct ExperimentCell {
  Variant variant = Variant::p3o;
  std::string env = "pole";
  uint64_t seed = 0;
  TrainConfig config;  // fully resolved
};

struct ExperimentSpec {
  std::vector<ExperimentCell> cells;
  std::string out_dir = ".";
};

struct CellResult {
  ExperimentCell cell;
  std::string csv_path;
  bool ok = false;
  std::string error;
  double final_return = 0.0;  // mean_return of the last iteration
};

// Cross product of variants x seeds over one base config.
ExperimentSpec make_grid(const TrainConfig& base, const std::vector<Variant>& variants,
                         const std::vector<uint64_t>& seeds, const std::string& out_dir);

// Runs every cell (failures are recorded, remaining cells still run),
// writes one metrics CSV per cell plus summary.csv with per-(variant,env)
// mean and std of final return.
std::vector<CellResult> run_experiment(const ExperimentSpec& spec);

std::string summary_csv(const std::vector<CellResult>& results);

// Output directory resolution: explicit argument, else $P3O_OUT_DIR, else ".".
std::string resolve_out_dir(const std::string& cli_value);

}  // namespace p3o
