#include "p3o/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace p3o {

ExperimentSpec make_grid(const TrainConfig& base, const std::vector<Variant>& variants,
                         const std::vector<uint64_t>& seeds, const std::string& out_dir) {
  if (seeds.empty()) throw TrainerError("experiment needs at least one seed");
  ExperimentSpec spec;
  spec.out_dir = out_dir;
  for (Variant v : variants)
    for (uint64_t s : seeds) {
      ExperimentCell cell;
      cell.variant = v;
      cell.env = base.env;
      cell.seed = s;
      cell.config = base;
      cell.config.objective.variant = v;
      cell.config.seed = s;
      spec.cells.push_back(std::move(cell));
    }
  return spec;
}

std::vector<CellResult> run_experiment(const ExperimentSpec& spec) {
  std::filesystem::create_directories(spec.out_dir);
  std::vector<CellResult> results;
  for (const ExperimentCell& cell : spec.cells) {
    CellResult res;
    res.cell = cell;
    res.csv_path = spec.out_dir + "/" +
                   cell_filename(variant_name(cell.variant), cell.env, cell.seed);
    try {
      History h = run_training(cell.config);
      write_metrics_csv(h, res.csv_path);
      res.ok = true;
      if (!h.rows.empty()) res.final_return = h.rows.back().mean_return;
    } catch (const std::exception& e) {
      res.ok = false;
      res.error = e.what();
    }
    results.push_back(std::move(res));
  }

  std::ofstream out(spec.out_dir + "/summary.csv", std::ios::binary);
  out << summary_csv(results);
  return results;
}

std::string summary_csv(const std::vector<CellResult>& results) {
  // keyed by (variant, env), insertion-ordered
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<double>> finals;
  std::map<std::pair<std::string, std::string>, long> failures;
  for (const CellResult& r : results) {
    const auto key = std::make_pair(variant_name(r.cell.variant), r.cell.env);
    if (!finals.count(key) && !failures.count(key)) keys.push_back(key);
    if (r.ok) finals[key].push_back(r.final_return);
    else failures[key] += 1;
  }

  std::ostringstream os;
  os << "# schema=p3o_summary_v1\n";
  os << "variant,env,n_seeds,n_failed,final_return_mean,final_return_std\n";
  for (const auto& key : keys) {
    const auto& vals = finals[key];
    double mean = 0.0, std_dev = 0.0;
    if (!vals.empty()) {
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      for (double v : vals) std_dev += (v - mean) * (v - mean);
      std_dev = std::sqrt(std_dev / static_cast<double>(vals.size()));
    }
    os << key.first << "," << key.second << "," << vals.size() << "," << failures[key]
       << "," << format_metric(mean) << "," << format_metric(std_dev) << "\n";
  }
  return os.str();
}

std::string resolve_out_dir(const std::string& cli_value) {
  if (!cli_value.empty()) return cli_value;
  if (const char* env = std::getenv("P3O_OUT_DIR"); env && *env) return env;
  return ".";
}

}  // namespace p3o
