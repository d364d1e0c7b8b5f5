// Command-line front end: training runs, the ablation and hyper-parameter
// grids, metric plots, and deterministic policy evaluation.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "p3o/experiment.hpp"
#include "p3o/plot.hpp"

namespace {

struct CommonArgs {
  std::string algo = "p3o";
  std::string env;
  std::vector<uint64_t> seeds = {0};
  long steps = -1;
  std::string config_path;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--algo", a.algo, "objective variant: cpi|ppo|p3o|p3o_s|p3o_k|p3o_sk");
  cmd->add_option("--env", a.env, "environment: chain|pole|pointmass");
  cmd->add_option("--seed", a.seeds, "random seed(s)");
  cmd->add_option("--steps", a.steps, "total environment steps");
  cmd->add_option("--config", a.config_path, "key = value config file");
  cmd->add_option("--out", a.out_dir, "output directory (default $P3O_OUT_DIR or .)");
}

p3o::TrainConfig resolve_base(const CommonArgs& a) {
  p3o::TrainConfig cfg;
  if (!a.config_path.empty()) {
    cfg = p3o::parse_config_file(a.config_path);
    if (!a.env.empty() && a.env != cfg.env) {
      p3o::TrainConfig envd = p3o::default_config(a.env);
      envd.objective.variant = cfg.objective.variant;
      cfg = envd;
    }
  } else {
    cfg = p3o::default_config(a.env.empty() ? "pole" : a.env);
  }
  if (!a.env.empty()) cfg.env = a.env;
  cfg.objective.variant = p3o::variant_from_string(a.algo);
  if (a.steps > 0) cfg.total_steps = a.steps;
  return cfg;
}

int report(const std::vector<p3o::CellResult>& results, const std::string& out_dir) {
  int failed = 0;
  for (const auto& r : results) {
    if (r.ok) {
      std::printf("ok    %s  final_return=%s\n", r.csv_path.c_str(),
                  p3o::format_metric(r.final_return).c_str());
    } else {
      std::printf("FAIL  %s  %s\n", r.csv_path.c_str(), r.error.c_str());
      ++failed;
    }
  }
  std::printf("summary: %s/summary.csv\n", out_dir.c_str());
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"P3O / PPO / CPI policy-gradient lab"};
  app.require_subcommand(1);

  CommonArgs train_args, ablate_args, grid_args, eval_args;
  int eval_episodes = 10;

  CLI::App* train = app.add_subcommand("train", "train one variant, one CSV per seed");
  add_common(train, train_args);

  CLI::App* ablate =
      app.add_subcommand("ablate", "run the p3o, p3o_s, p3o_k, p3o_sk ablation grid");
  add_common(ablate, ablate_args);

  CLI::App* grid = app.add_subcommand(
      "grid", "hyper-parameter sensitivity grid: epochs x minibatch x learning rate");
  add_common(grid, grid_args);

  std::vector<std::string> plot_csvs;
  std::string plot_metric = "mean_return", plot_out = "plot.svg";
  CLI::App* plot = app.add_subcommand("plot", "render a metric from metrics CSVs to SVG");
  plot->add_option("csvs", plot_csvs, "input metrics CSV files")->required();
  plot->add_option("--metric", plot_metric, "metric column to plot");
  plot->add_option("--out", plot_out, "output SVG path");

  CLI::App* eval =
      app.add_subcommand("eval", "train, then report deterministic evaluation return");
  add_common(eval, eval_args);
  eval->add_option("--episodes", eval_episodes, "evaluation episodes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      const auto base = resolve_base(train_args);
      const auto out = p3o::resolve_out_dir(train_args.out_dir);
      auto spec = p3o::make_grid(base, {base.objective.variant}, train_args.seeds, out);
      return report(p3o::run_experiment(spec), out);
    }
    if (ablate->parsed()) {
      const auto base = resolve_base(ablate_args);
      const auto out = p3o::resolve_out_dir(ablate_args.out_dir);
      auto spec = p3o::make_grid(
          base,
          {p3o::Variant::p3o, p3o::Variant::p3o_s, p3o::Variant::p3o_k, p3o::Variant::p3o_sk},
          ablate_args.seeds, out);
      return report(p3o::run_experiment(spec), out);
    }
    if (grid->parsed()) {
      const auto base = resolve_base(grid_args);
      const auto out = p3o::resolve_out_dir(grid_args.out_dir);
      int failed = 0;
      for (int epochs : {5, 10})
        for (int mb : {32, 64})
          for (bool decay : {false, true}) {
            p3o::TrainConfig cfg = base;
            cfg.epochs = epochs;
            cfg.minibatch = mb;
            cfg.schedule = decay ? p3o::Schedule::linear_decay : p3o::Schedule::fixed;
            cfg.lr_policy = decay ? 3e-4 : 1e-4;
            cfg.lr_value = cfg.lr_policy;
            const std::string sub = out + "/grid_e" + std::to_string(epochs) + "_b" +
                                    std::to_string(mb) + (decay ? "_lrdecay" : "_lrfixed");
            auto spec =
                p3o::make_grid(cfg, {cfg.objective.variant}, grid_args.seeds, sub);
            failed += report(p3o::run_experiment(spec), sub);
          }
      return failed == 0 ? 0 : 1;
    }
    if (plot->parsed()) {
      p3o::emit_plot(plot_csvs, plot_metric, plot_out);
      std::printf("wrote %s\n", plot_out.c_str());
      return 0;
    }
    if (eval->parsed()) {
      const auto base = resolve_base(eval_args);
      for (uint64_t seed : eval_args.seeds) {
        p3o::TrainConfig cfg = base;
        cfg.seed = seed;
        p3o::Trainer trainer(cfg);
        trainer.run();
        const double ret = trainer.evaluate(eval_episodes, p3o::split_seed(seed, 0xe57));
        std::printf("seed %llu  eval_return=%s over %d episodes\n",
                    static_cast<unsigned long long>(seed),
                    p3o::format_metric(ret).c_str(), eval_episodes);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
