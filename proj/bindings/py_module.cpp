#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "p3o/advantage.hpp"
#include "p3o/config.hpp"
#include "p3o/csvlog.hpp"
#include "p3o/distributions.hpp"
#include "p3o/envs.hpp"
#include "p3o/objectives.hpp"
#include "p3o/plot.hpp"
#include "p3o/trainer.hpp"

namespace py = pybind11;
using namespace p3o;

namespace {

// step helper accepting either an int action or a force vector
StepResult env_step(const Env& env, const EnvState& s, py::object action) {
  if (py::isinstance<py::int_>(action)) return env.step(s, action.cast<int>());
  const auto a = action.cast<std::vector<double>>();
  return env.step(s, std::span<const double>(a.data(), a.size()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "policy-gradient lab: objectives, environments, and training loop";

  py::register_exception<GraphError>(m, "GraphError");
  py::register_exception<EnvError>(m, "EnvError");
  py::register_exception<ObjectiveError>(m, "ObjectiveError");
  py::register_exception<TrainerError>(m, "TrainerError");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<CsvError>(m, "CsvError");

  // ---- objectives ----
  m.def("cpi_objective", [](const std::vector<double>& r, const std::vector<double>& a) {
    return cpi_objective(r, a);
  });
  m.def("ppo_objective",
        [](const std::vector<double>& r, const std::vector<double>& a, double eps) {
          return ppo_objective(r, a, eps);
        },
        py::arg("ratios"), py::arg("advantages"), py::arg("epsilon") = 0.2);
  m.def("scopic_objective",
        [](const std::vector<double>& r, const std::vector<double>& a, double tau) {
          return scopic_objective(r, a, tau);
        },
        py::arg("ratios"), py::arg("advantages"), py::arg("tau") = 4.0);
  m.def("precond_factor", &precond_factor, py::arg("ratio"), py::arg("tau") = 4.0);
  m.def("deon", [](const std::vector<double>& r) { return deon(r); });
  m.def("clip_space_fraction",
        [](const std::vector<double>& r, double eps) { return clip_space_fraction(r, eps); },
        py::arg("ratios"), py::arg("epsilon") = 0.2);

  // ---- advantage estimation ----
  m.def("nstep_advantage",
        [](const std::vector<double>& rew, const std::vector<double>& val, double boot,
           double gamma) { return nstep_advantage(rew, val, boot, gamma); },
        py::arg("rewards"), py::arg("values"), py::arg("bootstrap"), py::arg("gamma"));
  m.def("gae",
        [](const std::vector<double>& rew, const std::vector<double>& val,
           const std::vector<uint8_t>& dones, double boot, double gamma, double lam) {
          return gae(rew, val, dones, boot, gamma, lam);
        },
        py::arg("rewards"), py::arg("values"), py::arg("dones"), py::arg("bootstrap"),
        py::arg("gamma"), py::arg("lambda_gae"));
  m.def("td0_target", &td0_target, py::arg("reward"), py::arg("next_value"),
        py::arg("gamma_v"));
  m.def("normalize_advantages", [](std::vector<double> adv) {
    normalize_advantages(adv);
    return adv;
  });

  // ---- distributions ----
  py::class_<PolicyDist>(m, "PolicyDist")
      .def_static("categorical", &PolicyDist::categorical, py::arg("logits"))
      .def_static("gaussian", &PolicyDist::gaussian, py::arg("mean"), py::arg("log_std"))
      .def("log_prob",
           [](const PolicyDist& d, py::object action) {
             if (py::isinstance<py::int_>(action)) return d.log_prob(action.cast<int>());
             const auto a = action.cast<std::vector<double>>();
             return d.log_prob(std::span<const double>(a.data(), a.size()));
           })
      .def("entropy", &PolicyDist::entropy)
      .def("mode", &PolicyDist::mode)
      .def("probs", &PolicyDist::probs);
  m.def("kl", &kl, py::arg("old_dist"), py::arg("new_dist"));

  // ---- environments and the exact solver ----
  py::class_<EnvState>(m, "EnvState")
      .def_readonly("obs", &EnvState::obs)
      .def_readonly("step_count", &EnvState::step_count)
      .def_readonly("done", &EnvState::done);
  py::class_<StepResult>(m, "StepResult")
      .def_readonly("state", &StepResult::state)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("done", &StepResult::done);
  py::class_<Env>(m, "Env")
      .def_property_readonly("name", &Env::name)
      .def_property_readonly("obs_dim", &Env::obs_dim)
      .def_property_readonly("discrete", &Env::discrete)
      .def_property_readonly("n_actions", &Env::n_actions)
      .def_property_readonly("action_dim", &Env::action_dim)
      .def_property_readonly("step_cap", &Env::step_cap)
      .def("reset", &Env::reset, py::arg("seed"))
      .def("step", &env_step, py::arg("state"), py::arg("action"));
  m.def("make_env", &make_env, py::arg("name"));

  py::class_<ExactSolution>(m, "ExactSolution")
      .def_readonly("V", &ExactSolution::V)
      .def_readonly("Q", &ExactSolution::Q)
      .def_readonly("A", &ExactSolution::A);
  m.def("exact_solve_chain",
        [](int n_states, double gamma, const std::vector<double>& policy) {
          return exact_solve(ChainEnv(n_states).to_tabular(gamma), policy);
        },
        py::arg("n_states"), py::arg("gamma"), py::arg("policy"));

  // ---- training ----
  py::class_<MetricsRow>(m, "MetricsRow")
      .def_readonly("iteration", &MetricsRow::iteration)
      .def_readonly("env_steps", &MetricsRow::env_steps)
      .def_readonly("mean_return", &MetricsRow::mean_return)
      .def_readonly("eval_return", &MetricsRow::eval_return)
      .def_readonly("deon", &MetricsRow::deon)
      .def_readonly("cpi_value", &MetricsRow::cpi_value)
      .def_readonly("mean_kl", &MetricsRow::mean_kl)
      .def_readonly("entropy", &MetricsRow::entropy)
      .def_readonly("lr", &MetricsRow::lr)
      .def_readonly("frac_above", &MetricsRow::frac_above)
      .def_readonly("frac_below", &MetricsRow::frac_below);
  py::class_<History>(m, "History").def_readonly("rows", &History::rows);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("emit_config", &emit_config, py::arg("config"));
  py::class_<TrainConfig>(m, "TrainConfig")
      .def_readwrite("env", &TrainConfig::env)
      .def_readwrite("total_steps", &TrainConfig::total_steps)
      .def_readwrite("horizon", &TrainConfig::horizon)
      .def_readwrite("n_actors", &TrainConfig::n_actors)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("minibatch", &TrainConfig::minibatch)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("hidden", &TrainConfig::hidden)
      .def_property(
          "variant",
          [](const TrainConfig& c) { return variant_name(c.objective.variant); },
          [](TrainConfig& c, const std::string& v) {
            c.objective.variant = variant_from_string(v);
          });
  m.def("default_config", &default_config, py::arg("env"));
  m.def("run_training", &run_training, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  m.def("lr_schedule",
        [](long step, long total, double base, const std::string& kind) {
          return lr_schedule(step, total, base,
                             kind == "fixed" ? Schedule::fixed : Schedule::linear_decay);
        },
        py::arg("step"), py::arg("total"), py::arg("base"), py::arg("kind") = "linear_decay");

  // ---- logging / plotting ----
  m.def("metrics_to_csv", &metrics_to_csv, py::arg("history"));
  m.def("read_metrics_csv", &read_metrics_csv, py::arg("path"));
  m.def("write_metrics_csv", &write_metrics_csv, py::arg("history"), py::arg("path"));
  m.def("render_plot_svg", &render_plot_svg, py::arg("csv_paths"), py::arg("metric"));
  m.def("format_metric", &format_metric, py::arg("value"));
}
