#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ogsbl/harness.hpp"

namespace py = pybind11;
using namespace ogsbl;

namespace {

SblResult run_sbl_py(const ChannelSample& sample, const PilotMatrix& pilot, const Grid& grid,
                     const ArrayGeometry& geom, const SblHyper& hyper, bool offgrid) {
  return offgrid ? run_sbl(sample, pilot, grid, geom, hyper)
                 : run_standard_sbl(sample, pilot, grid, geom, hyper);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Off-grid SBL channel estimation with DDPG-driven adaptive-depth unfolding";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("fork", &RngStream::fork, py::arg("salt"))
      .def("uniform", py::overload_cast<>(&RngStream::uniform))
      .def("gaussian", &RngStream::gaussian);

  py::class_<ArrayGeometry>(m, "ArrayGeometry")
      .def(py::init<>())
      .def(py::init([](int n, double spacing) { return ArrayGeometry{n, spacing}; }),
           py::arg("n_antennas"), py::arg("spacing_ratio") = 0.5)
      .def_readwrite("n_antennas", &ArrayGeometry::n_antennas)
      .def_readwrite("spacing_ratio", &ArrayGeometry::spacing_ratio);

  py::class_<Grid>(m, "Grid")
      .def_static("uniform", &Grid::uniform, py::arg("size"))
      .def_readonly("points", &Grid::points)
      .def_readonly("resolution", &Grid::resolution)
      .def("size", &Grid::size);

  py::class_<PilotMatrix>(m, "PilotMatrix")
      .def_readwrite("x", &PilotMatrix::x)
      .def_readwrite("power", &PilotMatrix::power)
      .def_readwrite("length", &PilotMatrix::length);

  py::class_<ChannelSample>(m, "ChannelSample")
      .def(py::init<>())
      .def_readwrite("h", &ChannelSample::h)
      .def_readwrite("ray_angles", &ChannelSample::ray_angles)
      .def_readwrite("ray_gains", &ChannelSample::ray_gains)
      .def_readwrite("n_clusters", &ChannelSample::n_clusters)
      .def_readwrite("rays_per_cluster", &ChannelSample::rays_per_cluster)
      .def_readwrite("y", &ChannelSample::y)
      .def_readwrite("noise_var", &ChannelSample::noise_var)
      .def_readwrite("gain_var", &ChannelSample::gain_var)
      .def("ray_count", &ChannelSample::ray_count);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("samples", &Dataset::samples)
      .def_readwrite("geometry", &Dataset::geometry)
      .def_readwrite("grid", &Dataset::grid)
      .def_readwrite("pilot", &Dataset::pilot)
      .def_readwrite("seed", &Dataset::seed);

  m.def("steering_vector", &steering_vector, py::arg("geom"), py::arg("angle"));
  m.def("steering_derivative", &steering_derivative, py::arg("geom"), py::arg("angle"));
  m.def("build_dictionary", &build_dictionary, py::arg("geom"), py::arg("grid"), py::arg("beta"));
  m.def(
      "generate_channel",
      [](const ArrayGeometry& geom, int n_clusters, int rays_per_cluster, double gain_var,
         double angle_spread, RngStream& rng) {
        ChannelGenConfig cfg;
        cfg.n_clusters = n_clusters;
        cfg.rays_per_cluster = rays_per_cluster;
        cfg.gain_var = gain_var;
        cfg.angle_spread = angle_spread;
        return generate_channel(geom, cfg, rng);
      },
      py::arg("geom"), py::arg("n_clusters"), py::arg("rays_per_cluster"), py::arg("gain_var"),
      py::arg("angle_spread"), py::arg("rng"));
  m.def("generate_pilots", &generate_pilots, py::arg("pilot_length"), py::arg("geom"), py::arg("power"),
        py::arg("rng"));
  m.def("observe", &observe, py::arg("pilot"), py::arg("h"), py::arg("noise_var"), py::arg("rng"));
  m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("path"));
  m.def("read_dataset", &read_dataset, py::arg("path"));

  py::class_<SblHyper>(m, "SblHyper")
      .def(py::init<>())
      .def_readwrite("a", &SblHyper::a)
      .def_readwrite("b", &SblHyper::b)
      .def_readwrite("delta", &SblHyper::delta)
      .def_readwrite("max_iters", &SblHyper::max_iters)
      .def_readwrite("step_beta", &SblHyper::step_beta)
      .def_readwrite("support_ratio", &SblHyper::support_ratio)
      .def_readwrite("gamma_cap", &SblHyper::gamma_cap)
      .def_readwrite("recompute_gamma_posterior", &SblHyper::recompute_gamma_posterior)
      .def_readwrite("beta_backtracking", &SblHyper::beta_backtracking);

  py::class_<SblState>(m, "SblState")
      .def(py::init<>())
      .def_readwrite("alpha", &SblState::alpha)
      .def_readwrite("gamma", &SblState::gamma)
      .def_readwrite("beta", &SblState::beta)
      .def_readwrite("iter", &SblState::iter);

  py::class_<Posterior>(m, "Posterior")
      .def_readonly("mu", &Posterior::mu)
      .def_readonly("sigma", &Posterior::sigma)
      .def_readonly("eta", &Posterior::eta);

  py::class_<SblResult::TracePoint>(m, "SblTracePoint")
      .def_readonly("alpha", &SblResult::TracePoint::alpha)
      .def_readonly("h_change_sq", &SblResult::TracePoint::h_change_sq)
      .def_readonly("evidence", &SblResult::TracePoint::evidence);

  py::class_<SblResult>(m, "SblResult")
      .def_readonly("h_hat", &SblResult::h_hat)
      .def_readonly("support", &SblResult::support)
      .def_readonly("state", &SblResult::state)
      .def_readonly("iters_used", &SblResult::iters_used)
      .def_readonly("nmse", &SblResult::nmse)
      .def_readonly("trajectory", &SblResult::trajectory);

  m.def("run_sbl", &run_sbl_py, py::arg("sample"), py::arg("pilot"), py::arg("grid"), py::arg("geom"),
        py::arg("hyper"), py::arg("offgrid") = true);
  m.def("initial_state", &initial_state, py::arg("y"), py::arg("grid_size"));
  m.def("nmse", &nmse, py::arg("h_hat"), py::arg("h"));
  m.def(
      "posterior_moments",
      [](const SblState& state, const PilotMatrix& pilot, const Grid& grid, const ArrayGeometry& geom,
         const VecC& y) { return posterior_moments(state, pilot, grid, geom, y); },
      py::arg("state"), py::arg("pilot"), py::arg("grid"), py::arg("geom"), py::arg("y"));
  m.def(
      "log_evidence",
      [](const SblState& state, const PilotMatrix& pilot, const Grid& grid, const ArrayGeometry& geom,
         const VecC& y, const SblHyper& hyper) { return log_evidence(state, pilot, grid, geom, y, hyper); },
      py::arg("state"), py::arg("pilot"), py::arg("grid"), py::arg("geom"), py::arg("y"), py::arg("hyper"));

  py::class_<LayerParams>(m, "LayerParams")
      .def_static("zeros", &LayerParams::zeros, py::arg("n"), py::arg("t"), py::arg("jhat"))
      .def_readwrite("a", &LayerParams::a)
      .def_readwrite("b", &LayerParams::b)
      .def_readwrite("c1", &LayerParams::c1)
      .def_readwrite("step_beta", &LayerParams::step_beta)
      .def_readwrite("w1", &LayerParams::w1)
      .def_readwrite("b1", &LayerParams::b1)
      .def_readwrite("w2", &LayerParams::w2)
      .def_readwrite("b2", &LayerParams::b2)
      .def_readwrite("b3", &LayerParams::b3)
      .def_readwrite("o1", &LayerParams::o1)
      .def_readwrite("o2", &LayerParams::o2);

  m.def(
      "unfolded_layer",
      [](const SblState& state, const LayerParams& params, const PilotMatrix& pilot, const Grid& grid,
         const ArrayGeometry& geom, const VecC& y) {
        return unfolded_layer(state, params, pilot, grid, geom, y);
      },
      py::arg("state"), py::arg("params"), py::arg("pilot"), py::arg("grid"), py::arg("geom"), py::arg("y"));
  m.def("plain_equivalent_params", &plain_equivalent_params, py::arg("state"), py::arg("pilot"),
        py::arg("grid"), py::arg("geom"), py::arg("y"), py::arg("hyper"));
  m.def("verify_one_layer_two_iters", &verify_one_layer_two_iters, py::arg("sample"), py::arg("pilot"),
        py::arg("grid"), py::arg("geom"), py::arg("hyper"), py::arg("alpha_l"));

  py::class_<EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("max_layers", &EnvConfig::max_layers)
      .def_readwrite("epsilon", &EnvConfig::epsilon)
      .def_readwrite("eta_pen", &EnvConfig::eta_pen)
      .def_readwrite("rho", &EnvConfig::rho)
      .def_readwrite("lambda_halt", &EnvConfig::lambda_halt)
      .def_readwrite("discount", &EnvConfig::discount);

  py::class_<Problem>(m, "Problem")
      .def_static(
          "standard",
          [](const ArrayGeometry& geom, const Grid& grid, const PilotMatrix& pilot, const SblHyper& hyper,
             const EnvConfig& env, const std::string& codec_mode) {
            return Problem::standard(geom, grid, pilot, hyper, env, codec_mode_from_string(codec_mode),
                                     ActionScales{});
          },
          py::arg("geom"), py::arg("grid"), py::arg("pilot"), py::arg("hyper"), py::arg("env"),
          py::arg("codec_mode") = "diagonal-plus-rank1")
      .def_readwrite("env", &Problem::env)
      .def("feature_dim", &Problem::feature_dim)
      .def("param_dim", &Problem::param_dim);

  py::class_<EnvState>(m, "EnvState")
      .def_readonly("sbl", &EnvState::sbl)
      .def_readonly("residual", &EnvState::residual)
      .def_readonly("h_hat", &EnvState::h_hat)
      .def_readonly("t", &EnvState::t)
      .def_readonly("features", &EnvState::features);

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("next", &StepResult::next)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("done", &StepResult::done)
      .def_readonly("nmse_after", &StepResult::nmse_after);

  py::class_<EpisodeStep>(m, "EpisodeStep")
      .def_readonly("reward", &EpisodeStep::reward)
      .def_readonly("halting", &EpisodeStep::halting)
      .def_readonly("nmse_after", &EpisodeStep::nmse_after)
      .def_readonly("err_pre_sq", &EpisodeStep::err_pre_sq);

  py::class_<EpisodeTrace>(m, "EpisodeTrace")
      .def_readonly("steps", &EpisodeTrace::steps)
      .def_readonly("layers_used", &EpisodeTrace::layers_used)
      .def_readonly("nmse0", &EpisodeTrace::nmse0)
      .def_readonly("final_nmse", &EpisodeTrace::final_nmse)
      .def_readonly("discounted_return", &EpisodeTrace::discounted_return);

  m.def("env_reset", &env_reset, py::arg("problem"), py::arg("sample"));
  m.def("env_step", &env_step, py::arg("problem"), py::arg("state"), py::arg("params"), py::arg("halting"),
        py::arg("sample"));
  m.def("env_step_raw", &env_step_raw, py::arg("problem"), py::arg("state"), py::arg("action"),
        py::arg("sample"));
  m.def("rollout_plain_policy", &rollout_plain_policy, py::arg("problem"), py::arg("sample"),
        py::arg("depth") = 0);

  py::class_<ExperimentConfig>(m, "ExperimentConfig").def(py::init(&default_config));
  m.def("default_config_json", [] { return config_to_json(default_config()); });
  m.def("load_config", &load_config, py::arg("path"));
  m.def("config_from_json", &config_from_json_text, py::arg("text"));
  m.def("config_to_json", &config_to_json, py::arg("config"));

  m.def("make_dataset", &make_dataset, py::arg("config"), py::arg("split"), py::arg("n_samples"));
  m.def(
      "generate_cli",
      [](const ExperimentConfig& config) {
        std::ostringstream log;
        const GeneratedPaths paths = cli_generate(config, log);
        return py::make_tuple(paths.train, paths.val, paths.test);
      },
      py::arg("config"));
  m.def(
      "train_cli",
      [](const ExperimentConfig& config, const std::string& train_path, const std::string& val_path,
         const std::string& ckpt) {
        std::ostringstream log;
        const int rc = cli_train(config, train_path, val_path, ckpt, log);
        return py::make_tuple(rc, log.str());
      },
      py::arg("config"), py::arg("train_dataset"), py::arg("val_dataset"), py::arg("checkpoint"));
  m.def(
      "evaluate_cli",
      [](const ExperimentConfig& config, const std::string& ckpt, const std::string& dataset,
         const std::string& sweep) {
        std::ostringstream log;
        return metrics_csv(cli_evaluate(config, ckpt, dataset, sweep, log));
      },
      py::arg("config"), py::arg("checkpoint"), py::arg("dataset"), py::arg("sweep"));
  m.def(
      "run_sbl_cli",
      [](const ExperimentConfig& config, const std::string& dataset) {
        std::ostringstream log;
        return metrics_csv(cli_run_sbl(config, dataset, log));
      },
      py::arg("config"), py::arg("dataset"));
}
