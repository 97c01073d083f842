#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wgs/cli.hpp"
#include "wgs/em_sampler.hpp"
#include "wgs/fp_solver.hpp"
#include "wgs/io.hpp"
#include "wgs/landscape.hpp"
#include "wgs/metrics.hpp"
#include "wgs/presets.hpp"
#include "wgs/reference.hpp"
#include "wgs/trainer.hpp"

namespace py = pybind11;

namespace {

using namespace wgs;

FlowModel create_flow(int dim, int n_layers, int hidden_width, std::uint64_t seed,
                      double base_std) {
  RandomStream rng(seed);
  return FlowModel::create(dim, n_layers, hidden_width, rng, base_std);
}

Matrix flow_sample(const FlowModel& flow, int n, std::uint64_t seed) {
  RandomStream rng(seed);
  return flow.sample_batch(n, rng).second;
}

py::dict record_to_dict(const TrainRecord& record) {
  py::dict out;
  std::vector<double> weak, boundary;
  weak.reserve(record.rows.size());
  boundary.reserve(record.rows.size());
  for (const TrainRecord::Row& row : record.rows) {
    weak.push_back(row.weak_loss);
    boundary.push_back(row.boundary_loss);
  }
  out["weak_loss"] = weak;
  out["boundary_loss"] = boundary;
  out["aborted"] = record.aborted;
  out["abort_reason"] = record.abort_reason;
  return out;
}

py::tuple train_preset(const std::string& name, std::map<std::string, double> params,
                       std::uint64_t seed, int n_iters, int n_samples, int n_test,
                       int n_test_batch, int layers, int width,
                       const std::string& out_dir) {
  Preset preset = make_preset(name, params);
  if (n_iters >= 0) preset.train.n_iters = n_iters;
  if (n_samples > 0) preset.train.n_samples = n_samples;
  if (n_test > 0) preset.train.n_test = n_test;
  if (n_test_batch > 0) preset.train.n_test_batch = n_test_batch;
  if (layers > 0) preset.flow_layers = layers;
  if (width > 0) preset.flow_width = width;
  BenchmarkProblem problem = make_benchmark(preset.problem, preset.problem_params);
  preset.train.seed = seed;
  preset.train.out_dir = out_dir;
  preset.train.validate(problem.system.dim);
  RandomStream rng(seed);
  FlowModel flow = FlowModel::create(problem.system.dim, preset.flow_layers,
                                     preset.flow_width, rng, preset.base_std);
  TrainRecord record = train(problem.system, flow, preset.train);
  return py::make_tuple(std::move(flow), record_to_dict(record));
}

GridDensity fd_reference(const std::string& name, std::map<std::string, double> params,
                         const Vector& lo, const Vector& hi, std::vector<int> counts) {
  BenchmarkProblem problem = make_benchmark(name, params);
  return fd_solve_sfpe_2d(problem.system, GridSpec::box(lo, hi, counts)).density;
}

GridDensity analytic_reference_for(const std::string& name,
                                   std::map<std::string, double> params,
                                   const Vector& lo, const Vector& hi,
                                   std::vector<int> counts) {
  BenchmarkProblem problem = make_benchmark(name, params);
  return analytic_reference(problem, GridSpec::box(lo, hi, counts));
}

Matrix em_sample_for(const std::string& name, std::map<std::string, double> params,
                     double t_total, double t_burn_in, double dt, int thin_steps,
                     int n_trajectories, const Vector& init_lo, const Vector& init_hi,
                     std::uint64_t seed) {
  BenchmarkProblem problem = make_benchmark(name, params);
  EmConfig config;
  config.t_total = t_total;
  config.t_burn_in = t_burn_in;
  config.dt = dt;
  config.thin_steps = thin_steps;
  config.n_trajectories = n_trajectories;
  config.init_lo = init_lo;
  config.init_hi = init_hi;
  config.seed = seed;
  config.validate(problem.system.dim);
  return em_sample(problem.system, config).samples;
}

double prob_positive(const FlowModel& flow, int n, std::uint64_t seed) {
  RandomStream rng(seed);
  return prob_x_positive(flow, n, rng);
}

py::tuple moment_errors_py(const Matrix& samples, const Vector& mean,
                           const Matrix& cov) {
  const auto [e_m, e_c] = moment_errors(samples, mean, cov);
  return py::make_tuple(e_m, e_c);
}

py::tuple landscape_point(const std::string& loss, double theta_w, double theta_mu,
                          double theta_sigma, double mu_star, double w_star,
                          double alpha, double kappa2, int n_mc, std::uint64_t seed) {
  MixtureTarget target;
  target.mu_star = mu_star;
  target.w_star = w_star;
  target.validate();
  MixtureParams params{theta_w, theta_mu, theta_sigma};
  params.validate(target);
  RandomStream rng(seed);
  LossEstimate estimate;
  if (loss == "pinn") {
    estimate = pinn_loss(target, params, n_mc, rng);
  } else if (loss == "wgs") {
    NormalizedTest1d test;
    test.alpha = alpha;
    test.kappa2 = kappa2;
    estimate = wgs_loss_single(target, params, test, n_mc, rng);
  } else {
    throw std::invalid_argument("loss must be 'pinn' or 'wgs'");
  }
  return py::make_tuple(estimate.value, estimate.std_error);
}

}  // namespace

PYBIND11_MODULE(_wgs, m) {
  m.doc() = "weak-form generative sampling of SDE invariant distributions";
  m.attr("__version__") = io::version_string();

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init(&GridSpec::box), py::arg("lo"), py::arg("hi"), py::arg("counts"))
      .def_readonly("lo", &GridSpec::lo)
      .def_readonly("hi", &GridSpec::hi)
      .def_readonly("counts", &GridSpec::counts)
      .def("n_cells", &GridSpec::n_cells)
      .def("cell_volume", &GridSpec::cell_volume)
      .def("all_centers", &GridSpec::all_centers);

  py::class_<GridDensity>(m, "GridDensity")
      .def_readonly("spec", &GridDensity::spec)
      .def_readonly("values", &GridDensity::values)
      .def("integral", &GridDensity::integral)
      .def("image2d", &GridDensity::image2d);

  py::class_<FlowModel>(m, "FlowModel")
      .def_static("create", &create_flow, py::arg("dim"), py::arg("n_layers"),
                  py::arg("hidden_width"), py::arg("seed"), py::arg("base_std") = 1.0)
      .def_readonly("dim", &FlowModel::dim)
      .def("param_count", &FlowModel::param_count)
      .def("forward",
           [](const FlowModel& flow, const Matrix& z) { return flow.forward(z); })
      .def("inverse",
           [](const FlowModel& flow, const Matrix& x) { return flow.inverse(x); })
      .def("log_density",
           [](const FlowModel& flow, const Matrix& x) { return flow.log_density(x); })
      .def("sample", &flow_sample, py::arg("n"), py::arg("seed"));

  m.def("save_checkpoint", &save_checkpoint, py::arg("flow"), py::arg("path"),
        py::arg("seed") = 0, py::arg("config_hash") = "");
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def("preset_names", &preset_names);
  m.def("train_preset", &train_preset, py::arg("name"),
        py::arg("params") = std::map<std::string, double>{}, py::arg("seed") = 1,
        py::arg("n_iters") = -1, py::arg("n_samples") = -1, py::arg("n_test") = -1,
        py::arg("n_test_batch") = -1, py::arg("layers") = -1, py::arg("width") = -1,
        py::arg("out_dir") = std::string{});

  m.def("fd_reference", &fd_reference, py::arg("name"),
        py::arg("params") = std::map<std::string, double>{}, py::arg("lo"),
        py::arg("hi"), py::arg("counts"));
  m.def("analytic_reference", &analytic_reference_for, py::arg("name"),
        py::arg("params") = std::map<std::string, double>{}, py::arg("lo"),
        py::arg("hi"), py::arg("counts"));
  m.def("em_sample", &em_sample_for, py::arg("name"),
        py::arg("params") = std::map<std::string, double>{}, py::arg("t_total"),
        py::arg("t_burn_in"), py::arg("dt") = 1e-3, py::arg("thin_steps") = 1,
        py::arg("n_trajectories") = 1, py::arg("init_lo"), py::arg("init_hi"),
        py::arg("seed") = 1);

  m.def("relative_l2_error", &relative_l2_error, py::arg("estimated"),
        py::arg("reference"));
  m.def("flow_density_on_grid", &flow_density_on_grid, py::arg("flow"),
        py::arg("grid"));
  m.def("prob_x_positive", &prob_positive, py::arg("flow"), py::arg("n"),
        py::arg("seed"));
  m.def("moment_errors", &moment_errors_py, py::arg("samples"), py::arg("mean"),
        py::arg("cov"));

  m.def("landscape_point", &landscape_point, py::arg("loss"), py::arg("theta_w") = 0.0,
        py::arg("theta_mu") = 0.0, py::arg("theta_sigma") = 0.0,
        py::arg("mu_star") = 2.0, py::arg("w_star") = 0.5, py::arg("alpha") = 2.0,
        py::arg("kappa2") = 8.0, py::arg("n_mc") = 100000, py::arg("seed") = 1);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("wgs");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  });
}
