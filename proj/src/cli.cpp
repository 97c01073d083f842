#include "wgs/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wgs/em_sampler.hpp"
#include "wgs/fp_solver.hpp"
#include "wgs/io.hpp"
#include "wgs/landscape.hpp"
#include "wgs/metrics.hpp"
#include "wgs/presets.hpp"
#include "wgs/reference.hpp"
#include "wgs/trainer.hpp"

namespace wgs {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string output_root() {
  const char* env = std::getenv("WGS_OUT_ROOT");
  return (env != nullptr && *env != '\0') ? env : ".";
}

std::string resolve_out(const std::string& out) {
  if (out.empty()) return output_root();
  if (out.front() == '/') return out;
  return output_root() + "/" + out;
}

Vector parse_vector(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) values.push_back(std::stod(cell));
  return Eigen::Map<const Vector>(values.data(), values.size());
}

std::vector<int> parse_counts(const std::string& text) {
  std::vector<int> counts;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, 'x')) counts.push_back(std::stoi(cell));
  return counts;
}

// ---------------------------------------------------------------------------
// Config (de)serialization — the file written next to every training run and
// accepted back via --config.

const char* kappa_kind_name(KappaSchedule::Kind kind) {
  switch (kind) {
    case KappaSchedule::Kind::fixed: return "fixed";
    case KappaSchedule::Kind::linear_decay: return "linear_decay";
    case KappaSchedule::Kind::exponential_decay: return "exponential_decay";
    case KappaSchedule::Kind::uniform_random: return "uniform_random";
    case KappaSchedule::Kind::mixed_groups: return "mixed_groups";
  }
  return "fixed";
}

KappaSchedule::Kind kappa_kind_from(const std::string& name) {
  if (name == "fixed") return KappaSchedule::Kind::fixed;
  if (name == "linear_decay") return KappaSchedule::Kind::linear_decay;
  if (name == "exponential_decay") return KappaSchedule::Kind::exponential_decay;
  if (name == "uniform_random") return KappaSchedule::Kind::uniform_random;
  if (name == "mixed_groups") return KappaSchedule::Kind::mixed_groups;
  throw std::invalid_argument("unknown kappa schedule kind '" + name + "'");
}

nlohmann::json kappa_to_json(const KappaSchedule& k) {
  nlohmann::json j = {{"kind", kappa_kind_name(k.kind)}, {"start", k.start},
                      {"end", k.end},                    {"span", k.span},
                      {"lo", k.lo},                      {"hi", k.hi}};
  if (k.kind == KappaSchedule::Kind::mixed_groups) {
    j["group_sizes"] = k.group_sizes;
    j["group_schedules"] = nlohmann::json::array();
    for (const KappaSchedule& g : k.group_schedules)
      j["group_schedules"].push_back(kappa_to_json(g));
  }
  return j;
}

KappaSchedule kappa_from_json(const nlohmann::json& j) {
  KappaSchedule k;
  k.kind = kappa_kind_from(j.at("kind").get<std::string>());
  k.start = j.value("start", 1.0);
  k.end = j.value("end", k.start);
  k.span = j.value("span", 1);
  k.lo = j.value("lo", 0.0);
  k.hi = j.value("hi", 0.0);
  if (k.kind == KappaSchedule::Kind::mixed_groups) {
    k.group_sizes = j.at("group_sizes").get<std::vector<int>>();
    for (const nlohmann::json& g : j.at("group_schedules"))
      k.group_schedules.push_back(kappa_from_json(g));
  }
  return k;
}

const char* lr_kind_name(LrSchedule::Kind kind) {
  switch (kind) {
    case LrSchedule::Kind::constant: return "constant";
    case LrSchedule::Kind::exp_decay: return "exp_decay";
    case LrSchedule::Kind::step_decay: return "step_decay";
  }
  return "constant";
}

LrSchedule::Kind lr_kind_from(const std::string& name) {
  if (name == "constant") return LrSchedule::Kind::constant;
  if (name == "exp_decay") return LrSchedule::Kind::exp_decay;
  if (name == "step_decay") return LrSchedule::Kind::step_decay;
  throw std::invalid_argument("unknown lr schedule kind '" + name + "'");
}

std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json run_config_json(const Preset& preset, std::uint64_t seed,
                               bool deterministic) {
  const TrainConfig& t = preset.train;
  nlohmann::json j;
  j["kind"] = "run_config";
  j["version"] = io::version_string();
  j["problem"] = preset.problem;
  j["problem_params"] = preset.problem_params;
  j["flow"] = {{"layers", preset.flow_layers},
               {"width", preset.flow_width},
               {"base_std", preset.base_std}};
  j["train"] = {
      {"n_samples", t.n_samples},
      {"n_test", t.n_test},
      {"n_test_batch", t.n_test_batch},
      {"n_iters", t.n_iters},
      {"center_noise",
       {{"gamma", t.center_noise.gamma},
        {"gamma_end", t.center_noise.gamma_end},
        {"decay_span", t.center_noise.decay_span},
        {"exponential", t.center_noise.exponential}}},
      {"kappa", kappa_to_json(t.kappa)},
      {"boundary",
       {{"lambda", t.boundary.lambda},
        {"c", t.boundary.c},
        {"center", to_std(t.boundary.center)},
        {"radii", to_std(t.boundary.radii)}}},
      {"lr",
       {{"kind", lr_kind_name(t.lr.kind)},
        {"lr0", t.lr.lr0},
        {"factor", t.lr.factor},
        {"span", t.lr.span}}},
      {"adam", {{"beta1", t.adam_beta1}, {"beta2", t.adam_beta2}, {"eps", t.adam_eps}}},
      {"snapshot_every", t.snapshot_every},
      {"checkpoint_every", t.checkpoint_every},
  };
  j["seed"] = seed;
  j["deterministic"] = deterministic;
  return j;
}

Preset preset_from_config(const nlohmann::json& j, std::uint64_t& seed,
                          bool& deterministic) {
  std::map<std::string, double> params;
  if (j.contains("problem_params"))
    params = j.at("problem_params").get<std::map<std::string, double>>();
  Preset preset = make_preset(j.at("problem").get<std::string>(), params);

  const nlohmann::json& flow = j.at("flow");
  preset.flow_layers = flow.at("layers").get<int>();
  preset.flow_width = flow.at("width").get<int>();
  preset.base_std = flow.value("base_std", 1.0);

  const nlohmann::json& t = j.at("train");
  TrainConfig& c = preset.train;
  c.n_samples = t.at("n_samples").get<int>();
  c.n_test = t.at("n_test").get<int>();
  c.n_test_batch = t.at("n_test_batch").get<int>();
  c.n_iters = t.at("n_iters").get<int>();
  const nlohmann::json& noise = t.at("center_noise");
  c.center_noise.gamma = noise.at("gamma").get<double>();
  c.center_noise.gamma_end = noise.value("gamma_end", -1.0);
  c.center_noise.decay_span = noise.value("decay_span", 0);
  c.center_noise.exponential = noise.value("exponential", false);
  c.kappa = kappa_from_json(t.at("kappa"));
  const nlohmann::json& b = t.at("boundary");
  c.boundary.lambda = b.at("lambda").get<double>();
  c.boundary.c = b.at("c").get<double>();
  const auto center = b.at("center").get<std::vector<double>>();
  const auto radii = b.at("radii").get<std::vector<double>>();
  c.boundary.center =
      Eigen::Map<const Vector>(center.data(), static_cast<Eigen::Index>(center.size()));
  c.boundary.radii =
      Eigen::Map<const Vector>(radii.data(), static_cast<Eigen::Index>(radii.size()));
  const nlohmann::json& lr = t.at("lr");
  c.lr.kind = lr_kind_from(lr.at("kind").get<std::string>());
  c.lr.lr0 = lr.at("lr0").get<double>();
  c.lr.factor = lr.value("factor", 0.1);
  c.lr.span = lr.value("span", 1);
  const nlohmann::json& adam = t.at("adam");
  c.adam_beta1 = adam.value("beta1", 0.9);
  c.adam_beta2 = adam.value("beta2", 0.999);
  c.adam_eps = adam.value("eps", 1e-8);
  c.snapshot_every = t.value("snapshot_every", 0);
  c.checkpoint_every = t.value("checkpoint_every", 0);

  seed = j.at("seed").get<std::uint64_t>();
  deterministic = j.value("deterministic", true);
  return preset;
}

// ---------------------------------------------------------------------------
// Metric helpers shared by train snapshots, the final report, and cmd_eval.

Matrix flow_samples(const FlowModel& flow, int n, std::uint64_t seed,
                    std::uint64_t stream) {
  RandomStream rng = RandomStream(seed).split(stream);
  return flow.sample_batch(n, rng).second;
}

std::vector<std::string> metric_names_for(const BenchmarkProblem& problem,
                                          bool have_reference) {
  if (problem.name == "example1") return {"e_p"};
  if (problem.name == "example2")
    return have_reference ? std::vector<std::string>{"e_p", "prob_x_positive"}
                          : std::vector<std::string>{"prob_x_positive"};
  if (problem.name == "diag_ou") return {"e_M", "e_C"};
  return {"sample_norm_median"};
}

std::map<std::string, double> problem_metrics(const BenchmarkProblem& problem,
                                              const FlowModel& flow,
                                              const GridDensity* reference,
                                              const GridSpec* grid, int eval_samples,
                                              std::uint64_t seed, std::uint64_t stream) {
  std::map<std::string, double> out;
  if (problem.name == "example1" && grid != nullptr) {
    out["e_p"] = relative_l2_error(flow_density_on_grid(flow, *grid),
                                   analytic_reference(problem, *grid));
    return out;
  }
  if (problem.name == "example2") {
    RandomStream rng = RandomStream(seed).split(stream);
    out["prob_x_positive"] = prob_x_positive(flow, eval_samples, rng);
    if (reference != nullptr)
      out["e_p"] = relative_l2_error(flow_density_on_grid(flow, reference->spec),
                                     *reference);
    return out;
  }
  if (problem.name == "diag_ou") {
    Vector mean;
    Matrix cov;
    benchmark_moments(problem, mean, cov);
    const Matrix samples = flow_samples(flow, eval_samples, seed, stream);
    const auto [e_m, e_c] = moment_errors(samples, mean, cov);
    out["e_M"] = e_m;
    out["e_C"] = e_c;
    return out;
  }
  const Matrix samples = flow_samples(flow, std::min(eval_samples, 4096), seed, stream);
  Vector norms = samples.rowwise().norm();
  std::sort(norms.data(), norms.data() + norms.size());
  out["sample_norm_median"] = norms(norms.size() / 2);
  return out;
}

void write_report(const std::string& path, const MetricReport& report) {
  io::write_text_file(path, report.to_json() + "\n");
  std::cout << report.to_table();
}

// ---------------------------------------------------------------------------
// Subcommand payloads.

struct TrainArgs {
  std::string preset;
  std::string config_path;
  std::string out_dir;
  std::string reference_path;
  std::uint64_t seed = 1;
  bool deterministic = true;
  int threads = 1;
  // overrides (<0 means keep preset value)
  double eps = -1.0;
  int d = -1;
  int n_iters = -1;
  int n_samples = -1;
  int n_test = -1;
  int n_test_batch = -1;
  int layers = -1;
  int width = -1;
  double lr0 = -1.0;
  int snapshot_every = -1;
  int checkpoint_every = -1;
  int eval_samples = 100000;
};

int cmd_train(const TrainArgs& args) {
  std::uint64_t seed = args.seed;
  bool deterministic = args.deterministic;
  Preset preset;
  if (!args.config_path.empty()) {
    const nlohmann::json config =
        nlohmann::json::parse(io::read_text_file(args.config_path));
    preset = preset_from_config(config, seed, deterministic);
  } else {
    std::map<std::string, double> params;
    if (args.eps >= 0.0) params["eps"] = args.eps;
    if (args.d > 0) params["d"] = args.d;
    preset = make_preset(args.preset, params);
  }
  if (args.n_iters >= 0) preset.train.n_iters = args.n_iters;
  if (args.n_samples > 0) preset.train.n_samples = args.n_samples;
  if (args.n_test > 0) preset.train.n_test = args.n_test;
  if (args.n_test_batch > 0) preset.train.n_test_batch = args.n_test_batch;
  // Full-batch presets stay full-batch when --n-test shrinks.
  if (preset.train.n_test_batch > preset.train.n_test)
    preset.train.n_test_batch = preset.train.n_test;
  if (args.layers > 0) preset.flow_layers = args.layers;
  if (args.width > 0) preset.flow_width = args.width;
  if (args.lr0 > 0.0) preset.train.lr.lr0 = args.lr0;
  if (args.snapshot_every >= 0) preset.train.snapshot_every = args.snapshot_every;
  if (args.checkpoint_every >= 0) preset.train.checkpoint_every = args.checkpoint_every;

  const std::string out_dir = resolve_out(args.out_dir);
  io::ensure_directory(out_dir);

  BenchmarkProblem problem = make_benchmark(preset.problem, preset.problem_params);
  preset.train.seed = seed;
  preset.train.deterministic = deterministic;
  preset.train.out_dir = out_dir;
  preset.train.validate(problem.system.dim);

  const nlohmann::json config = run_config_json(preset, seed, deterministic);
  const std::string config_text = config.dump(1) + "\n";
  io::write_text_file(out_dir + "/config.json", config_text);
  const std::string config_hash = io::hex64(io::fnv1a(config_text));

  std::optional<GridDensity> reference;
  if (!args.reference_path.empty())
    reference = read_grid_density(args.reference_path);

  RandomStream init_rng(seed);
  FlowModel flow = FlowModel::create(problem.system.dim, preset.flow_layers,
                                     preset.flow_width, init_rng, preset.base_std);

  const GridSpec* grid = preset.has_eval_grid ? &preset.eval_grid : nullptr;
  const GridDensity* ref_ptr = reference ? &*reference : nullptr;
  const int snapshot_samples = std::min(args.eval_samples, 20000);

  TrainHooks hooks;
  hooks.metric_names = metric_names_for(problem, ref_ptr != nullptr);
  hooks.snapshot = [&](const FlowModel& current, int outer) {
    return problem_metrics(problem, current, ref_ptr, grid, snapshot_samples, seed,
                           1000003ULL + static_cast<std::uint64_t>(outer));
  };

  const TrainRecord record = train(problem.system, flow, preset.train, hooks);

  MetricReport report;
  report.meta["problem"] = preset.problem;
  report.meta["config_hash"] = config_hash;
  report.meta["seed"] = std::to_string(seed);
  report.meta["iterations"] = std::to_string(preset.train.n_iters);
  report.metrics = problem_metrics(problem, flow, ref_ptr, grid, args.eval_samples,
                                   seed, 2000003ULL);
  if (!record.rows.empty()) {
    report.metrics["final_weak_loss"] = record.rows.back().weak_loss;
    report.metrics["final_boundary_loss"] = record.rows.back().boundary_loss;
  }
  write_report(out_dir + "/metric_report.json", report);
  return kExitOk;
}

struct ReferenceArgs {
  std::string problem;
  std::string out_dir;
  std::string mode;  // analytic | fd | em | (empty = problem default)
  double eps = -1.0;
  int d = -1;
  std::string grid_counts;
  std::string grid_lo;
  std::string grid_hi;
  double t_total = -1.0;
  double dt = -1.0;
  int trajectories = -1;
  std::uint64_t seed = 1;
};

GridSpec reference_grid(const ReferenceArgs& args, const Preset& preset) {
  if (!args.grid_counts.empty() || !args.grid_lo.empty() || !args.grid_hi.empty()) {
    if (args.grid_counts.empty() || args.grid_lo.empty() || args.grid_hi.empty())
      throw std::invalid_argument("--grid, --lo, --hi must be given together");
    return GridSpec::box(parse_vector(args.grid_lo), parse_vector(args.grid_hi),
                         parse_counts(args.grid_counts));
  }
  if (preset.has_eval_grid) return preset.eval_grid;
  throw std::invalid_argument("this problem needs explicit --grid/--lo/--hi");
}

int cmd_reference(const ReferenceArgs& args) {
  std::map<std::string, double> params;
  if (args.eps >= 0.0) params["eps"] = args.eps;
  if (args.d > 0) params["d"] = args.d;
  const Preset preset = make_preset(args.problem, params);
  BenchmarkProblem problem = make_benchmark(preset.problem, preset.problem_params);

  const std::string out_dir = resolve_out(args.out_dir);
  io::ensure_directory(out_dir);

  std::string mode = args.mode;
  if (mode.empty()) {
    switch (problem.reference) {
      case BenchmarkProblem::Reference::analytic: mode = "analytic"; break;
      case BenchmarkProblem::Reference::finite_difference: mode = "fd"; break;
      case BenchmarkProblem::Reference::monte_carlo: mode = "em"; break;
      case BenchmarkProblem::Reference::factorized_2d: mode = "fd"; break;
    }
  }

  std::ostringstream meta;
  meta << "problem=" << preset.problem << " mode=" << mode;
  const std::string config_hash = io::hex64(io::fnv1a(meta.str()));

  if (mode == "analytic") {
    const GridSpec grid = reference_grid(args, preset);
    const GridDensity density = analytic_reference(problem, grid);
    write_grid_density(out_dir + "/density.csv", density, config_hash, args.seed);
    if (grid.dim() == 2) io::write_pgm(out_dir + "/density.pgm", density.image2d());
    return kExitOk;
  }

  if (mode == "fd") {
    if (problem.reference == BenchmarkProblem::Reference::factorized_2d) {
      // The 2-D pair-system factor of the product-form reference.
      const Coupled10dReference ref = make_coupled10d_reference(problem);
      write_grid_density(out_dir + "/p0.csv", ref.p0, config_hash, args.seed);
      io::write_pgm(out_dir + "/p0.pgm", ref.p0.image2d());
      return kExitOk;
    }
    const GridSpec grid = reference_grid(args, preset);
    const FpSolution solution = fd_solve_sfpe_2d(problem.system, grid);
    write_grid_density(out_dir + "/density.csv", solution.density, config_hash,
                       args.seed);
    io::write_pgm(out_dir + "/density.pgm", solution.density.image2d());
    MetricReport report;
    report.meta["problem"] = preset.problem;
    report.metrics["fd_residual"] = solution.residual;
    report.metrics["fd_steps"] = solution.steps;
    write_report(out_dir + "/reference_report.json", report);
    return kExitOk;
  }

  if (mode == "em") {
    if (!preset.has_em_reference)
      throw std::invalid_argument("no long-run sampler defaults for this problem");
    EmConfig em = preset.em;
    em.seed = args.seed;
    if (args.t_total > 0.0) em.t_total = args.t_total;
    if (args.dt > 0.0) em.dt = args.dt;
    if (args.trajectories > 0) em.n_trajectories = args.trajectories;
    const EmResult result = em_sample(problem.system, em);

    // Marginal grids from the 3-D histogram mesh bounds.
    const GridSpec& xy = preset.em_marginal;
    const double z_lo = -10.0, z_hi = 60.0;
    Vector lo(2), hi(2);
    const struct {
      int a0, a1;
      const char* tag;
    } planes[] = {{0, 1, "xy"}, {0, 2, "xz"}, {1, 2, "yz"}};
    for (const auto& plane : planes) {
      lo(0) = plane.a0 == 0 ? xy.lo(0) : xy.lo(1);
      hi(0) = plane.a0 == 0 ? xy.hi(0) : xy.hi(1);
      lo(1) = plane.a1 == 1 ? xy.lo(1) : z_lo;
      hi(1) = plane.a1 == 1 ? xy.hi(1) : z_hi;
      const GridSpec grid = GridSpec::box(lo, hi, {100, 100});
      const GridDensity marginal =
          marginal_histogram(result.samples, plane.a0, plane.a1, grid);
      const std::string stem = out_dir + "/marginal_" + plane.tag;
      write_grid_density(stem + ".csv", marginal, config_hash, args.seed);
      io::write_pgm(stem + ".pgm", marginal.image2d());
    }
    MetricReport report;
    report.meta["problem"] = preset.problem;
    report.metrics["samples"] = static_cast<double>(result.samples.rows());
    report.metrics["dropped_trajectories"] = result.dropped;
    write_report(out_dir + "/reference_report.json", report);
    return kExitOk;
  }

  throw std::invalid_argument("unknown reference mode '" + mode +
                              "' (analytic | fd | em)");
}

struct EvalArgs {
  std::string checkpoint;
  std::string problem;
  std::string reference_path;
  std::string out_dir;
  double eps = -1.0;
  int d = -1;
  std::string grid_counts;
  std::string grid_lo;
  std::string grid_hi;
  int eval_samples = 100000;
  std::uint64_t seed = 1;
};

int cmd_eval(const EvalArgs& args) {
  std::map<std::string, double> params;
  if (args.eps >= 0.0) params["eps"] = args.eps;
  if (args.d > 0) params["d"] = args.d;
  const Preset preset = make_preset(args.problem, params);
  BenchmarkProblem problem = make_benchmark(preset.problem, preset.problem_params);

  if (!std::filesystem::exists(args.checkpoint))
    throw std::invalid_argument("checkpoint not found: " + args.checkpoint);
  const FlowModel flow = load_checkpoint(args.checkpoint);
  if (flow.dim != problem.system.dim)
    throw std::invalid_argument("checkpoint dimension " + std::to_string(flow.dim) +
                                " does not match problem dimension " +
                                std::to_string(problem.system.dim));

  const std::string out_dir = resolve_out(args.out_dir);
  io::ensure_directory(out_dir);

  std::optional<GridDensity> reference;
  if (!args.reference_path.empty())
    reference = read_grid_density(args.reference_path);

  std::optional<GridSpec> grid;
  if (!args.grid_counts.empty())
    grid = GridSpec::box(parse_vector(args.grid_lo), parse_vector(args.grid_hi),
                         parse_counts(args.grid_counts));
  else if (reference && flow.dim == 2)
    grid = reference->spec;
  else if (preset.has_eval_grid && flow.dim == 2)
    grid = preset.eval_grid;

  MetricReport report;
  report.meta["problem"] = preset.problem;
  report.meta["checkpoint"] = args.checkpoint;
  report.meta["seed"] = std::to_string(args.seed);

  const std::string hash = io::hex64(io::fnv1a(args.checkpoint));

  if (flow.dim == 2 && grid) {
    const GridDensity estimated = flow_density_on_grid(flow, *grid);
    write_grid_density(out_dir + "/flow_density.csv", estimated, hash, args.seed);
    io::write_pgm(out_dir + "/flow_density.pgm", estimated.image2d());
    if (reference && reference->spec.same_as(*grid)) {
      report.metrics["e_p"] = relative_l2_error(estimated, *reference);
      io::write_pgm(out_dir + "/reference.pgm", reference->image2d());
    } else if (problem.reference == BenchmarkProblem::Reference::analytic) {
      report.metrics["e_p"] =
          relative_l2_error(estimated, analytic_reference(problem, *grid));
    }
  } else if (flow.dim > 2 && reference && reference->spec.dim() == 2) {
    // Compare (axis 0, axis 1) marginal histograms on the reference grid.
    RandomStream rng = RandomStream(args.seed).split(7ULL);
    const Matrix samples = flow.sample_batch(args.eval_samples, rng).second;
    const GridDensity marginal =
        marginal_histogram(samples, 0, 1, reference->spec);
    write_grid_density(out_dir + "/flow_marginal_xy.csv", marginal, hash, args.seed);
    io::write_pgm(out_dir + "/flow_marginal_xy.pgm", marginal.image2d());
    io::write_pgm(out_dir + "/reference.pgm", reference->image2d());
    report.metrics["e_p_marginal_xy"] = relative_l2_error(marginal, *reference);
  }

  RandomStream prob_rng = RandomStream(args.seed).split(11ULL);
  report.metrics["prob_x_positive"] = prob_x_positive(flow, args.eval_samples, prob_rng);

  if (problem.name == "diag_ou" || problem.name == "example1") {
    Vector mean;
    Matrix cov;
    benchmark_moments(problem, mean, cov);
    const Matrix samples = flow_samples(flow, args.eval_samples, args.seed, 13ULL);
    const auto [e_m, e_c] = moment_errors(samples, mean, cov);
    report.metrics["e_M"] = e_m;
    report.metrics["e_C"] = e_c;
  }

  write_report(out_dir + "/metric_report.json", report);
  return kExitOk;
}

struct LandscapeArgs {
  std::string loss = "pinn";
  std::string axis = "sigma";
  double sweep_min = 0.0;
  double sweep_max = 6.0;
  int sweep_count = 25;
  double w_star = 0.5;
  double mu_star = 2.0;
  double alpha = 2.0;
  double kappa2 = 8.0;
  double fixed_w = 0.0;
  double fixed_mu = 0.0;
  double fixed_sigma = 0.0;
  int n_mc = 1000000;
  std::uint64_t seed = 1;
  std::string out_dir;
};

int cmd_landscape(const LandscapeArgs& args) {
  MixtureTarget target;
  target.mu_star = args.mu_star;
  target.w_star = args.w_star;
  target.validate();

  SweepConfig config;
  if (args.loss == "pinn")
    config.loss = SweepLoss::pinn;
  else if (args.loss == "wgs")
    config.loss = SweepLoss::wgs;
  else
    throw std::invalid_argument("unknown loss '" + args.loss + "' (pinn | wgs)");
  if (args.axis == "weight")
    config.axis = SweepAxis::weight;
  else if (args.axis == "mean")
    config.axis = SweepAxis::mean;
  else if (args.axis == "sigma")
    config.axis = SweepAxis::sigma;
  else
    throw std::invalid_argument("unknown axis '" + args.axis +
                                "' (weight | mean | sigma)");
  if (args.sweep_count < 1)
    throw std::invalid_argument("sweep needs at least one point");
  config.values.resize(args.sweep_count);
  for (int i = 0; i < args.sweep_count; ++i)
    config.values[i] =
        args.sweep_count == 1
            ? args.sweep_min
            : args.sweep_min + (args.sweep_max - args.sweep_min) * i /
                                   (args.sweep_count - 1);
  config.fixed.theta_w = args.fixed_w;
  config.fixed.theta_mu = args.fixed_mu;
  config.fixed.theta_sigma = args.fixed_sigma;
  config.test.alpha = args.alpha;
  config.test.kappa2 = args.kappa2;
  config.n_mc = args.n_mc;
  config.seed = args.seed;

  const std::string out_dir = resolve_out(args.out_dir);
  io::ensure_directory(out_dir);
  std::ostringstream name;
  name << "sweep_" << args.loss << "_" << args.axis;
  if (config.loss == SweepLoss::wgs)
    name << "_a" << args.alpha << "_k" << args.kappa2;
  name << ".csv";

  const std::vector<SweepPoint> points = sweep(target, config);
  write_sweep_csv(out_dir + "/" + name.str(), target, config, points);

  int bad_points = 0;
  for (const SweepPoint& p : points)
    if (!p.ok) ++bad_points;
  if (bad_points > 0)
    std::cerr << bad_points << " sweep point(s) violated the family invariants"
              << " (flagged in the CSV)\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"weak-form generative sampling of SDE invariant distributions"};
  app.require_subcommand(1);

  int threads = 1;
  bool deterministic = true;
  app.add_option("--threads", threads, "worker-thread cap (deterministic forces 1)");
  app.add_flag("--deterministic,!--no-deterministic", deterministic,
               "bit-reproducible outputs (default on)");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a transport map");
  train_cmd->add_option("--preset", train_args.preset,
                        "benchmark preset (example1 | example2 | lorenz | coupled10d "
                        "| diag_ou)");
  train_cmd->add_option("--config", train_args.config_path,
                        "run-config JSON written by a previous run");
  train_cmd->add_option("--out", train_args.out_dir, "output directory");
  train_cmd->add_option("--seed", train_args.seed, "master RNG seed");
  train_cmd->add_option("--eps", train_args.eps, "problem noise level");
  train_cmd->add_option("--d", train_args.d, "problem dimension (diag_ou)");
  train_cmd->add_option("--iters", train_args.n_iters, "outer iterations");
  train_cmd->add_option("--samples", train_args.n_samples, "base samples per iteration");
  train_cmd->add_option("--n-test", train_args.n_test, "test functions per iteration");
  train_cmd->add_option("--n-test-batch", train_args.n_test_batch,
                        "test-function mini-batch size");
  train_cmd->add_option("--layers", train_args.layers, "coupling layers");
  train_cmd->add_option("--width", train_args.width, "hidden width of t/s nets");
  train_cmd->add_option("--lr0", train_args.lr0, "initial learning rate");
  train_cmd->add_option("--snapshot-every", train_args.snapshot_every,
                        "iterations between metric snapshots");
  train_cmd->add_option("--checkpoint-every", train_args.checkpoint_every,
                        "iterations between checkpoints");
  train_cmd->add_option("--reference", train_args.reference_path,
                        "reference density CSV for e_p snapshots");
  train_cmd->add_option("--eval-samples", train_args.eval_samples,
                        "sample count for sampled metrics");

  ReferenceArgs ref_args;
  CLI::App* ref_cmd = app.add_subcommand("reference", "compute a reference density");
  ref_cmd->add_option("problem", ref_args.problem, "benchmark name")->required();
  ref_cmd->add_option("--mode", ref_args.mode, "analytic | fd | em");
  ref_cmd->add_flag_callback("--analytic", [&] { ref_args.mode = "analytic"; });
  ref_cmd->add_flag_callback("--fd", [&] { ref_args.mode = "fd"; });
  ref_cmd->add_flag_callback("--em", [&] { ref_args.mode = "em"; });
  ref_cmd->add_option("--eps", ref_args.eps, "problem noise level");
  ref_cmd->add_option("--d", ref_args.d, "problem dimension (diag_ou)");
  ref_cmd->add_option("--grid", ref_args.grid_counts, "cells, e.g. 400x400");
  ref_cmd->add_option("--lo", ref_args.grid_lo, "lower bounds, e.g. -2.5,-3");
  ref_cmd->add_option("--hi", ref_args.grid_hi, "upper bounds, e.g. 2.5,3");
  ref_cmd->add_option("--T", ref_args.t_total, "simulated time per trajectory (em)");
  ref_cmd->add_option("--dt", ref_args.dt, "time step (em)");
  ref_cmd->add_option("--trajectories", ref_args.trajectories, "ensemble size (em)");
  ref_cmd->add_option("--seed", ref_args.seed, "master RNG seed");
  ref_cmd->add_option("--out", ref_args.out_dir, "output directory");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a trained checkpoint");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "flow checkpoint JSON")
      ->required();
  eval_cmd->add_option("--problem", eval_args.problem, "benchmark name")->required();
  eval_cmd->add_option("--reference", eval_args.reference_path,
                       "reference density CSV");
  eval_cmd->add_option("--eps", eval_args.eps, "problem noise level");
  eval_cmd->add_option("--d", eval_args.d, "problem dimension (diag_ou)");
  eval_cmd->add_option("--grid", eval_args.grid_counts, "cells, e.g. 200x200");
  eval_cmd->add_option("--lo", eval_args.grid_lo, "lower bounds");
  eval_cmd->add_option("--hi", eval_args.grid_hi, "upper bounds");
  eval_cmd->add_option("--eval-samples", eval_args.eval_samples,
                       "sample count for sampled metrics");
  eval_cmd->add_option("--seed", eval_args.seed, "master RNG seed");
  eval_cmd->add_option("--out", eval_args.out_dir, "output directory");

  LandscapeArgs land_args;
  CLI::App* land_cmd = app.add_subcommand("landscape", "loss-landscape sweeps");
  land_cmd->add_option("--loss", land_args.loss, "pinn | wgs");
  land_cmd->add_option("--axis", land_args.axis, "weight | mean | sigma");
  land_cmd->add_option("--min", land_args.sweep_min, "first swept value");
  land_cmd->add_option("--max", land_args.sweep_max, "last swept value");
  land_cmd->add_option("--count", land_args.sweep_count, "sweep points");
  land_cmd->add_option("--wstar", land_args.w_star, "target weight w*");
  land_cmd->add_option("--mustar", land_args.mu_star, "target mode center");
  land_cmd->add_option("--alpha", land_args.alpha, "test-function center");
  land_cmd->add_option("--kappa2", land_args.kappa2, "test-function variance");
  land_cmd->add_option("--theta-w", land_args.fixed_w, "fixed weight offset");
  land_cmd->add_option("--theta-mu", land_args.fixed_mu, "fixed mean offset");
  land_cmd->add_option("--theta-sigma", land_args.fixed_sigma,
                       "fixed variance offset");
  land_cmd->add_option("--n-mc", land_args.n_mc, "Monte Carlo samples per point");
  land_cmd->add_option("--seed", land_args.seed, "master RNG seed");
  land_cmd->add_option("--out", land_args.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (deterministic) threads = 1;
  Eigen::setNbThreads(threads);

  try {
    if (train_cmd->parsed()) {
      if (train_args.preset.empty() && train_args.config_path.empty())
        throw std::invalid_argument("train needs --preset or --config");
      train_args.deterministic = deterministic;
      return cmd_train(train_args);
    }
    if (ref_cmd->parsed()) return cmd_reference(ref_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (land_cmd->parsed()) return cmd_landscape(land_args);
    std::cerr << "no subcommand\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TrainingDivergence& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace wgs
