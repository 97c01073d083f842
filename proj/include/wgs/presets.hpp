#pragma once

#include <map>
#include <string>
#include <vector>

#include "wgs/em_sampler.hpp"
#include "wgs/grid.hpp"
#include "wgs/sde_model.hpp"
#include "wgs/trainer.hpp"

namespace wgs {

/**
 * Published experiment settings for one benchmark: problem, flow
 * architecture, full TrainConfig, and the evaluation artifacts that make
 * sense for it (density grid and/or long-run sampler reference).
 */
struct Preset {
  std::string name;
  std::string problem;
  std::map<std::string, double> problem_params;

  int flow_layers = 6;
  int flow_width = 32;
  double base_std = 1.0;

  TrainConfig train;

  bool has_eval_grid = false;
  GridSpec eval_grid;

  bool has_em_reference = false;
  EmConfig em;           // long-run sampler settings (monte-carlo references)
  GridSpec em_marginal;  // 2-D grid for marginal histograms
};

const std::vector<std::string>& preset_names();

/**
 * Benchmark preset by name (example1 | example2 | lorenz | coupled10d |
 * diag_ou) with published hyper-parameters; `params` tweaks the problem
 * (eps, d) before the schedule is chosen.  Unknown names raise an error
 * listing the known presets.
 */
Preset make_preset(const std::string& name,
                   const std::map<std::string, double>& params = {});

}  // namespace wgs
