#include "wgs/em_sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace wgs {

void EmConfig::validate(int dim) const {
  if (!(dt > 0.0)) throw std::invalid_argument("EmConfig: dt must be positive");
  if (!(t_burn_in < t_total))
    throw std::invalid_argument("EmConfig: need t_burn_in < t_total");
  if (thin_steps <= 0) throw std::invalid_argument("EmConfig: thin_steps must be >= 1");
  if (n_trajectories <= 0)
    throw std::invalid_argument("EmConfig: need at least one trajectory");
  if (init_lo.size() != dim || init_hi.size() != dim)
    throw std::invalid_argument("EmConfig: initial box dimension mismatch");
  if ((init_hi - init_lo).minCoeff() < 0.0)
    throw std::invalid_argument("EmConfig: initial box needs lo <= hi");
  if (!(guard_radius > 0.0))
    throw std::invalid_argument("EmConfig: guard radius must be positive");
}

EmResult em_sample(const SdeSystem& system, const EmConfig& config) {
  const int d = system.dim;
  config.validate(d);

  const long n_steps = static_cast<long>(std::llround(config.t_total / config.dt));
  const long burn_steps = static_cast<long>(std::llround(config.t_burn_in / config.dt));
  const double root_2dt = std::sqrt(2.0 * config.dt);
  const double guard_sq = config.guard_radius * config.guard_radius;

  RandomStream master(config.seed);
  std::vector<Vector> kept;
  EmResult out;
  out.n_trajectories = config.n_trajectories;

  const bool fixed_sigma = system.constant_diffusion;
  Matrix sigma0;
  if (fixed_sigma) sigma0 = system.diffusion(Vector::Zero(d));

  for (int t = 0; t < config.n_trajectories; ++t) {
    RandomStream rng = master.split(static_cast<std::uint64_t>(t));
    Vector x(d);
    for (int a = 0; a < d; ++a) x(a) = rng.uniform(config.init_lo(a), config.init_hi(a));

    const std::size_t kept_before = kept.size();
    bool escaped = false;
    for (long k = 0; k < n_steps; ++k) {
      const Vector noise = rng.normal_vector(d);
      const Matrix& sigma = fixed_sigma ? sigma0 : system.diffusion(x);
      x += system.drift(x) * config.dt + root_2dt * (sigma * noise);
      if (x.squaredNorm() > guard_sq || !x.allFinite()) {
        escaped = true;
        break;
      }
      if (k + 1 > burn_steps && (k + 1 - burn_steps) % config.thin_steps == 0)
        kept.push_back(x);
    }
    if (escaped) {
      kept.resize(kept_before);  // drop all of this trajectory's states
      out.dropped += 1;
    }
  }

  if (kept.empty())
    throw std::runtime_error("em_sample: every trajectory was dropped by the guard");

  out.samples.resize(static_cast<Eigen::Index>(kept.size()), d);
  for (std::size_t i = 0; i < kept.size(); ++i) out.samples.row(i) = kept[i].transpose();
  return out;
}

}  // namespace wgs
