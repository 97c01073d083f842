#include "wgs/landscape.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wgs/io.hpp"

namespace wgs {

namespace {

constexpr double kRoot2Pi = 2.5066282746310002;  // sqrt(2 pi)

struct Gaussian1d {
  double mean = 0.0;
  double variance = 1.0;

  double value(double x) const {
    const double u = x - mean;
    return std::exp(-0.5 * u * u / variance) / (kRoot2Pi * std::sqrt(variance));
  }
  // phi' = -(u/var) phi ; phi'' = (u^2/var^2 - 1/var) phi.
  void derivs(double x, double& p, double& dp, double& ddp) const {
    const double u = x - mean;
    p = value(x);
    dp = -(u / variance) * p;
    ddp = (u * u / (variance * variance) - 1.0 / variance) * p;
  }
};

struct MixtureView {
  Gaussian1d plus, minus;
  double w = 0.5;

  MixtureValue eval(double x) const {
    double p1, dp1, ddp1, p2, dp2, ddp2;
    plus.derivs(x, p1, dp1, ddp1);
    minus.derivs(x, p2, dp2, ddp2);
    MixtureValue v;
    v.p = w * p1 + (1.0 - w) * p2;
    v.dp = w * dp1 + (1.0 - w) * dp2;
    v.ddp = w * ddp1 + (1.0 - w) * ddp2;
    return v;
  }
};

MixtureView family_view(const MixtureTarget& target, const MixtureParams& params) {
  params.validate(target);
  MixtureView view;
  view.w = target.w_star + params.theta_w;
  const double mean = target.mu_star + params.theta_mu;
  const double variance = 1.0 + params.theta_sigma;
  view.plus = {mean, variance};
  view.minus = {-mean, variance};
  return view;
}

// Drift ratios b = p'/p and p''/p for the unit-variance target mixture,
// factored so the dominant component's exponent cancels.  The naive ratio of
// densities underflows to 0/0 once |x - mu| passes ~38, which matters for the
// infinite-interval quadrature even though Monte Carlo never samples there.
struct TargetRatios {
  double b = 0.0;       // p'/p
  double ddp_over_p = 0.0;  // p''/p
};

TargetRatios target_ratios(const MixtureTarget& target, double x) {
  target.validate();
  const double u_plus = x - target.mu_star;
  const double u_minus = x + target.mu_star;
  const double log_n_plus =
      target.w_star > 0.0 ? std::log(target.w_star) - 0.5 * u_plus * u_plus
                          : -std::numeric_limits<double>::infinity();
  const double log_n_minus =
      target.w_star < 1.0 ? std::log(1.0 - target.w_star) - 0.5 * u_minus * u_minus
                          : -std::numeric_limits<double>::infinity();
  const double shift = std::max(log_n_plus, log_n_minus);
  const double e_plus = std::exp(log_n_plus - shift);
  const double e_minus = std::exp(log_n_minus - shift);
  const double mass = e_plus + e_minus;
  TargetRatios out;
  out.b = (-u_plus * e_plus - u_minus * e_minus) / mass;
  out.ddp_over_p =
      ((u_plus * u_plus - 1.0) * e_plus + (u_minus * u_minus - 1.0) * e_minus) / mass;
  return out;
}

}  // namespace

void MixtureTarget::validate() const {
  if (w_star < 0.0 || w_star > 1.0)
    throw std::invalid_argument("MixtureTarget: weight must lie in [0,1]");
}

void MixtureParams::validate(const MixtureTarget& target) const {
  target.validate();
  if (!(1.0 + theta_sigma > 0.0))
    throw std::invalid_argument("MixtureParams: need 1 + theta_sigma > 0");
  const double w = target.w_star + theta_w;
  if (w < 0.0 || w > 1.0)
    throw std::invalid_argument("MixtureParams: mixture weight left [0,1]");
}

MixtureValue mixture_density_and_derivs(const MixtureTarget& target,
                                        const MixtureParams& params, double x) {
  return family_view(target, params).eval(x);
}

double drift_from_target(const MixtureTarget& target, double x) {
  return target_ratios(target, x).b;
}

double drift_derivative(const MixtureTarget& target, double x) {
  const TargetRatios r = target_ratios(target, x);
  return r.ddp_over_p - r.b * r.b;
}

double fp_residual(const MixtureTarget& target, const MixtureParams& params, double x) {
  const MixtureValue v = family_view(target, params).eval(x);
  const double b = drift_from_target(target, x);
  const double db = drift_derivative(target, x);
  return v.ddp - db * v.p - b * v.dp;
}

double sample_mixture(const MixtureTarget& target, const MixtureParams& params,
                      RandomStream& rng) {
  const double w = target.w_star + params.theta_w;
  const double mean = target.mu_star + params.theta_mu;
  const double sigma = std::sqrt(1.0 + params.theta_sigma);
  const double center = rng.uniform() < w ? mean : -mean;
  return center + sigma * rng.normal();
}

double NormalizedTest1d::value(double x) const {
  return Gaussian1d{alpha, kappa2}.value(x);
}

double NormalizedTest1d::deriv1(double x) const {
  double p, dp, ddp;
  Gaussian1d{alpha, kappa2}.derivs(x, p, dp, ddp);
  return dp;
}

double NormalizedTest1d::deriv2(double x) const {
  double p, dp, ddp;
  Gaussian1d{alpha, kappa2}.derivs(x, p, dp, ddp);
  return ddp;
}

double generator_on_test1d(const MixtureTarget& target, const NormalizedTest1d& test,
                           double x) {
  double p, dp, ddp;
  Gaussian1d{test.alpha, test.kappa2}.derivs(x, p, dp, ddp);
  return drift_from_target(target, x) * dp + ddp;
}

LossEstimate pinn_loss(const MixtureTarget& target, const MixtureParams& params,
                       int n_mc, RandomStream& rng) {
  if (n_mc < 1) throw std::invalid_argument("pinn_loss: n_mc must be >= 1");
  params.validate(target);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n_mc; ++i) {
    const double x = sample_mixture(target, params, rng);
    const double r = fp_residual(target, params, x);
    const double y = r * r;
    sum += y;
    sum_sq += y * y;
  }
  LossEstimate est;
  est.value = sum / n_mc;
  const double var = std::max(0.0, sum_sq / n_mc - est.value * est.value);
  est.std_error = std::sqrt(var / n_mc);
  return est;
}

LossEstimate wgs_loss_single(const MixtureTarget& target, const MixtureParams& params,
                             const NormalizedTest1d& test, int n_mc,
                             RandomStream& rng) {
  if (n_mc < 1) throw std::invalid_argument("wgs_loss_single: n_mc must be >= 1");
  params.validate(target);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n_mc; ++i) {
    const double x = sample_mixture(target, params, rng);
    const double y = generator_on_test1d(target, test, x);
    sum += y;
    sum_sq += y * y;
  }
  const double mean = sum / n_mc;
  const double var = std::max(0.0, sum_sq / n_mc - mean * mean);
  const double mean_var = var / n_mc;

  LossEstimate est;
  est.value = mean * mean;
  est.std_error = std::sqrt(4.0 * mean * mean * mean_var + 2.0 * mean_var * mean_var);
  return est;
}

double pinn_loss_quadrature(const MixtureTarget& target, const MixtureParams& params) {
  params.validate(target);
  const MixtureView family = family_view(target, params);
  auto integrand = [&](double x) {
    const double r = fp_residual(target, params, x);
    return r * r * family.eval(x).p;
  };
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  return gauss_kronrod<double, 61>::integrate(integrand, -inf, inf, 12, 1e-10);
}

std::vector<SweepPoint> sweep(const MixtureTarget& target, const SweepConfig& config) {
  RandomStream master(config.seed);
  std::vector<SweepPoint> out;
  out.reserve(config.values.size());
  for (std::size_t i = 0; i < config.values.size(); ++i) {
    SweepPoint point;
    point.theta = config.values[i];
    MixtureParams params = config.fixed;
    switch (config.axis) {
      case SweepAxis::weight: params.theta_w = point.theta; break;
      case SweepAxis::mean: params.theta_mu = point.theta; break;
      case SweepAxis::sigma: params.theta_sigma = point.theta; break;
    }
    RandomStream rng = master.split(static_cast<std::uint64_t>(i));
    try {
      const LossEstimate est =
          config.loss == SweepLoss::pinn
              ? pinn_loss(target, params, config.n_mc, rng)
              : wgs_loss_single(target, params, config.test, config.n_mc, rng);
      point.ok = true;
      point.loss = est.value;
      point.std_error = est.std_error;
    } catch (const std::invalid_argument& bad_point) {
      point.ok = false;
      point.error = bad_point.what();
    }
    out.push_back(std::move(point));
  }
  return out;
}

void write_sweep_csv(const std::string& path, const MixtureTarget& target,
                     const SweepConfig& config, const std::vector<SweepPoint>& points) {
  std::ostringstream fingerprint;
  fingerprint << static_cast<int>(config.loss) << '|' << static_cast<int>(config.axis)
              << '|' << config.n_mc << '|' << config.seed << '|' << target.mu_star
              << '|' << target.w_star << '|' << config.test.alpha << '|'
              << config.test.kappa2;
  for (double v : config.values) fingerprint << '|' << v;
  std::vector<std::string> comments = io::header_lines(
      "landscape_sweep", io::hex64(io::fnv1a(fingerprint.str())), config.seed);
  comments.push_back(std::string("loss: ") +
                     (config.loss == SweepLoss::pinn ? "pinn" : "wgs"));
  const char* axis_names[] = {"theta_w", "theta_mu", "theta_sigma"};
  comments.push_back(std::string("axis: ") + axis_names[static_cast<int>(config.axis)]);
  comments.push_back("mu_star: " + io::format_double(target.mu_star));
  comments.push_back("w_star: " + io::format_double(target.w_star));
  comments.push_back("n_mc: " + std::to_string(config.n_mc));
  if (config.loss == SweepLoss::wgs) {
    comments.push_back("test_alpha: " + io::format_double(config.test.alpha));
    comments.push_back("test_kappa2: " + io::format_double(config.test.kappa2));
  }

  io::CsvWriter csv;
  csv.open(path, comments, {"theta", "loss", "mc_std", "status"});
  for (const SweepPoint& point : points) {
    std::string status = point.ok ? "ok" : point.error;
    for (char& ch : status)
      if (ch == ',') ch = ';';
    csv.row({io::format_double(point.theta),
             point.ok ? io::format_double(point.loss) : std::string(),
             point.ok ? io::format_double(point.std_error) : std::string(), status});
  }
  csv.close();

  std::ostringstream plot;
  plot << "set datafile separator ','\n"
       << "set xlabel '" << axis_names[static_cast<int>(config.axis)] << "'\n"
       << "set ylabel 'loss'\n"
       << "plot '" << path << "' using 1:2:3 with yerrorlines title '"
       << (config.loss == SweepLoss::pinn ? "pinn" : "wgs") << "'\n";
  io::write_text_file(path + ".gp", plot.str());
}

}  // namespace wgs
