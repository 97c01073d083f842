#include "wgs/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "wgs/io.hpp"
#include "wgs/tape.hpp"

#include "json.hpp"

namespace wgs {

namespace {

double stable_sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

Vector row_norms(const Matrix& x) { return x.rowwise().norm(); }

double median_of(Vector v) {
  const Eigen::Index n = v.size();
  if (n == 0) return 0.0;
  std::nth_element(v.data(), v.data() + n / 2, v.data() + n);
  double hi = v(n / 2);
  if (n % 2 == 1) return hi;
  std::nth_element(v.data(), v.data() + n / 2 - 1, v.data() + n / 2);
  return 0.5 * (hi + v(n / 2 - 1));
}

/**
 * Fused evaluation of mu_j = (1/N) sum_i L*phi_j(x_i) for a mini-batch of
 * Gaussian test functions, sharing the batched distance/drift products
 * across all kernels:
 *   L*phi(x) = v * A,  v = exp(-|u|^2/(2 kappa^2)),  u = x - zeta,
 *   A = -b.u/kappa^2 + u^T D u/kappa^4 - tr(D)/kappa^2.
 */
struct WeakForward {
  Matrix E;   // N x m kernel values v_ij (underflow-cut to exact zero)
  Matrix A;   // N x m polynomial factors A_ij
  Matrix B;   // N x d drift rows b(x_i)
  Vector mu;  // m sample means
  double value = 0.0;
};

void check_finite_or_throw(const WeakForward& fwd, const Matrix& x,
                           const Matrix& centers, const Vector& kappas) {
  if (std::isfinite(fwd.value)) return;
  std::ostringstream msg;
  msg << "weak loss is not finite: value=" << fwd.value
      << " kappa_min=" << kappas.minCoeff() << " kappa_max=" << kappas.maxCoeff()
      << " max_center_norm=" << centers.rowwise().norm().maxCoeff()
      << " max_x_norm=" << x.rowwise().norm().maxCoeff();
  throw TrainingDivergence(msg.str());
}

WeakForward weak_forward(const Matrix& x, const Matrix& centers, const Vector& kappas,
                         const SdeSystem& system) {
  const Eigen::Index m = centers.rows();
  if (centers.cols() != x.cols())
    throw std::invalid_argument("weak loss: center/state dimension mismatch");
  if (kappas.size() != m)
    throw std::invalid_argument("weak loss: one kappa per test function required");
  if ((kappas.array() <= 0.0).any())
    throw std::invalid_argument("weak loss: kappas must be positive");
  if (!system.constant_diffusion)
    throw std::invalid_argument(
        "weak loss: trainer requires a constant diffusion matrix");

  const Matrix& D = system.constant_D;
  const double trace_d = D.trace();
  const Eigen::ArrayXd invk2 = kappas.array().square().inverse();
  const Eigen::ArrayXd invk4 = invk2.square();

  WeakForward fwd;
  fwd.B = system.drift_batch(x);

  // |x_i - zeta_j|^2 via the GEMM expansion; cancellation can leave tiny
  // negatives, clamp since it feeds an exponential.
  const Vector xsq = x.rowwise().squaredNorm();
  const Vector csq = centers.rowwise().squaredNorm();
  Matrix usq = -2.0 * (x * centers.transpose());
  usq.colwise() += xsq;
  usq.rowwise() += csq.transpose();
  usq = usq.cwiseMax(0.0);

  // u^T D u and b.u through the same expansion.
  const Matrix dx = x * D;  // D symmetric: row i is (D x_i)^T
  Matrix udu = -2.0 * (dx * centers.transpose());
  udu.colwise() += dx.cwiseProduct(x).rowwise().sum();
  udu.rowwise() += (centers * D).cwiseProduct(centers).rowwise().sum().transpose();

  Matrix bu = -(fwd.B * centers.transpose());
  bu.colwise() += fwd.B.cwiseProduct(x).rowwise().sum();

  const Eigen::ArrayXXd expo = (-0.5) * (usq.array().rowwise() * invk2.transpose());
  fwd.E = (expo < -700.0).select(0.0, expo.exp()).matrix();

  fwd.A = ((udu.array().rowwise() * invk4.transpose()) -
           (bu.array().rowwise() * invk2.transpose()))
              .matrix();
  fwd.A.array().rowwise() -= trace_d * invk2.transpose();

  fwd.mu = fwd.E.cwiseProduct(fwd.A).colwise().mean().transpose();
  fwd.value = fwd.mu.squaredNorm() / static_cast<double>(m);
  check_finite_or_throw(fwd, x, centers, kappas);
  return fwd;
}

/**
 * d(weak)/dx for the fused node.  With u = x_i - zeta_j and
 * c_j = gbar * 2 mu_j / (m N):
 *   xbar_i = sum_j c_j v_ij [ -(J_b(x_i)^T u + b_i)/k^2 + 2 D u/k^4 - u A_ij/k^2 ]
 * assembled from three column-scaled GEMMs against the centers.
 */
Matrix weak_backward(const WeakForward& fwd, const Matrix& x, const Matrix& centers,
                     const Vector& kappas, const SdeSystem& system, double gbar) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = centers.rows();
  const Matrix& D = system.constant_D;
  const Eigen::ArrayXd invk2 = kappas.array().square().inverse();
  const Eigen::ArrayXd invk4 = invk2.square();

  const Eigen::ArrayXd coef =
      (2.0 * gbar / static_cast<double>(m * n)) * fwd.mu.array();
  const Matrix p = (fwd.E.array().rowwise() * coef.transpose()).matrix();

  const Matrix pa = (p.array().rowwise() * invk2.transpose()).matrix();
  const Matrix pb = (2.0 * (p.array().rowwise() * invk4.transpose())).matrix();
  const Matrix pg =
      (p.cwiseProduct(fwd.A).array().rowwise() * invk2.transpose()).matrix();

  const Vector s1 = pa.rowwise().sum();
  const Vector s2 = pb.rowwise().sum();
  const Vector s3 = pg.rowwise().sum();

  Matrix r1 = (x.array().colwise() * s1.array()).matrix();
  r1.noalias() -= pa * centers;
  Matrix r2 = (x.array().colwise() * s2.array()).matrix();
  r2.noalias() -= pb * centers;
  Matrix r3 = (x.array().colwise() * s3.array()).matrix();
  r3.noalias() -= pg * centers;

  Matrix xbar = r2 * D - r3;  // D symmetric: (D w)^T = w^T D
  xbar.array() -= fwd.B.array().colwise() * s1.array();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Matrix jac = system.jacobian(x.row(i).transpose());
    xbar.row(i).noalias() -= r1.row(i) * jac;  // row * J == (J^T row^T)^T
  }
  return xbar;
}

struct BoundaryForward {
  Vector p;  // sigmoid values per sample
  double value = 0.0;
};

BoundaryForward boundary_forward(const Matrix& x, const BoundaryParams& bp) {
  if (bp.radii.size() != x.cols() || bp.center.size() != x.cols())
    throw std::invalid_argument("boundary penalty: center/radii dimension mismatch");
  if ((bp.radii.array() <= 0.0).any() || bp.c <= 0.0)
    throw std::invalid_argument("boundary penalty: radii and c must be positive");
  Matrix scaled = x;
  scaled.rowwise() -= bp.center.transpose();
  scaled.array().rowwise() /= bp.radii.transpose().array();
  const Vector q = scaled.rowwise().squaredNorm();
  const double slope = bp.c * bp.rbar2();
  BoundaryForward fwd;
  fwd.p = q.unaryExpr([slope](double qi) { return stable_sigmoid(slope * (qi - 1.0)); });
  fwd.value = fwd.p.mean();
  return fwd;
}

Matrix boundary_backward(const BoundaryForward& fwd, const Matrix& x,
                         const BoundaryParams& bp, double gbar) {
  const double slope = bp.c * bp.rbar2();
  const Eigen::ArrayXd weight = (gbar / static_cast<double>(x.rows())) * slope * 2.0 *
                                (fwd.p.array() * (1.0 - fwd.p.array()));
  Matrix diff = x;
  diff.rowwise() -= bp.center.transpose();
  diff.array().rowwise() /= bp.radii.array().square().transpose();
  return (diff.array().colwise() * weight).matrix();
}

WgsLossValue assemble_value(const WeakForward& weak, double boundary_value,
                            const Matrix& x, const BoundaryParams& bp) {
  WgsLossValue out;
  out.weak = weak.value;
  out.boundary = boundary_value;
  out.total = weak.value + bp.lambda * boundary_value;
  const Vector norms = row_norms(x);
  out.median_x_norm = median_of(norms);
  out.max_x_norm = norms.size() > 0 ? norms.maxCoeff() : 0.0;
  return out;
}

std::string trainer_config_json(const TrainConfig& config, int flow_dim);

}  // namespace

BoundaryParams BoundaryParams::isotropic(double lambda, double c, double radius,
                                         const Vector& center) {
  BoundaryParams bp;
  bp.lambda = lambda;
  bp.c = c;
  bp.center = center;
  bp.radii = Vector::Constant(center.size(), radius);
  return bp;
}

double boundary_penalty(const Matrix& points, const BoundaryParams& boundary) {
  return boundary_forward(points, boundary).value;
}

void TrainConfig::validate(int flow_dim) const {
  if (n_samples <= 0 || n_test <= 0 || n_test_batch <= 0)
    throw std::invalid_argument("TrainConfig: counts must be positive");
  if (n_iters < 0) throw std::invalid_argument("TrainConfig: n_iters must be >= 0");
  if (!(n_test_batch <= n_test && n_test <= n_samples))
    throw std::invalid_argument(
        "TrainConfig: need n_test_batch <= n_test <= n_samples");
  if (boundary.center.size() != flow_dim || boundary.radii.size() != flow_dim)
    throw std::invalid_argument("TrainConfig: boundary center/radii must match dim");
  if ((boundary.radii.array() <= 0.0).any())
    throw std::invalid_argument("TrainConfig: boundary radii must be positive");
  if (boundary.lambda < 0.0 || boundary.c <= 0.0)
    throw std::invalid_argument("TrainConfig: need lambda >= 0 and c > 0");
  if (lr.lr0 <= 0.0 || lr.factor <= 0.0)
    throw std::invalid_argument("TrainConfig: learning rate must be positive");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0)
    throw std::invalid_argument("TrainConfig: Adam betas must be in [0, 1)");
}

WgsLossValue wgs_loss(FlowModel& flow, const Matrix& z_batch, const Matrix& centers,
                      const Vector& kappas, const SdeSystem& system,
                      const BoundaryParams& boundary) {
  Tape tape;
  const Tape::Id z_id = tape.constant(z_batch);
  const Tape::Id x_id = flow.forward_tape(tape, z_id);
  const Matrix& x = tape.value(x_id);

  auto weak = std::make_shared<WeakForward>(weak_forward(x, centers, kappas, system));
  const Tape::Id weak_id = tape.custom(
      Matrix::Constant(1, 1, weak->value), {x_id},
      [weak, x_id, &centers, &kappas, &system](Tape& t, Tape::Id self) {
        const double gbar = t.bar(self)(0, 0);
        if (gbar == 0.0) return;
        t.accumulate(x_id, weak_backward(*weak, t.value(x_id), centers, kappas,
                                         system, gbar));
      });

  auto bnd = std::make_shared<BoundaryForward>(boundary_forward(x, boundary));
  const Tape::Id bnd_id = tape.custom(
      Matrix::Constant(1, 1, bnd->value), {x_id},
      [bnd, x_id, &boundary](Tape& t, Tape::Id self) {
        const double gbar = t.bar(self)(0, 0);
        if (gbar == 0.0) return;
        t.accumulate(x_id, boundary_backward(*bnd, t.value(x_id), boundary, gbar));
      });

  const Tape::Id loss_id = tape.add_scaled(weak_id, bnd_id, boundary.lambda);
  const double total = tape.value(loss_id)(0, 0);
  if (!std::isfinite(total)) check_finite_or_throw(*weak, x, centers, kappas);
  tape.backward(loss_id);

  return assemble_value(*weak, bnd->value, x, boundary);
}

WgsLossValue wgs_loss_value(const FlowModel& flow, const Matrix& z_batch,
                            const Matrix& centers, const Vector& kappas,
                            const SdeSystem& system, const BoundaryParams& boundary) {
  const Matrix x = flow.forward(z_batch);
  const WeakForward weak = weak_forward(x, centers, kappas, system);
  const BoundaryForward bnd = boundary_forward(x, boundary);
  return assemble_value(weak, bnd.value, x, boundary);
}

namespace {

std::string trainer_config_json(const TrainConfig& config, int flow_dim) {
  nlohmann::json j;
  j["dim"] = flow_dim;
  j["n_samples"] = config.n_samples;
  j["n_test"] = config.n_test;
  j["n_test_batch"] = config.n_test_batch;
  j["n_iters"] = config.n_iters;
  j["center_noise"] = {{"gamma", config.center_noise.gamma},
                       {"gamma_end", config.center_noise.gamma_end},
                       {"decay_span", config.center_noise.decay_span},
                       {"exponential", config.center_noise.exponential}};
  std::function<nlohmann::json(const KappaSchedule&)> kappa_json =
      [&](const KappaSchedule& k) {
        nlohmann::json out = {{"kind", static_cast<int>(k.kind)},
                              {"start", k.start},
                              {"end", k.end},
                              {"span", k.span},
                              {"lo", k.lo},
                              {"hi", k.hi}};
        if (!k.group_sizes.empty()) {
          out["group_sizes"] = k.group_sizes;
          out["group_schedules"] = nlohmann::json::array();
          for (const KappaSchedule& g : k.group_schedules)
            out["group_schedules"].push_back(kappa_json(g));
        }
        return out;
      };
  j["kappa"] = kappa_json(config.kappa);
  j["boundary"] = {{"lambda", config.boundary.lambda},
                   {"c", config.boundary.c},
                   {"center", std::vector<double>(config.boundary.center.data(),
                                                  config.boundary.center.data() +
                                                      config.boundary.center.size())},
                   {"radii", std::vector<double>(config.boundary.radii.data(),
                                                 config.boundary.radii.data() +
                                                     config.boundary.radii.size())}};
  j["lr"] = {{"kind", static_cast<int>(config.lr.kind)},
             {"lr0", config.lr.lr0},
             {"factor", config.lr.factor},
             {"span", config.lr.span}};
  j["adam"] = {{"beta1", config.adam_beta1},
               {"beta2", config.adam_beta2},
               {"eps", config.adam_eps}};
  j["seed"] = config.seed;
  return j.dump();
}

std::string checkpoint_path(const std::string& out_dir, const std::string& stem) {
  return out_dir + "/" + stem + ".json";
}

}  // namespace

TrainRecord train(const SdeSystem& system, FlowModel& flow, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.validate(flow.dim);
  if (system.dim != flow.dim)
    throw std::invalid_argument("train: flow/system dimension mismatch");

  TrainRecord record;
  if (config.n_iters == 0) return record;

  const std::string config_hash =
      io::hex64(io::fnv1a(trainer_config_json(config, flow.dim)));

  RandomStream rng(config.seed);
  std::vector<Param*> params;
  flow.collect_params(params);
  AdamState adam;
  adam.beta1 = config.adam_beta1;
  adam.beta2 = config.adam_beta2;
  adam.eps_adam = config.adam_eps;
  adam.lr = config.lr;
  adam.init(params);

  const int snapshot_every =
      config.snapshot_every > 0 ? config.snapshot_every : std::max(1, config.n_iters / 100);
  const double guard_radius = 10.0 * std::sqrt(config.boundary.rbar2());

  io::CsvWriter csv;
  if (!config.out_dir.empty()) {
    io::ensure_directory(config.out_dir);
    std::vector<std::string> columns = {"outer_iter", "inner_iter",   "weak_loss",
                                        "boundary_loss", "kappa_mean", "lr",
                                        "wall_seconds"};
    csv.open(config.out_dir + "/train_record.csv",
             io::header_lines("train_record", config_hash, config.seed), columns);
  }
  io::CsvWriter snap_csv;
  if (!config.out_dir.empty() && hooks.snapshot) {
    std::vector<std::string> columns = {"outer_iter"};
    columns.insert(columns.end(), hooks.metric_names.begin(), hooks.metric_names.end());
    snap_csv.open(config.out_dir + "/snapshots.csv",
                  io::header_lines("train_snapshots", config_hash, config.seed),
                  columns);
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto write_row = [&](const TrainRecord::Row& row) {
    record.rows.push_back(row);
    if (!csv.is_open()) return;
    std::vector<std::string> cells = {
        std::to_string(row.outer_iter),      std::to_string(row.inner_iter),
        io::format_double(row.weak_loss),    io::format_double(row.boundary_loss),
        io::format_double(row.kappa),        io::format_double(row.lr),
        config.deterministic ? std::string() : io::format_double(row.wall_seconds)};
    csv.row(cells);
  };
  auto checkpoint = [&](const std::string& stem) {
    if (config.out_dir.empty()) return;
    save_checkpoint(flow, checkpoint_path(config.out_dir, stem), config.seed,
                    config_hash);
  };

  const int n_batches = (config.n_test + config.n_test_batch - 1) / config.n_test_batch;
  int guard_strikes = 0;
  int inner_counter = 0;
  bool stop_early = false;

  for (int outer = 0; outer < config.n_iters && !stop_early; ++outer) {
    // All stochastic choices for this outer iteration happen up front, on the
    // control stream: base batch, kappas, center selection, center noise.
    const Matrix z = rng.normal_matrix(config.n_samples, flow.dim) * flow.base_std;
    Vector kappas(config.n_test);
    for (int j = 0; j < config.n_test; ++j)
      kappas(j) = kappa_at(config.kappa, outer, kappa_group_of(config.kappa, j), rng);

    const Matrix x_stale = flow.forward(z);
    const Matrix centers =
        select_centers(x_stale, config.n_test, config.center_noise.at(outer), rng);
    // The learning-rate schedule runs on the outer-iteration clock, like the
    // kappa and center-noise schedules; mini-batches within an iteration
    // share the rate.
    const double lr_now = config.lr.at(outer);

    for (int batch = 0; batch < n_batches; ++batch) {
      const int j0 = batch * config.n_test_batch;
      const int j1 = std::min(config.n_test, j0 + config.n_test_batch);
      const Matrix batch_centers = centers.middleRows(j0, j1 - j0);
      const Vector batch_kappas = kappas.segment(j0, j1 - j0);

      for (Param* p : params) p->zero_grad();
      WgsLossValue loss;
      try {
        loss = wgs_loss(flow, z, batch_centers, batch_kappas, system, config.boundary);
        adam_step(params, adam, lr_now);
      } catch (const TrainingDivergence&) {
        record.aborted = true;
        record.abort_reason = "non-finite loss or gradient";
        checkpoint("checkpoint_abort");
        throw;
      }

      TrainRecord::Row row;
      row.outer_iter = outer;
      row.inner_iter = inner_counter++;
      row.weak_loss = loss.weak;
      row.boundary_loss = loss.boundary;
      row.kappa = batch_kappas.mean();
      row.lr = lr_now;
      row.wall_seconds = elapsed();
      write_row(row);

      // Boundary-failure guard: samples drifting far outside the penalty ball
      // for a sustained stretch means lambda is too small for this problem.
      guard_strikes = loss.median_x_norm > guard_radius ? guard_strikes + 1 : 0;
      if (guard_strikes >= 50) {
        record.aborted = true;
        std::ostringstream msg;
        msg << "divergence guard: median |x| = " << loss.median_x_norm << " > 10 r = "
            << guard_radius << " for 50 consecutive inner steps"
            << " (boundary penalty too weak; consider a larger lambda)";
        record.abort_reason = msg.str();
        checkpoint("checkpoint_abort");
        throw TrainingDivergence(record.abort_reason);
      }
    }

    if (hooks.snapshot &&
        ((outer + 1) % snapshot_every == 0 || outer + 1 == config.n_iters)) {
      TrainRecord::Snapshot snap;
      snap.outer_iter = outer;
      snap.metrics = hooks.snapshot(flow, outer);
      if (snap_csv.is_open()) {
        std::vector<std::string> cells = {std::to_string(outer)};
        for (const std::string& name : hooks.metric_names) {
          const auto it = snap.metrics.find(name);
          cells.push_back(it == snap.metrics.end() ? std::string()
                                                   : io::format_double(it->second));
        }
        snap_csv.row(cells);
      }
      if (hooks.early_stop && hooks.early_stop(snap.metrics)) stop_early = true;
      record.snapshots.push_back(std::move(snap));
    }

    if (config.checkpoint_every > 0 && (outer + 1) % config.checkpoint_every == 0) {
      char stem[64];
      std::snprintf(stem, sizeof(stem), "checkpoint_iter%06d", outer + 1);
      checkpoint(stem);
    }
  }

  checkpoint("checkpoint_final");
  return record;
}

}  // namespace wgs
