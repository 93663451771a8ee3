#include "modev/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "modev/dynamics.hpp"
#include "modev/errors.hpp"
#include "modev/format.hpp"
#include "modev/kernel.hpp"
#include "modev/parallel.hpp"

namespace modev {

PathSampler::PathSampler(const ModelSpec& spec, int n)
    : spec_(spec), n_(n), a_(spec.a(n)), amp_(spec.amplification(n)), x0_(noiseless_path(spec, n)) {
  if (n < 1) throw ArgumentError("n must be at least 1");
  b0_.resize(spec.dim, n);
  for (int i = 0; i < n; ++i) spec.drift->value_into(x0_.node(i), b0_.col(i));
}

PathSampler::Workspace PathSampler::make_workspace() const {
  const int d = spec_.dim;
  Workspace ws;
  ws.x = Vec::Zero(d);
  ws.b = Vec::Zero(d);
  ws.alpha = Vec::Zero(d);
  ws.noise = Vec::Zero(d);
  ws.mean = Vec::Zero(d);
  ws.ypath = GridPath(Mat::Zero(d, n_ + 1));
  return ws;
}

void PathSampler::prepare(ControlSchedule& schedule) const {
  if (schedule.n != n_) {
    throw ArgumentError("schedule has " + std::to_string(schedule.n) + " steps, sampler expects " +
                        std::to_string(n_));
  }
  if (schedule.feedback) return;
  if (schedule.dim() != spec_.dim) throw ArgumentError("schedule dimension does not match the model");
  const NoiseKernel& kernel = *spec_.kernel;
  const double radius = kernel.mgf_radius();
  for (int i = 0; i < n_; ++i) {
    if (schedule.tilts.col(i).norm() >= radius) {
      throw DomainError("tilt at step " + std::to_string(i) + " has norm " +
                        format_double(schedule.tilts.col(i).norm()) + ", outside the mgf radius " +
                        format_double(radius));
    }
  }
  if (!kernel.state_independent()) return;
  schedule.frozen_log_mgf.resize(n_);
  for (int i = 0; i < n_; ++i) {
    schedule.frozen_log_mgf(i) = log_mgf(kernel, spec_.x0, schedule.tilts.col(i));
  }
}

double PathSampler::run(const ControlSchedule& schedule, std::uint64_t seed,
                        std::int64_t replication, Workspace& ws, ControlledTrajectory* record,
                        const Mat* noises) const {
  const NoiseKernel& kernel = *spec_.kernel;
  const Drift& drift = *spec_.drift;
  const double inv_n = 1.0 / n_;
  const double scale = a_ / std::sqrt(static_cast<double>(n_));
  const double radius = kernel.mgf_radius();
  const bool untilted = schedule.is_zero();
  const bool cached = schedule.frozen_log_mgf.size() == n_;
  Mat& y = ws.ypath.nodes();
  if (schedule.n != n_) throw ArgumentError("schedule length does not match n");

  if (record) {
    const int d = spec_.dim;
    record->n = n_;
    record->a = a_;
    record->amplification = amp_;
    record->xbar.resize(d, n_ + 1);
    record->ybar.resize(d, n_ + 1);
    record->noiseless = x0_.nodes();
    record->noise.resize(d, n_);
    record->tilt.resize(d, n_);
    record->log_lr_increment.resize(n_);
    record->cond_mean.resize(d, n_);
    record->xbar.col(0) = spec_.x0;
  }

  if (spec_.dim == 1 && !record && !schedule.feedback) {
    return run_scalar(schedule, seed, replication, ws, noises);
  }

  ws.x = spec_.x0;
  y.col(0).setZero();
  double log_lr = 0.0;
  for (int i = 0; i < n_; ++i) {
    schedule.tilt_into(i, ws.x, ws.alpha);
    if (noises) {
      ws.noise = noises->col(i);
    } else {
      RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(replication),
                                        static_cast<std::uint64_t>(i));
      if (untilted) {
        kernel.sample_into(ws.x, rng, ws.noise);
      } else {
        if (schedule.feedback && ws.alpha.norm() >= radius) {
          throw DomainError("tilt at step " + std::to_string(i) + " is outside the mgf radius " +
                            format_double(radius));
        }
        kernel.sample_tilted_into(ws.x, ws.alpha, rng, ws.noise);
      }
    }
    double inc = 0.0;
    if (!untilted) {
      const double h = cached ? schedule.frozen_log_mgf(i) : kernel.log_mgf_value(ws.x, ws.alpha);
      inc = h - ws.noise.dot(ws.alpha);
      log_lr += inc;
    }
    drift.value_into(ws.x, ws.b);
    if (record) {
      record->noise.col(i) = ws.noise;
      record->tilt.col(i) = ws.alpha;
      record->log_lr_increment(i) = inc;
      kernel.tilt_mean_into(ws.x, ws.alpha, ws.mean);
      record->cond_mean.col(i) = ws.mean;
    }
    y.col(i + 1) = y.col(i) + scale * (ws.b - b0_.col(i)) + scale * ws.noise;
    ws.x += inv_n * (ws.b + ws.noise);
    if (record) record->xbar.col(i + 1) = ws.x;
  }
  if (!std::isfinite(log_lr) || !ws.x.allFinite()) {
    throw NumericalError("non-finite state or likelihood ratio in replication " +
                         std::to_string(replication));
  }
  if (record) record->ybar = y;
  return log_lr;
}

double PathSampler::run_scalar(const ControlSchedule& schedule, std::uint64_t seed,
                               std::int64_t replication, Workspace& ws, const Mat* noises) const {
  const NoiseKernel& kernel = *spec_.kernel;
  const Drift& drift = *spec_.drift;
  const double inv_n = 1.0 / n_;
  const double scale = a_ / std::sqrt(static_cast<double>(n_));
  const bool untilted = schedule.is_zero();
  const bool cached = schedule.frozen_log_mgf.size() == n_;
  double* y = ws.ypath.nodes().data();
  const double* tilt = schedule.tilts.data();
  const double* b0 = b0_.data();
  double x = spec_.x0(0);
  double yi = 0.0;
  double log_lr = 0.0;
  y[0] = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double alpha = tilt[i];
    double noise;
    if (noises) {
      noise = (*noises)(0, i);
    } else {
      RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(replication),
                                        static_cast<std::uint64_t>(i));
      noise = kernel.sample_tilted_1d(x, alpha, rng);
    }
    if (!untilted) {
      const double h = cached ? schedule.frozen_log_mgf(i) : kernel.log_mgf_1d(x, alpha);
      log_lr += h - noise * alpha;
    }
    const double b = drift.value_1d(x);
    yi = yi + scale * (b - b0[i]) + scale * noise;
    y[i + 1] = yi;
    x += inv_n * (b + noise);
  }
  if (!std::isfinite(log_lr) || !std::isfinite(x)) {
    throw NumericalError("non-finite state or likelihood ratio in replication " +
                         std::to_string(replication));
  }
  ws.x(0) = x;
  return log_lr;
}

std::vector<GridPath> simulate_y(const ModelSpec& spec, int n, std::int64_t replications,
                                 std::uint64_t seed, int threads) {
  if (replications < 1) throw ArgumentError("replications must be at least 1");
  const PathSampler sampler(spec, n);
  const ControlSchedule zero = ControlSchedule::zero(spec.dim, n);
  std::vector<GridPath> paths(static_cast<std::size_t>(replications));
  const int workers = std::max(1, threads);
  std::vector<PathSampler::Workspace> ws(workers, sampler.make_workspace());
  parallel_for(replications, workers, [&](std::int64_t r, int w) {
    sampler.run(zero, seed, r, ws[w]);
    paths[static_cast<std::size_t>(r)] = ws[w].ypath;
  });
  return paths;
}

ControlledTrajectory simulate_controlled(const ModelSpec& spec, const ControlSchedule& schedule,
                                         int n, std::uint64_t seed, std::int64_t replication) {
  const PathSampler sampler(spec, n);
  auto ws = sampler.make_workspace();
  ControlledTrajectory traj;
  sampler.run(schedule, seed, replication, ws, &traj);
  return traj;
}

ControlledTrajectory replay_controlled(const ModelSpec& spec, const ControlSchedule& schedule,
                                       const Mat& noises) {
  if (noises.rows() != spec.dim || noises.cols() != schedule.n) {
    throw ArgumentError("noises must be d x n");
  }
  const PathSampler sampler(spec, schedule.n);
  auto ws = sampler.make_workspace();
  ControlledTrajectory traj;
  sampler.run(schedule, 0, 0, ws, &traj, &noises);
  return traj;
}

namespace {

int step_index(double t, int n) {
  if (!(t >= 0.0 && t <= 1.0)) throw ArgumentError("t must lie in [0, 1]");
  return std::min(n - 1, static_cast<int>(std::floor(t * n)));
}

}  // namespace

Vec ConditionalMeans::w_at(double t) const {
  return w.col(step_index(t, static_cast<int>(w.cols())));
}

Vec ConditionalMeans::w_hat_at(double t) const {
  return w_hat.col(step_index(t, static_cast<int>(w_hat.cols())));
}

ConditionalMeans conditional_mean_path(const ModelSpec& spec, const ControlSchedule& schedule,
                                       const ControlledTrajectory& trajectory) {
  if (schedule.n != trajectory.n) throw ArgumentError("schedule and trajectory lengths differ");
  ConditionalMeans out;
  out.w.resize(spec.dim, trajectory.n);
  for (int i = 0; i < trajectory.n; ++i) {
    out.w.col(i) = tilt_mean(*spec.kernel, trajectory.xbar.col(i), trajectory.tilt.col(i));
  }
  out.w_hat = trajectory.amplification * out.w;
  return out;
}

double martingale_residual(const ControlledTrajectory& trajectory, const ModelSpec& spec, int n) {
  if (trajectory.n != n) throw ArgumentError("trajectory length does not match n");
  const double scale = spec.a(n) / std::sqrt(static_cast<double>(n));
  Vec w = Vec::Zero(spec.dim);
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    w += scale * (trajectory.noise.col(i) - trajectory.cond_mean.col(i));
    best = std::max(best, w.norm());
  }
  return best;
}

double control_cost(const ModelSpec& spec, const ControlSchedule& schedule,
                    const ControlledTrajectory& trajectory) {
  if (schedule.n != trajectory.n) throw ArgumentError("schedule and trajectory lengths differ");
  double total = 0.0;
  for (int i = 0; i < trajectory.n; ++i) {
    total += tilt_relative_entropy(*spec.kernel, trajectory.xbar.col(i), trajectory.tilt.col(i));
  }
  return trajectory.a * trajectory.a * total;
}

double amplified_mean_tail(const ControlledTrajectory& trajectory, double c) {
  double total = 0.0;
  for (int i = 0; i < trajectory.n; ++i) {
    const double norm = trajectory.amplification * trajectory.cond_mean.col(i).norm();
    if (norm > c) total += norm;
  }
  return total / trajectory.n;
}

double identity_defect(const ControlledTrajectory& trajectory) {
  const Mat diff =
      trajectory.ybar - trajectory.amplification * (trajectory.xbar - trajectory.noiseless);
  return diff.cwiseAbs().maxCoeff();
}

void write_trajectory_csv(const ControlledTrajectory& trajectory, std::ostream& out) {
  const int d = trajectory.dim();
  out << "step";
  for (const char* name : {"xbar", "ybar", "noise", "tilt"}) {
    for (int k = 0; k < d; ++k) out << ',' << name << k;
  }
  out << ",loglr\n";
  for (int i = 0; i <= trajectory.n; ++i) {
    out << i;
    for (int k = 0; k < d; ++k) out << ',' << format_double(trajectory.xbar(k, i));
    for (int k = 0; k < d; ++k) out << ',' << format_double(trajectory.ybar(k, i));
    const bool last = i == trajectory.n;
    for (int k = 0; k < d; ++k) out << ',' << (last ? "" : format_double(trajectory.noise(k, i)));
    for (int k = 0; k < d; ++k) out << ',' << (last ? "" : format_double(trajectory.tilt(k, i)));
    out << ',' << (last ? "" : format_double(trajectory.log_lr_increment(i))) << '\n';
  }
}

}  // namespace modev
