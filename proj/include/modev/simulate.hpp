#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "modev/grid_path.hpp"
#include "modev/model.hpp"
#include "modev/schedule.hpp"

namespace modev {

/// One run of the controlled recursion under an exponential-tilt schedule.
struct ControlledTrajectory {
  int n = 0;
  double a = 0.0;              ///< a(n)
  double amplification = 0.0;  ///< a(n) sqrt(n)
  Mat xbar;                    ///< d x (n+1)
  Mat ybar;                    ///< d x (n+1)
  Mat noiseless;               ///< X^{n,0}, d x (n+1)
  Mat noise;                   ///< realized noises, d x n
  Mat tilt;                    ///< alpha_i, d x n
  Vec log_lr_increment;        ///< H_c(Xbar_i, alpha_i) - <noise_i, alpha_i>
  Mat cond_mean;               ///< w^n(i/n) = tilt mean at (Xbar_i, alpha_i), d x n

  int dim() const { return static_cast<int>(xbar.rows()); }
  GridPath y_path() const { return GridPath(ybar); }
  double log_likelihood_ratio() const { return log_lr_increment.sum(); }
};

/// Allocation-free sampler for the controlled pair (Xbar, Ybar) at fixed n.
/// X^{n,0} and b(X^{n,0}) are computed once; each replication draws its
/// noises from the counter-based stream (seed, replication, step).
class PathSampler {
 public:
  PathSampler(const ModelSpec& spec, int n);

  struct Workspace {
    Vec x, b, alpha, noise, mean;
    GridPath ypath;  ///< Ybar nodes of the last run
  };

  Workspace make_workspace() const;

  /// Fills log H_c(alpha_i) for frozen schedules of state-independent
  /// kernels so runs skip the per-step mgf call, and checks every tilt
  /// against the mgf radius.
  void prepare(ControlSchedule& schedule) const;

  /// One replication. Writes Ybar into ws.ypath and returns the log
  /// likelihood ratio. Records everything into `record` when non-null.
  /// With `noises` (d x n) the draws are taken from it instead of the RNG.
  double run(const ControlSchedule& schedule, std::uint64_t seed, std::int64_t replication,
             Workspace& ws, ControlledTrajectory* record = nullptr,
             const Mat* noises = nullptr) const;

  const ModelSpec& spec() const { return spec_; }
  int n() const { return n_; }
  double a() const { return a_; }
  double amplification() const { return amp_; }
  const GridPath& noiseless() const { return x0_; }

 private:
  double run_scalar(const ControlSchedule& schedule, std::uint64_t seed, std::int64_t replication,
                    Workspace& ws, const Mat* noises) const;

  ModelSpec spec_;
  int n_;
  double a_;
  double amp_;
  GridPath x0_;
  Mat b0_;  ///< b(X^{n,0}_i), d x n
};

/// N independent Y^n paths (uncontrolled).
std::vector<GridPath> simulate_y(const ModelSpec& spec, int n, std::int64_t replications,
                                 std::uint64_t seed, int threads = 1);

ControlledTrajectory simulate_controlled(const ModelSpec& spec, const ControlSchedule& schedule,
                                         int n, std::uint64_t seed, std::int64_t replication = 0);

/// Same recursion driven by the given noises (d x n) instead of random draws.
ControlledTrajectory replay_controlled(const ModelSpec& spec, const ControlSchedule& schedule,
                                       const Mat& noises);

/// w^n as a right-continuous step function on [0, 1) and its amplification.
struct ConditionalMeans {
  Mat w;      ///< d x n
  Mat w_hat;  ///< a(n) sqrt(n) w
  Vec w_at(double t) const;
  Vec w_hat_at(double t) const;
};

ConditionalMeans conditional_mean_path(const ModelSpec& spec, const ControlSchedule& schedule,
                                       const ControlledTrajectory& trajectory);

/// max_{i <= n} |W_i|, W_i = (a(n)/sqrt(n)) sum_{j<i} (noise_j - w_j).
double martingale_residual(const ControlledTrajectory& trajectory, const ModelSpec& spec, int n);

/// a(n)^2 sum_i R(eta_i || mu_{Xbar_i}), exact for exponential tilts.
double control_cost(const ModelSpec& spec, const ControlSchedule& schedule,
                    const ControlledTrajectory& trajectory);

/// int 1{|w_hat| > c} |w_hat| dt over the recorded steps.
double amplified_mean_tail(const ControlledTrajectory& trajectory, double c);

/// max_i |Ybar_i - a sqrt(n) (Xbar_i - X^{n,0}_i)|.
double identity_defect(const ControlledTrajectory& trajectory);

/// step, xbar*, ybar*, noise*, tilt*, loglr; the terminal row has empty
/// per-step fields.
void write_trajectory_csv(const ControlledTrajectory& trajectory, std::ostream& out);

}  // namespace modev
