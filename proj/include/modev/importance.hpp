#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "modev/grid_path.hpp"
#include "modev/model.hpp"
#include "modev/ratefn.hpp"
#include "modev/schedule.hpp"
#include "modev/simulate.hpp"

namespace modev {

/// max(10 max_s |u(s)|, 1): large enough that truncation stays inactive on
/// bounded controls.
double default_truncation(const ControlPath& u);

/// Smallest n with K^2 / (a(n) sqrt(n)) strictly inside the mgf radius
/// (1 for kernels with an everywhere finite mgf).
std::int64_t minimum_admissible_n(const ModelSpec& spec, double k);

/// alpha_i = A_K^{-1/2}(X^0(s_i)) u_K(s_i) / (a(n) sqrt(n)), s_i = i/n.
/// With feedback = true the covariance is taken at Xbar_i instead.
/// Throws DomainError naming the minimum admissible n when K^2/(a sqrt(n))
/// reaches the mgf radius.
ControlSchedule tilt_schedule_from_control(const ModelSpec& spec, const ControlPath& u, double k,
                                           int n, bool feedback = false);

/// One draw from eta(dy) ~ exp<y, alpha> mu_x(dy).
Vec sample_tilted(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& alpha,
                  RngStream& rng);

/// sum_i H_c(Xbar_i, alpha_i) - <noise_i, alpha_i> = log dP/dQ along the path.
double log_likelihood_ratio(const ControlledTrajectory& trajectory);

/// Grid-measurable event on Y^n paths.
struct Event {
  enum class Kind { TerminalGe, TerminalLe, HalfSpace, SupNormGe, Always, Custom };
  Kind kind = Kind::Always;
  Vec v;           ///< half-space normal
  double c = 0.0;  ///< threshold
  std::function<bool(const GridPath&)> predicate;  ///< Custom only
  std::string label;

  bool contains(const GridPath& y) const;
  std::string describe() const;

  static Event terminal_ge(double c);  ///< {Y(1)_0 >= c}
  static Event terminal_le(double c);  ///< {Y(1)_0 <= c}
  static Event halfspace(Vec v, double c);  ///< {<v, Y(1)> >= c}
  static Event supnorm_ge(double c);  ///< {max_i |Y(t_i)| >= c}
  static Event always();
  static Event custom(std::string label, std::function<bool(const GridPath&)> predicate);
};

/// "terminal>=c", "terminal<=c", "halfspace v1;v2;...,c" (or
/// "halfspace v1 v2 ... , c"), "supnorm>=c", "always".
Event parse_event(const std::string& text, int dim);

/// Rate of the event's deterministic counterpart (a half-space, sup-norm or
/// trivial event) together with the minimizing control.
RateSolution event_rate(const LinearizedFlow& flow, const Event& event);

struct RunOptions {
  int threads = 1;
};

struct ISEstimate {
  std::string kind;  ///< "probability" or "laplace"
  double estimate = 0.0;
  double log_estimate = 0.0;  ///< log of the (inner) weighted mean
  double weight_variance = 0.0;
  double std_error = 0.0;
  double ci_half_width = 0.0;
  double relative_error = 0.0;
  double ess = 0.0;
  std::int64_t hits = 0;
  std::int64_t N = 0;
  int n = 0;
  std::uint64_t seed = 0;
  bool degenerate = false;
  bool approximate_ci = false;
  double mean_weight = 0.0;  ///< mean likelihood ratio, should be near 1
  double mean_weight_std_error = 0.0;
  double mean_neg_log_lr = 0.0;  ///< sample mean of -log LR under the tilt
  double neg_log_lr_std_error = 0.0;
  std::uint64_t fingerprint = 0;

  nlohmann::json to_json() const;
};

/// Estimate of P(Y^n in event) by (1/N) sum 1{event}(Ybar) exp(log LR).
ISEstimate is_probability(const ModelSpec& spec, const Event& event, const ControlPath& u,
                          double k, int n, std::int64_t replications, std::uint64_t seed,
                          const RunOptions& options = {});

/// Same estimator with a ready-made schedule.
ISEstimate is_probability(const ModelSpec& spec, const Event& event, ControlSchedule schedule,
                          std::int64_t replications, std::uint64_t seed,
                          const RunOptions& options = {});

/// Estimate of -a(n)^2 log E exp(-F(Y^n)/a(n)^2); the interval comes from
/// the delta method and is flagged approximate.
ISEstimate is_laplace(const ModelSpec& spec, const PathFunctional& f, const ControlPath& u,
                      double k, int n, std::int64_t replications, std::uint64_t seed,
                      const RunOptions& options = {});

ISEstimate is_laplace(const ModelSpec& spec, const PathFunctional& f, ControlSchedule schedule,
                      std::int64_t replications, std::uint64_t seed,
                      const RunOptions& options = {});

}  // namespace modev
