#include "modev/importance.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "modev/dynamics.hpp"
#include "modev/errors.hpp"
#include "modev/format.hpp"
#include "modev/parallel.hpp"
#include "modev/spectral.hpp"

namespace modev {

using nlohmann::json;

double default_truncation(const ControlPath& u) { return std::max(10.0 * u.sup_norm(), 1.0); }

std::int64_t minimum_admissible_n(const ModelSpec& spec, double k) {
  if (!(k > 0.0)) throw ArgumentError("truncation level K must be positive");
  const double r = spec.kernel->mgf_radius();
  if (!std::isfinite(r)) return 1;
  const double power = 0.5 - spec.gamma;
  auto admissible = [&](std::int64_t n) { return k * k / spec.amplification(n) < r; };
  const double guess = std::pow(k * k / r, 1.0 / power);
  if (guess > 1e15) throw DomainError("no practical n keeps K^2/(a(n) sqrt(n)) inside the mgf radius");
  std::int64_t n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(guess)));
  while (!admissible(n)) ++n;
  while (n > 1 && admissible(n - 1)) --n;
  return n;
}

ControlSchedule tilt_schedule_from_control(const ModelSpec& spec, const ControlPath& u, double k,
                                           int n, bool feedback) {
  if (!(k > 0.0)) throw ArgumentError("truncation level K must be positive");
  if (n < 1) throw ArgumentError("n must be at least 1");
  if (u.dim() != spec.dim) throw ArgumentError("control dimension does not match the model");
  const NoiseKernel& kernel = *spec.kernel;
  const double amp = spec.amplification(n);
  const double bound = k * k / amp;
  if (!(bound < kernel.mgf_radius())) {
    throw DomainError("n = " + std::to_string(n) + " is too small for K = " + format_double(k) +
                      ": K^2/(a(n) sqrt(n)) = " + format_double(bound) +
                      " reaches the mgf radius " + format_double(kernel.mgf_radius()) +
                      "; minimum admissible n is " + std::to_string(minimum_admissible_n(spec, k)));
  }

  ControlSchedule s;
  s.n = n;
  s.k = k;
  s.source = u;
  s.tilts.resize(spec.dim, n);
  const int stride = std::max(10, (1000 + n - 1) / n);
  const GridPath x0 = lln_limit(spec, n * stride);
  const bool constant_cov = kernel.state_independent();
  Mat inv_sqrt;
  for (int i = 0; i < n; ++i) {
    if (i == 0 || !constant_cov) {
      inv_sqrt = spectral::truncated_inv_sqrt(covariance(kernel, x0.node(i * stride)), k);
    }
    const Vec ui = u.evaluate(static_cast<double>(i) / n);
    s.tilts.col(i) = inv_sqrt * clip_radial(ui, k) / amp;
  }
  if (feedback) {
    s.feedback = true;
    const KernelPtr kp = spec.kernel;
    const ControlPath src = u;
    s.feedback_fn = [kp, src, k, amp, n](int step, const ConstVecRef& xbar, VecRef alpha) {
      const Mat inv = spectral::truncated_inv_sqrt(covariance(*kp, xbar), k);
      alpha = inv * clip_radial(src.evaluate(static_cast<double>(step) / n), k) / amp;
    };
  }
  std::uint64_t h = hash_matrix(u.path().nodes());
  h = hash_combine(h, std::bit_cast<std::uint64_t>(k));
  h = hash_combine(h, static_cast<std::uint64_t>(n));
  s.fingerprint = hash_combine(h, feedback ? 1 : 0);
  return s;
}

Vec sample_tilted(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& alpha,
                  RngStream& rng) {
  if (alpha.size() != kernel.dim() || x.size() != kernel.dim()) {
    throw ArgumentError("sample_tilted: dimension mismatch");
  }
  if (alpha.norm() >= kernel.mgf_radius()) {
    throw DomainError("tilt " + format_vector(alpha) + " is outside the mgf radius " +
                      format_double(kernel.mgf_radius()));
  }
  Vec out(kernel.dim());
  kernel.sample_tilted_into(x, alpha, rng, out);
  return out;
}

double log_likelihood_ratio(const ControlledTrajectory& trajectory) {
  return trajectory.log_likelihood_ratio();
}

// ---------------------------------------------------------------------------
// Events

bool Event::contains(const GridPath& y) const {
  switch (kind) {
    case Kind::TerminalGe: return y.terminal()(0) >= c;
    case Kind::TerminalLe: return y.terminal()(0) <= c;
    case Kind::HalfSpace: return v.dot(y.terminal()) >= c;
    case Kind::SupNormGe: return y.sup_norm() >= c;
    case Kind::Always: return true;
    case Kind::Custom: return predicate(y);
  }
  return false;
}

std::string Event::describe() const {
  switch (kind) {
    case Kind::TerminalGe: return "terminal>=" + format_double(c);
    case Kind::TerminalLe: return "terminal<=" + format_double(c);
    case Kind::HalfSpace: {
      std::string s = "halfspace ";
      for (Eigen::Index k = 0; k < v.size(); ++k) s += format_double(v(k)) + ",";
      return s + format_double(c);
    }
    case Kind::SupNormGe: return "supnorm>=" + format_double(c);
    case Kind::Always: return "always";
    case Kind::Custom: return label;
  }
  return label;
}

Event Event::terminal_ge(double c) {
  Event e;
  e.kind = Kind::TerminalGe;
  e.c = c;
  return e;
}

Event Event::terminal_le(double c) {
  Event e;
  e.kind = Kind::TerminalLe;
  e.c = c;
  return e;
}

Event Event::halfspace(Vec v, double c) {
  Event e;
  e.kind = Kind::HalfSpace;
  e.v = std::move(v);
  e.c = c;
  return e;
}

Event Event::supnorm_ge(double c) {
  Event e;
  e.kind = Kind::SupNormGe;
  e.c = c;
  return e;
}

Event Event::always() { return Event{}; }

Event Event::custom(std::string label, std::function<bool(const GridPath&)> predicate) {
  Event e;
  e.kind = Kind::Custom;
  e.label = std::move(label);
  e.predicate = std::move(predicate);
  return e;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& event) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) {
    throw ConfigError("cannot read number '" + t + "' in event '" + event + "'");
  }
  return value;
}

}  // namespace

Event parse_event(const std::string& text, int dim) {
  const std::string t = trim(text);
  auto after = [&](const std::string& prefix) -> std::optional<std::string> {
    if (t.rfind(prefix, 0) == 0) return t.substr(prefix.size());
    return std::nullopt;
  };
  if (auto rest = after("terminal>=")) return Event::terminal_ge(parse_number(*rest, t));
  if (auto rest = after("terminal<=")) return Event::terminal_le(parse_number(*rest, t));
  if (auto rest = after("supnorm>=")) return Event::supnorm_ge(parse_number(*rest, t));
  if (t == "always") return Event::always();
  if (auto rest = after("halfspace")) {
    std::string body = *rest;
    std::replace_if(body.begin(), body.end(), [](char ch) { return ch == ',' || ch == ';'; }, ' ');
    std::istringstream in(body);
    std::vector<double> numbers;
    std::string tok;
    while (in >> tok) numbers.push_back(parse_number(tok, t));
    if (static_cast<int>(numbers.size()) != dim + 1) {
      throw ConfigError("event '" + t + "' needs " + std::to_string(dim) +
                        " normal components followed by the threshold");
    }
    Vec v(dim);
    for (int k = 0; k < dim; ++k) v(k) = numbers[k];
    if (v.isZero(0.0)) throw ConfigError("half-space normal must be nonzero in '" + t + "'");
    return Event::halfspace(std::move(v), numbers.back());
  }
  throw ConfigError("unknown event '" + t +
                    "'; expected terminal>=c, terminal<=c, halfspace v,c, supnorm>=c or always");
}

RateSolution event_rate(const LinearizedFlow& flow, const Event& event) {
  const int d = flow.dim();
  switch (event.kind) {
    case Event::Kind::TerminalGe: return halfspace_rate(flow, Vec::Unit(d, 0), event.c);
    case Event::Kind::TerminalLe: return halfspace_rate(flow, -Vec::Unit(d, 0), -event.c);
    case Event::Kind::HalfSpace: return halfspace_rate(flow, event.v, event.c);
    case Event::Kind::SupNormGe: return exit_rate(flow, event.c);
    case Event::Kind::Always: return halfspace_rate(flow, Vec::Unit(d, 0), 0.0);
    case Event::Kind::Custom: break;
  }
  throw ArgumentError("no rate is available for custom event '" + event.label + "'");
}

// ---------------------------------------------------------------------------
// Estimators

namespace {

struct Replication {
  double log_lr = 0.0;
  double log_term = -kInf;  // log of the weighted summand, -inf when it is zero
};

// Runs N replications; `term` maps (Ybar path, log LR) to the log summand.
std::vector<Replication> run_replications(
    const ModelSpec& spec, ControlSchedule& schedule, std::int64_t replications,
    std::uint64_t seed, int threads,
    const std::function<double(const GridPath&, double)>& term) {
  if (replications < 2) throw ArgumentError("N must be at least 2");
  const PathSampler sampler(spec, schedule.n);
  sampler.prepare(schedule);
  const int workers = std::max(1, threads);
  std::vector<PathSampler::Workspace> ws(workers, sampler.make_workspace());
  std::vector<Replication> out(static_cast<std::size_t>(replications));
  parallel_for(replications, workers, [&](std::int64_t r, int w) {
    const double llr = sampler.run(schedule, seed, r, ws[w]);
    out[static_cast<std::size_t>(r)] = {llr, term(ws[w].ypath, llr)};
  });
  return out;
}

// Weighted-mean statistics computed in log space, reduced in index order.
struct LogMoments {
  double log_mean = -kInf;
  double variance = 0.0;       // sample variance of the summands
  double rel_std_error = kInf;  // std error / mean
  double ess = 0.0;
  std::int64_t nonzero = 0;
};

LogMoments log_moments(const std::vector<Replication>& reps) {
  const auto n = static_cast<double>(reps.size());
  LogMoments m;
  double shift = -kInf;
  for (const auto& r : reps) {
    if (r.log_term > -kInf) {
      ++m.nonzero;
      shift = std::max(shift, r.log_term);
    }
  }
  if (m.nonzero == 0) return m;
  double s1 = 0.0;
  double s2 = 0.0;
  for (const auto& r : reps) {
    if (r.log_term == -kInf) continue;
    const double w = std::exp(r.log_term - shift);
    s1 += w;
    s2 += w * w;
  }
  const double mean = s1 / n;
  const double var_scaled = std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0));
  m.log_mean = shift + std::log(mean);
  m.variance = var_scaled * std::exp(2.0 * shift);
  m.rel_std_error = std::sqrt(var_scaled / n) / mean;
  m.ess = s1 * s1 / s2;
  return m;
}

void fill_weight_diagnostics(const std::vector<Replication>& reps, ISEstimate& est) {
  const auto n = static_cast<double>(reps.size());
  double w1 = 0.0, w2 = 0.0, l1 = 0.0, l2 = 0.0;
  for (const auto& r : reps) {
    const double w = std::exp(r.log_lr);
    w1 += w;
    w2 += w * w;
    l1 -= r.log_lr;
    l2 += r.log_lr * r.log_lr;
  }
  est.mean_weight = w1 / n;
  est.mean_weight_std_error = std::sqrt(std::max(0.0, (w2 - w1 * w1 / n) / (n - 1.0)) / n);
  est.mean_neg_log_lr = l1 / n;
  est.neg_log_lr_std_error = std::sqrt(std::max(0.0, (l2 - l1 * l1 / n) / (n - 1.0)) / n);
}

ControlSchedule schedule_for(const ModelSpec& spec, const ControlPath& u, double k, int n) {
  return tilt_schedule_from_control(spec, u, k, n);
}

}  // namespace

ISEstimate is_probability(const ModelSpec& spec, const Event& event, ControlSchedule schedule,
                          std::int64_t replications, std::uint64_t seed,
                          const RunOptions& options) {
  const auto reps = run_replications(
      spec, schedule, replications, seed, options.threads,
      [&](const GridPath& y, double llr) { return event.contains(y) ? llr : -kInf; });
  const LogMoments m = log_moments(reps);
  ISEstimate est;
  est.kind = "probability";
  est.N = replications;
  est.n = schedule.n;
  est.seed = seed;
  est.hits = m.nonzero;
  est.fingerprint = hash_combine(schedule.fingerprint, seed);
  fill_weight_diagnostics(reps, est);
  if (m.nonzero == 0) {
    est.estimate = 0.0;
    est.log_estimate = -kInf;
    est.relative_error = kInf;
    est.degenerate = true;
    return est;
  }
  est.log_estimate = m.log_mean;
  est.estimate = std::exp(m.log_mean);
  est.weight_variance = m.variance;
  est.relative_error = m.rel_std_error;
  est.std_error = est.estimate * m.rel_std_error;
  est.ci_half_width = 1.96 * est.std_error;
  est.ess = m.ess;
  return est;
}

ISEstimate is_probability(const ModelSpec& spec, const Event& event, const ControlPath& u,
                          double k, int n, std::int64_t replications, std::uint64_t seed,
                          const RunOptions& options) {
  return is_probability(spec, event, schedule_for(spec, u, k, n), replications, seed, options);
}

ISEstimate is_laplace(const ModelSpec& spec, const PathFunctional& f, ControlSchedule schedule,
                      std::int64_t replications, std::uint64_t seed, const RunOptions& options) {
  const double a2 = spec.a(schedule.n) * spec.a(schedule.n);
  const auto reps = run_replications(
      spec, schedule, replications, seed, options.threads,
      [&](const GridPath& y, double llr) { return -f.value(y) / a2 + llr; });
  const LogMoments m = log_moments(reps);
  if (m.nonzero == 0 || !std::isfinite(m.log_mean)) {
    throw NumericalError("is_laplace: the inner estimate underflowed to zero");
  }
  ISEstimate est;
  est.kind = "laplace";
  est.N = replications;
  est.n = schedule.n;
  est.seed = seed;
  est.hits = m.nonzero;
  est.fingerprint = hash_combine(schedule.fingerprint, seed);
  fill_weight_diagnostics(reps, est);
  est.log_estimate = m.log_mean;
  est.estimate = -a2 * m.log_mean;
  est.weight_variance = m.variance;
  est.std_error = a2 * m.rel_std_error;
  est.ci_half_width = 1.96 * est.std_error;
  est.relative_error = est.estimate != 0.0 ? est.std_error / std::abs(est.estimate)
                                           : (est.std_error == 0.0 ? 0.0 : kInf);
  est.ess = m.ess;
  est.approximate_ci = true;
  return est;
}

ISEstimate is_laplace(const ModelSpec& spec, const PathFunctional& f, const ControlPath& u,
                      double k, int n, std::int64_t replications, std::uint64_t seed,
                      const RunOptions& options) {
  return is_laplace(spec, f, schedule_for(spec, u, k, n), replications, seed, options);
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json ISEstimate::to_json() const {
  return {{"kind", kind},
          {"estimate", finite_or_null(estimate)},
          {"log_estimate", finite_or_null(log_estimate)},
          {"weight_variance", finite_or_null(weight_variance)},
          {"std_error", finite_or_null(std_error)},
          {"ci_half_width", finite_or_null(ci_half_width)},
          {"relative_error", finite_or_null(relative_error)},
          {"ess", ess},
          {"hits", hits},
          {"N", N},
          {"n", n},
          {"seed", seed},
          {"degenerate", degenerate},
          {"approximate_ci", approximate_ci},
          {"mean_weight", finite_or_null(mean_weight)},
          {"mean_weight_std_error", finite_or_null(mean_weight_std_error)},
          {"fingerprint", format_fingerprint(fingerprint)}};
}

}  // namespace modev
