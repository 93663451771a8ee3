#include "modev/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "modev/errors.hpp"
#include "modev/format.hpp"
#include "modev/spectral.hpp"

namespace modev {

namespace {

void check_finite_drift(const ConstVecRef& b, int step, const ConstVecRef& x) {
  if (!b.allFinite()) {
    throw NumericalError("drift is not finite at step " + std::to_string(step) +
                         ", x = " + format_vector(x));
  }
}

Vec rk4_state(const Drift& drift, const ConstVecRef& x, double h) {
  const Vec k1 = drift.value(x);
  const Vec k2 = drift.value(x + 0.5 * h * k1);
  const Vec k3 = drift.value(x + 0.5 * h * k2);
  const Vec k4 = drift.value(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Snap grid-aligned times to their node index.
double snap(double t, int m) {
  const double r = std::round(t * m);
  return std::abs(t * m - r) <= 1e-9 ? r / m : t;
}

}  // namespace

GridPath noiseless_path(const ModelSpec& spec, int n) {
  if (n < 1) throw ArgumentError("noiseless_path: n must be >= 1");
  Mat nodes(spec.dim, n + 1);
  nodes.col(0) = spec.x0;
  Vec b(spec.dim);
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    spec.drift->value_into(nodes.col(i), b);
    check_finite_drift(b, i, nodes.col(i));
    nodes.col(i + 1) = nodes.col(i) + inv_n * b;
  }
  return GridPath(std::move(nodes));
}

GridPath lln_limit(const ModelSpec& spec, int m) {
  if (m < 1) throw ArgumentError("lln_limit: m must be >= 1");
  Mat nodes(spec.dim, m + 1);
  nodes.col(0) = spec.x0;
  const double h = 1.0 / m;
  for (int j = 0; j < m; ++j) {
    nodes.col(j + 1) = rk4_state(*spec.drift, nodes.col(j), h);
    check_finite_drift(nodes.col(j + 1), j, nodes.col(j));
  }
  return GridPath(std::move(nodes));
}

int default_lln_grid(int n_max) { return std::max(1000, 10 * n_max); }

Mat step_propagator(const ModelSpec& spec, const ConstVecRef& x_start, double h) {
  const auto& drift = *spec.drift;
  const int d = spec.dim;
  const Mat id = Mat::Identity(d, d);
  const Vec x1 = x_start;
  const Vec k1 = drift.value(x1);
  const Mat j1 = drift.jacobian(x1);
  const Mat f1 = j1;  // Db(x1) * I

  const Vec x2 = x1 + 0.5 * h * k1;
  const Vec k2 = drift.value(x2);
  const Mat f2 = drift.jacobian(x2) * (id + 0.5 * h * f1);

  const Vec x3 = x1 + 0.5 * h * k2;
  const Vec k3 = drift.value(x3);
  const Mat f3 = drift.jacobian(x3) * (id + 0.5 * h * f2);

  const Vec x4 = x1 + h * k3;
  const Mat f4 = drift.jacobian(x4) * (id + h * f3);

  return id + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
}

Mat transition_matrix(const ModelSpec& spec, const GridPath& x0_path, double s, double t) {
  if (!(s >= 0.0 && t <= 1.0 && s <= t)) {
    throw ArgumentError("transition_matrix: need 0 <= s <= t <= 1, got s = " + format_double(s) +
                        ", t = " + format_double(t));
  }
  const int m = x0_path.steps();
  const int d = spec.dim;
  s = snap(s, m);
  t = snap(t, m);
  Mat phi = Mat::Identity(d, d);
  double tau = s;
  while (tau < t) {
    const int j = std::min(static_cast<int>(std::floor(tau * m + 1e-9)), m - 1);
    const double node_t = static_cast<double>(j) / m;
    const double seg_end = std::min(t, static_cast<double>(j + 1) / m);
    Vec x_start = x0_path.node(j);
    if (tau > node_t) x_start = rk4_state(*spec.drift, x_start, tau - node_t);
    phi = step_propagator(spec, x_start, seg_end - tau) * phi;
    tau = seg_end;
  }
  return phi;
}

LinearizedFlow linearize(const ModelSpec& spec, int m) {
  LinearizedFlow flow;
  flow.x0 = lln_limit(spec, m);
  const double h = 1.0 / m;
  flow.step.reserve(m);
  for (int j = 0; j < m; ++j) flow.step.push_back(step_propagator(spec, flow.x0.node(j), h));
  flow.to_terminal.assign(m + 1, Mat::Identity(spec.dim, spec.dim));
  for (int j = m - 1; j >= 0; --j) flow.to_terminal[j] = flow.to_terminal[j + 1] * flow.step[j];
  flow.cov.reserve(m + 1);
  flow.cov_sqrt.reserve(m + 1);
  const bool constant = spec.kernel->state_independent();
  for (int j = 0; j <= m; ++j) {
    if (j > 0 && (constant || flow.x0.node(j) == flow.x0.node(j - 1))) {
      flow.cov.push_back(flow.cov.back());
      flow.cov_sqrt.push_back(flow.cov_sqrt.back());
      continue;
    }
    flow.cov.push_back(covariance(*spec.kernel, flow.x0.node(j)));
    flow.cov_sqrt.push_back(spectral::psd_sqrt(flow.cov.back()));
  }
  return flow;
}

}  // namespace modev
