#pragma once

#include <vector>

#include "modev/grid_path.hpp"
#include "modev/model.hpp"

namespace modev {

/// X^{n,0}: the Euler recursion X_{i+1} = X_i + b(X_i)/n from x0, n steps.
/// Throws NumericalError naming the step on non-finite drift.
GridPath noiseless_path(const ModelSpec& spec, int n);

/// X^0 solving X' = b(X), X(0) = x0, by classical RK4 on an m-step grid.
/// Global error O(m^-4).
GridPath lln_limit(const ModelSpec& spec, int m);

/// max(1000, 10 n_max): LLN grid size that keeps deterministic error well
/// below Monte Carlo error for ladders up to n_max.
int default_lln_grid(int n_max);

/// Phi(t0 + h, t0) for the flow linearized along X^0 started at x_start,
/// by one RK4 step of the joint system (X, Phi).
Mat step_propagator(const ModelSpec& spec, const ConstVecRef& x_start, double h);

/// Phi(t, s): d/dt Phi = Db(X^0(t)) Phi, Phi(s, s) = I. Integrated with the
/// same RK4 scheme, restarting X^0 from the stored grid nodes so that
/// products over adjacent intervals compose exactly. Throws ArgumentError
/// unless 0 <= s <= t <= 1.
Mat transition_matrix(const ModelSpec& spec, const GridPath& x0_path, double s, double t);

/// Everything along X^0 on one m-grid that the rate computations need.
struct LinearizedFlow {
  GridPath x0;
  std::vector<Mat> step;         ///< P_j = Phi(t_{j+1}, t_j), j < m
  std::vector<Mat> to_terminal;  ///< Phi(1, t_j), j <= m
  std::vector<Mat> cov;          ///< A(X^0(t_j))
  std::vector<Mat> cov_sqrt;     ///< A^{1/2}(X^0(t_j))

  int steps() const { return x0.steps(); }
  int dim() const { return x0.dim(); }
  double h() const { return 1.0 / steps(); }
};

LinearizedFlow linearize(const ModelSpec& spec, int m);

}  // namespace modev
