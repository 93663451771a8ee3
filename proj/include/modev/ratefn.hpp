#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "modev/dynamics.hpp"
#include "modev/errors.hpp"
#include "modev/grid_path.hpp"
#include "modev/kernel.hpp"
#include "modev/model.hpp"

namespace modev {

inline constexpr int kDefaultRateGrid = 1000;

struct LegendreResult {
  double value = 0.0;
  Vec maximizer;              ///< empty for closed forms and +inf values
  bool closed_form = false;
  bool lower_bound = false;   ///< numeric maximizer sat on the search boundary
  int iterations = 0;
};

/// L_c(x, beta) = sup_alpha <alpha, beta> - H_c(x, alpha).
LegendreResult legendre_detailed(const NoiseKernel& kernel, const ConstVecRef& x,
                                 const ConstVecRef& beta);
double legendre(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& beta);

/// Node-valued control on a uniform grid. Integrals over [0, 1] use the
/// trapezoid rule, which is also the quadrature the controlled dynamics
/// below are consistent with.
class ControlPath {
 public:
  ControlPath() = default;
  explicit ControlPath(GridPath path) : path_(std::move(path)) {}
  static ControlPath zero(int dim, int steps);
  /// Samples f at the m+1 grid times.
  static ControlPath from_function(int dim, int steps, const std::function<Vec(double)>& f);

  const GridPath& path() const { return path_; }
  int dim() const { return path_.dim(); }
  int steps() const { return path_.steps(); }
  auto node(int j) const { return path_.node(j); }
  Vec evaluate(double t) const { return path_.evaluate(t); }

  /// 1/2 int |u|^2 dt by the trapezoid rule.
  double cost() const;
  /// max_j |u_j|.
  double sup_norm() const { return path_.sup_norm(); }

 private:
  GridPath path_;
};

/// Trapezoid weight of node j on an m-step grid, times h = 1/m.
double trapezoid_weight(int j, int m);

struct SolverDiagnostics {
  int iterations = 0;
  double gradient_norm = 0.0;
  int grid_size = 0;
  bool converged = true;
  bool infinite = false;
  std::string method;
};

struct RateSolution {
  double value = 0.0;
  std::optional<ControlPath> control;
  std::optional<GridPath> trajectory;
  SolverDiagnostics diagnostics;

  /// {value, grid, u_nodes, phi_nodes, diagnostics}; +inf is written as
  /// null with diagnostics.infinite = true.
  nlohmann::json to_json() const;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, RateSolution best)
      : NumericalError(what), best_(std::move(best)) {}
  const RateSolution& best() const { return best_; }
  double gradient_norm() const { return best_.diagnostics.gradient_norm; }

 private:
  RateSolution best_;
};

/// G = int Phi(1,s) A(X^0(s)) Phi(1,s)^T ds, trapezoid on the m-grid.
Mat controllability_gramian(const LinearizedFlow& flow);
Mat controllability_gramian(const ModelSpec& spec, int m = kDefaultRateGrid);

/// G(t_j) for every node, via G_{j+1} = P_j G_j P_j^T + h/2 (P_j A_j P_j^T + A_{j+1}).
std::vector<Mat> gramian_history(const LinearizedFlow& flow);

/// phi_{j+1} = P_j phi_j + h/2 (P_j f_j + f_{j+1}), phi_0 = 0, for node
/// forcing f (d x (m+1)).
GridPath integrate_forced(const LinearizedFlow& flow, const ConstMatRef& forcing);

/// phi^u for phi' = Db(X^0) phi + A^{1/2}(X^0) u. The control is resampled
/// onto the flow grid when the grids differ.
GridPath controlled_path(const LinearizedFlow& flow, const ControlPath& u);

/// Minimal energy to reach phi(1) = y: 1/2 y^T G^+ y, or +inf off range(G).
RateSolution terminal_rate(const LinearizedFlow& flow, const ConstVecRef& y);
RateSolution terminal_rate(const ModelSpec& spec, const ConstVecRef& y, int m = kDefaultRateGrid);

/// Minimal energy to reach {<v, phi(1)> >= c}: c^2 / (2 v^T G v), 0 for c <= 0,
/// +inf when v^T G v vanishes.
RateSolution halfspace_rate(const LinearizedFlow& flow, const ConstVecRef& v, double c);
RateSolution halfspace_rate(const ModelSpec& spec, const ConstVecRef& v, double c,
                            int m = kDefaultRateGrid);

/// Minimal energy to reach {sup_t |phi(t)| >= c}: c^2 / (2 max_t lambda_max(G(t))).
RateSolution exit_rate(const LinearizedFlow& flow, double c);
RateSolution exit_rate(const ModelSpec& spec, double c, int m = kDefaultRateGrid);

/// Functional F on grid paths with its gradient dF/dphi_j (d x (m+1)).
class PathFunctional {
 public:
  virtual ~PathFunctional() = default;
  virtual std::string describe() const = 0;
  virtual double value(const GridPath& phi) const = 0;
  virtual void gradient(const GridPath& phi, Mat& grad) const = 0;
};

using FunctionalPtr = std::shared_ptr<const PathFunctional>;

FunctionalPtr constant_functional(double c);
/// <v, phi(1)>
FunctionalPtr terminal_linear(Vec v);
/// w |phi(1) - target|^2
FunctionalPtr terminal_quadratic(double weight, Vec target);
/// w max(0, c - <v, phi(1)>)^2, a softened version of the indicator of
/// {<v, phi(1)> < c}.
FunctionalPtr terminal_threshold(Vec v, double c, double weight);
FunctionalPtr custom_functional(std::string name, std::function<double(const GridPath&)> value,
                                std::function<void(const GridPath&, Mat&)> gradient);

struct LaplaceOptions {
  int max_iters = 10000;
  double rel_tol = 1e-6;
  int memory = 10;
};

/// min_u 1/2 int |u|^2 + F(phi^u) over node controls on the flow grid, by
/// L-BFGS with Armijo backtracking and an exact discrete adjoint. Converged
/// when the L2 gradient norm is <= rel_tol (1 + |value|). Throws
/// ConvergenceError with the best iterate otherwise.
RateSolution laplace_value(const LinearizedFlow& flow, const PathFunctional& f,
                           const LaplaceOptions& options = {});
RateSolution laplace_value(const ModelSpec& spec, const PathFunctional& f,
                           int m = kDefaultRateGrid, const LaplaceOptions& options = {});

/// u_K(s): u(s) clipped radially at K.
Vec clip_radial(const ConstVecRef& u, double k);

/// Dynamics and cost with the truncated control A_K^{-1/2} u_K entering as
/// A A_K^{-1/2} u_K, compared with the untruncated A^{1/2} u.
struct TruncationComparison {
  double k = 0.0;
  double cost_k = 0.0;      ///< 1/2 int |A_K^{-1/2} u_K|^2_A
  double cost_limit = 0.0;  ///< 1/2 int |u|^2
  GridPath path_k;
  GridPath path_limit;
  double path_gap = 0.0;    ///< sup_t |path_k - path_limit|
};

TruncationComparison truncation_limit(const LinearizedFlow& flow, const ControlPath& u, double k);

}  // namespace modev
