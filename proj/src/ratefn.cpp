#include "modev/ratefn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "modev/format.hpp"
#include "modev/spectral.hpp"

namespace modev {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Legendre transform

namespace {

constexpr double kUnboundedBox = 1e3;
constexpr int kAscentIters = 5000;

double concave_objective(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& beta,
                         const Vec& alpha) {
  const double h = kernel.log_mgf_value(x, alpha);
  if (!std::isfinite(h)) return -kInf;
  return alpha.dot(beta) - h;
}

Vec project_ball(Vec alpha, double radius) {
  const double norm = alpha.norm();
  if (norm > radius) alpha *= radius / norm;
  return alpha;
}

// Returns false when the gradient is not finite at alpha.
bool ascent_gradient(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& beta,
                     const Vec& alpha, Vec& grad) {
  kernel.tilt_mean_into(x, alpha, grad);
  grad = beta - grad;
  return grad.allFinite();
}

struct AscentResult {
  double value = -kInf;
  Vec alpha;
  int iterations = 0;
};

// Projected gradient ascent with Barzilai-Borwein steps and Armijo
// backtracking on the concave map alpha -> <alpha, beta> - H_c.
AscentResult projected_ascent(const NoiseKernel& kernel, const ConstVecRef& x,
                              const ConstVecRef& beta, Vec alpha, double radius) {
  const int d = kernel.dim();
  alpha = project_ball(std::move(alpha), radius);
  Vec grad(d);
  // Pull the start inward until the gradient is usable.
  for (int tries = 0; !ascent_gradient(kernel, x, beta, alpha, grad); ++tries) {
    if (tries > 60) return {};
    alpha *= 0.5;
  }
  double f = concave_objective(kernel, x, beta, alpha);
  double step = 1.0;
  AscentResult out{f, alpha, 0};
  Vec prev_alpha = alpha;
  Vec prev_grad = grad;
  for (int it = 0; it < kAscentIters; ++it) {
    out.iterations = it + 1;
    const Vec full = project_ball(alpha + grad, radius);
    if ((full - alpha).norm() <= 1e-11 * (1.0 + alpha.norm())) break;
    double t = step;
    Vec cand;
    double fc = -kInf;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      cand = project_ball(alpha + t * grad, radius);
      fc = concave_objective(kernel, x, beta, cand);
      if (std::isfinite(fc) && fc >= f + 1e-4 * grad.dot(cand - alpha) - 1e-15 * std::abs(f)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    Vec cand_grad(d);
    if (!ascent_gradient(kernel, x, beta, cand, cand_grad)) break;
    prev_alpha = alpha;
    prev_grad = grad;
    alpha = cand;
    grad = cand_grad;
    f = fc;
    const Vec s = alpha - prev_alpha;
    const Vec y = prev_grad - grad;
    const double sy = s.dot(y);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-8, 1e8) : 1.0;
  }
  out.value = f;
  out.alpha = alpha;
  return out;
}

}  // namespace

LegendreResult legendre_detailed(const NoiseKernel& kernel, const ConstVecRef& x,
                                 const ConstVecRef& beta) {
  if (beta.size() != kernel.dim()) {
    throw ArgumentError("legendre: beta has dimension " + std::to_string(beta.size()) +
                        ", kernel expects " + std::to_string(kernel.dim()));
  }
  LegendreResult res;
  if (beta.isZero(0.0)) {
    res.closed_form = true;
    return res;
  }
  if (auto closed = kernel.legendre_closed_form(x, beta)) {
    res.value = *closed;
    res.closed_form = true;
    return res;
  }
  // Outside the closed convex hull of the support along a probe direction.
  const int d = kernel.dim();
  std::vector<Vec> directions;
  for (int k = 0; k < d; ++k) {
    directions.push_back(Vec::Unit(d, k));
    directions.push_back(-Vec::Unit(d, k));
  }
  directions.push_back(beta.normalized());
  for (const auto& v : directions) {
    const double s = kernel.support_function(x, v);
    if (std::isfinite(s) && beta.dot(v) > s + 1e-12 * (1.0 + std::abs(s))) {
      res.value = kInf;
      return res;
    }
  }

  const double r = kernel.mgf_radius();
  const double radius = std::isfinite(r) ? r * (1.0 - 1e-9) : kUnboundedBox;
  const Vec dir = beta.normalized();
  const std::vector<Vec> starts = {Vec::Zero(d), 0.5 * std::min(radius, 1.0) * dir, beta};
  AscentResult best;
  for (const auto& s : starts) {
    AscentResult cur = projected_ascent(kernel, x, beta, s, radius);
    res.iterations += cur.iterations;
    if (cur.value > best.value) best = std::move(cur);
  }
  if (!std::isfinite(best.value)) {
    throw NumericalError("legendre: no finite objective value at x = " + format_vector(x) +
                         ", beta = " + format_vector(beta));
  }
  res.value = std::max(0.0, best.value);
  res.maximizer = best.alpha;
  res.lower_bound = best.alpha.norm() >= radius * (1.0 - 1e-6);
  return res;
}

double legendre(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& beta) {
  return legendre_detailed(kernel, x, beta).value;
}

// ---------------------------------------------------------------------------
// Controls and solutions

double trapezoid_weight(int j, int m) {
  const double h = 1.0 / m;
  return (j == 0 || j == m) ? 0.5 * h : h;
}

ControlPath ControlPath::zero(int dim, int steps) {
  return ControlPath(GridPath(Mat::Zero(dim, steps + 1)));
}

ControlPath ControlPath::from_function(int dim, int steps, const std::function<Vec(double)>& f) {
  Mat nodes(dim, steps + 1);
  for (int j = 0; j <= steps; ++j) {
    const Vec v = f(static_cast<double>(j) / steps);
    if (v.size() != dim) throw ArgumentError("control function returned the wrong dimension");
    nodes.col(j) = v;
  }
  return ControlPath(GridPath(std::move(nodes)));
}

double ControlPath::cost() const {
  const int m = steps();
  double total = 0.0;
  for (int j = 0; j <= m; ++j) total += trapezoid_weight(j, m) * path_.node(j).squaredNorm();
  return 0.5 * total;
}

namespace {

json nodes_json(const Mat& nodes) {
  json rows = json::array();
  for (Eigen::Index j = 0; j < nodes.cols(); ++j) {
    json col = json::array();
    for (Eigen::Index k = 0; k < nodes.rows(); ++k) col.push_back(nodes(k, j));
    rows.push_back(std::move(col));
  }
  return rows;
}

}  // namespace

json RateSolution::to_json() const {
  json j;
  const bool infinite = !std::isfinite(value);
  j["value"] = infinite ? json(nullptr) : json(value);
  j["grid"] = diagnostics.grid_size;
  j["u_nodes"] = control ? nodes_json(control->path().nodes()) : json(nullptr);
  j["phi_nodes"] = trajectory ? nodes_json(trajectory->nodes()) : json(nullptr);
  j["diagnostics"] = {{"iterations", diagnostics.iterations},
                      {"gradient_norm", diagnostics.gradient_norm},
                      {"grid_size", diagnostics.grid_size},
                      {"converged", diagnostics.converged},
                      {"infinite", infinite},
                      {"method", diagnostics.method}};
  return j;
}

// ---------------------------------------------------------------------------
// Gramian based rates

Mat controllability_gramian(const LinearizedFlow& flow) {
  const int m = flow.steps();
  Mat g = Mat::Zero(flow.dim(), flow.dim());
  for (int j = 0; j <= m; ++j) {
    g.noalias() += trapezoid_weight(j, m) * flow.to_terminal[j] * flow.cov[j] *
                   flow.to_terminal[j].transpose();
  }
  return 0.5 * (g + g.transpose());
}

Mat controllability_gramian(const ModelSpec& spec, int m) {
  if (m < 10) throw ArgumentError("controllability_gramian needs m >= 10");
  return controllability_gramian(linearize(spec, m));
}

std::vector<Mat> gramian_history(const LinearizedFlow& flow) {
  const int m = flow.steps();
  const double h = flow.h();
  std::vector<Mat> g(m + 1);
  g[0] = Mat::Zero(flow.dim(), flow.dim());
  for (int j = 0; j < m; ++j) {
    const Mat& p = flow.step[j];
    g[j + 1] = p * g[j] * p.transpose() + 0.5 * h * (p * flow.cov[j] * p.transpose() + flow.cov[j + 1]);
  }
  return g;
}

GridPath integrate_forced(const LinearizedFlow& flow, const ConstMatRef& forcing) {
  const int m = flow.steps();
  const double h = flow.h();
  if (forcing.rows() != flow.dim() || forcing.cols() != m + 1) {
    throw ArgumentError("forcing must be d x (m+1) on the flow grid");
  }
  Mat phi = Mat::Zero(flow.dim(), m + 1);
  for (int j = 0; j < m; ++j) {
    phi.col(j + 1) = flow.step[j] * (phi.col(j) + 0.5 * h * forcing.col(j)) +
                     0.5 * h * forcing.col(j + 1);
  }
  return GridPath(std::move(phi));
}

namespace {

Mat control_on_grid(const LinearizedFlow& flow, const ControlPath& u) {
  const int m = flow.steps();
  if (u.dim() != flow.dim()) throw ArgumentError("control dimension does not match the model");
  if (u.steps() == m) return u.path().nodes();
  Mat nodes(flow.dim(), m + 1);
  for (int j = 0; j <= m; ++j) nodes.col(j) = u.evaluate(static_cast<double>(j) / m);
  return nodes;
}

// Node control u_j = S_j^T Psi_j^T lambda, where Psi_j maps the forcing at
// node j to the constrained quantity.
RateSolution minimal_energy(const LinearizedFlow& flow, const std::vector<Mat>& psi,
                            const Vec& lambda, double value, const std::string& method) {
  const int m = flow.steps();
  Mat u = Mat::Zero(flow.dim(), m + 1);
  for (int j = 0; j < static_cast<int>(psi.size()); ++j) {
    u.col(j) = flow.cov_sqrt[j].transpose() * (psi[j].transpose() * lambda);
  }
  RateSolution sol;
  sol.value = value;
  sol.control = ControlPath(GridPath(u));
  sol.trajectory = controlled_path(flow, *sol.control);
  sol.diagnostics.grid_size = m;
  sol.diagnostics.method = method;
  return sol;
}

RateSolution infinite_solution(int m, const std::string& method) {
  RateSolution sol;
  sol.value = kInf;
  sol.diagnostics.grid_size = m;
  sol.diagnostics.infinite = true;
  sol.diagnostics.method = method;
  return sol;
}

}  // namespace

GridPath controlled_path(const LinearizedFlow& flow, const ControlPath& u) {
  const Mat nodes = control_on_grid(flow, u);
  Mat forcing(flow.dim(), flow.steps() + 1);
  for (int j = 0; j <= flow.steps(); ++j) forcing.col(j) = flow.cov_sqrt[j] * nodes.col(j);
  return integrate_forced(flow, forcing);
}

RateSolution terminal_rate(const LinearizedFlow& flow, const ConstVecRef& y) {
  if (y.size() != flow.dim()) throw ArgumentError("target dimension does not match the model");
  const Mat g = controllability_gramian(flow);
  const double q = spectral::pinv_quad_form(g, y);
  if (!std::isfinite(q)) return infinite_solution(flow.steps(), "gramian");
  const Vec lambda = spectral::psd_pinv(g) * y;
  return minimal_energy(flow, flow.to_terminal, lambda, 0.5 * q, "gramian");
}

RateSolution terminal_rate(const ModelSpec& spec, const ConstVecRef& y, int m) {
  if (m < 10) throw ArgumentError("terminal_rate needs m >= 10");
  return terminal_rate(linearize(spec, m), y);
}

RateSolution halfspace_rate(const LinearizedFlow& flow, const ConstVecRef& v, double c) {
  if (v.size() != flow.dim()) throw ArgumentError("half-space normal has the wrong dimension");
  const int m = flow.steps();
  if (c <= 0.0) {
    RateSolution sol;
    sol.control = ControlPath::zero(flow.dim(), m);
    sol.trajectory = GridPath(Mat::Zero(flow.dim(), m + 1));
    sol.diagnostics.grid_size = m;
    sol.diagnostics.method = "gramian";
    return sol;
  }
  const Mat g = controllability_gramian(flow);
  const double vgv = v.dot(g * v);
  const double scale = std::max(g.norm(), std::numeric_limits<double>::min());
  if (!(vgv > spectral::kRankRelTol * scale * v.squaredNorm())) return infinite_solution(m, "gramian");
  const Vec lambda = (c / vgv) * v;
  return minimal_energy(flow, flow.to_terminal, lambda, c * c / (2.0 * vgv), "gramian");
}

RateSolution halfspace_rate(const ModelSpec& spec, const ConstVecRef& v, double c, int m) {
  if (m < 10) throw ArgumentError("halfspace_rate needs m >= 10");
  return halfspace_rate(linearize(spec, m), v, c);
}

RateSolution exit_rate(const LinearizedFlow& flow, double c) {
  const int m = flow.steps();
  if (c <= 0.0) return halfspace_rate(flow, Vec::Unit(flow.dim(), 0), 0.0);
  const auto history = gramian_history(flow);
  int best_j = 0;
  double best_lambda = 0.0;
  Vec best_v = Vec::Unit(flow.dim(), 0);
  for (int j = 1; j <= m; ++j) {
    const auto eig = spectral::eigen_sym(history[j]);
    if (eig.values(0) > best_lambda) {
      best_lambda = eig.values(0);
      best_j = j;
      best_v = eig.vectors.col(0);
    }
  }
  if (!(best_lambda > 0.0)) return infinite_solution(m, "gramian-exit");
  // Steer <v, phi(t*)> = c and switch the control off afterwards.
  std::vector<Mat> psi(best_j + 1);
  psi[best_j] = Mat::Identity(flow.dim(), flow.dim());
  for (int j = best_j - 1; j >= 0; --j) psi[j] = psi[j + 1] * flow.step[j];
  return minimal_energy(flow, psi, (c / best_lambda) * best_v, c * c / (2.0 * best_lambda),
                        "gramian-exit");
}

RateSolution exit_rate(const ModelSpec& spec, double c, int m) {
  if (m < 10) throw ArgumentError("exit_rate needs m >= 10");
  return exit_rate(linearize(spec, m), c);
}

// ---------------------------------------------------------------------------
// Functionals

namespace {

class ConstantFunctional final : public PathFunctional {
 public:
  explicit ConstantFunctional(double c) : c_(c) {}
  std::string describe() const override { return "constant(" + format_double(c_) + ")"; }
  double value(const GridPath&) const override { return c_; }
  void gradient(const GridPath& phi, Mat& grad) const override {
    grad.setZero(phi.dim(), phi.steps() + 1);
  }

 private:
  double c_;
};

void check_dim(const GridPath& phi, const Vec& v) {
  if (phi.dim() != v.size()) throw ArgumentError("functional dimension does not match the path");
}

class TerminalLinear final : public PathFunctional {
 public:
  explicit TerminalLinear(Vec v) : v_(std::move(v)) {}
  std::string describe() const override { return "terminal_linear" + format_vector(v_); }
  double value(const GridPath& phi) const override {
    check_dim(phi, v_);
    return v_.dot(phi.terminal());
  }
  void gradient(const GridPath& phi, Mat& grad) const override {
    grad.setZero(phi.dim(), phi.steps() + 1);
    grad.col(phi.steps()) = v_;
  }

 private:
  Vec v_;
};

class TerminalQuadratic final : public PathFunctional {
 public:
  TerminalQuadratic(double w, Vec target) : w_(w), target_(std::move(target)) {}
  std::string describe() const override {
    return "terminal_quadratic(" + format_double(w_) + ", " + format_vector(target_) + ")";
  }
  double value(const GridPath& phi) const override {
    check_dim(phi, target_);
    return w_ * (phi.terminal() - target_).squaredNorm();
  }
  void gradient(const GridPath& phi, Mat& grad) const override {
    grad.setZero(phi.dim(), phi.steps() + 1);
    grad.col(phi.steps()) = 2.0 * w_ * (phi.terminal() - target_);
  }

 private:
  double w_;
  Vec target_;
};

class TerminalThreshold final : public PathFunctional {
 public:
  TerminalThreshold(Vec v, double c, double w) : v_(std::move(v)), c_(c), w_(w) {}
  std::string describe() const override {
    return "terminal_threshold(" + format_vector(v_) + ", " + format_double(c_) + ", " +
           format_double(w_) + ")";
  }
  double value(const GridPath& phi) const override {
    check_dim(phi, v_);
    const double gap = std::max(0.0, c_ - v_.dot(phi.terminal()));
    return w_ * gap * gap;
  }
  void gradient(const GridPath& phi, Mat& grad) const override {
    grad.setZero(phi.dim(), phi.steps() + 1);
    const double gap = std::max(0.0, c_ - v_.dot(phi.terminal()));
    grad.col(phi.steps()) = -2.0 * w_ * gap * v_;
  }

 private:
  Vec v_;
  double c_;
  double w_;
};

class CustomFunctional final : public PathFunctional {
 public:
  CustomFunctional(std::string name, std::function<double(const GridPath&)> value,
                   std::function<void(const GridPath&, Mat&)> gradient)
      : name_(std::move(name)), value_(std::move(value)), gradient_(std::move(gradient)) {}
  std::string describe() const override { return name_; }
  double value(const GridPath& phi) const override { return value_(phi); }
  void gradient(const GridPath& phi, Mat& grad) const override {
    if (!gradient_) throw ArgumentError("functional '" + name_ + "' has no gradient");
    gradient_(phi, grad);
  }

 private:
  std::string name_;
  std::function<double(const GridPath&)> value_;
  std::function<void(const GridPath&, Mat&)> gradient_;
};

}  // namespace

FunctionalPtr constant_functional(double c) { return std::make_shared<ConstantFunctional>(c); }
FunctionalPtr terminal_linear(Vec v) { return std::make_shared<TerminalLinear>(std::move(v)); }
FunctionalPtr terminal_quadratic(double weight, Vec target) {
  return std::make_shared<TerminalQuadratic>(weight, std::move(target));
}
FunctionalPtr terminal_threshold(Vec v, double c, double weight) {
  return std::make_shared<TerminalThreshold>(std::move(v), c, weight);
}
FunctionalPtr custom_functional(std::string name, std::function<double(const GridPath&)> value,
                                std::function<void(const GridPath&, Mat&)> gradient) {
  return std::make_shared<CustomFunctional>(std::move(name), std::move(value),
                                            std::move(gradient));
}

// ---------------------------------------------------------------------------
// Laplace value

namespace {

// Objective with its Riesz gradient in the weighted inner product.
struct LaplaceProblem {
  const LinearizedFlow& flow;
  const PathFunctional& f;
  Vec weights;  // h w_j per node
  mutable Mat grad_phi;

  double evaluate(const Mat& u, Mat& grad, GridPath& phi) const {
    const int m = flow.steps();
    const double h = flow.h();
    Mat forcing(flow.dim(), m + 1);
    for (int j = 0; j <= m; ++j) forcing.col(j) = flow.cov_sqrt[j] * u.col(j);
    phi = integrate_forced(flow, forcing);
    double cost = 0.0;
    for (int j = 0; j <= m; ++j) cost += weights(j) * u.col(j).squaredNorm();
    const double value = 0.5 * cost + f.value(phi);

    f.gradient(phi, grad_phi);
    // lambda_k = g_k + P_k^T lambda_{k+1}; dF/du_j picks up both trapezoid halves.
    Vec lambda = grad_phi.col(m);
    grad.resize(flow.dim(), m + 1);
    grad.col(m) = 0.5 * h * flow.cov_sqrt[m].transpose() * lambda;
    for (int j = m - 1; j >= 0; --j) {
      const Vec pl = flow.step[j].transpose() * lambda;
      Vec dfdu = 0.5 * h * flow.cov_sqrt[j].transpose() * pl;
      lambda = grad_phi.col(j) + pl;
      if (j >= 1) dfdu += 0.5 * h * flow.cov_sqrt[j].transpose() * lambda;
      grad.col(j) = dfdu;
    }
    for (int j = 0; j <= m; ++j) grad.col(j) = u.col(j) + grad.col(j) / weights(j);
    return value;
  }

  double inner(const Mat& a, const Mat& b) const {
    return ((a.cwiseProduct(b)).colwise().sum().transpose().array() * weights.array()).sum();
  }
};

}  // namespace

RateSolution laplace_value(const LinearizedFlow& flow, const PathFunctional& f,
                           const LaplaceOptions& options) {
  const int m = flow.steps();
  const int d = flow.dim();
  LaplaceProblem prob{flow, f, Vec(m + 1), Mat()};
  for (int j = 0; j <= m; ++j) prob.weights(j) = trapezoid_weight(j, m);

  Mat u = Mat::Zero(d, m + 1);
  Mat grad;
  GridPath phi;
  double value = prob.evaluate(u, grad, phi);
  if (!std::isfinite(value)) throw NumericalError("laplace_value: objective is not finite at u = 0");
  double gnorm = std::sqrt(prob.inner(grad, grad));

  std::deque<std::pair<Mat, Mat>> history;  // (s, y)
  int it = 0;
  bool converged = gnorm <= options.rel_tol * (1.0 + std::abs(value));
  for (; !converged && it < options.max_iters; ++it) {
    // Two-loop recursion in the weighted inner product.
    Mat q = grad;
    std::vector<double> alphas(history.size());
    for (int k = static_cast<int>(history.size()) - 1; k >= 0; --k) {
      const auto& [s, y] = history[k];
      const double rho = 1.0 / prob.inner(y, s);
      alphas[k] = rho * prob.inner(s, q);
      q -= alphas[k] * y;
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      q *= prob.inner(s, y) / prob.inner(y, y);
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const auto& [s, y] = history[k];
      const double rho = 1.0 / prob.inner(y, s);
      const double beta = rho * prob.inner(y, q);
      q += (alphas[k] - beta) * s;
    }
    Mat dir = -q;
    double slope = prob.inner(grad, dir);
    if (!(slope < 0.0)) {
      history.clear();
      dir = -grad;
      slope = -gnorm * gnorm;
    }

    double t = 1.0;
    Mat u_new;
    Mat grad_new;
    GridPath phi_new;
    double value_new = kInf;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      u_new = u + t * dir;
      value_new = prob.evaluate(u_new, grad_new, phi_new);
      const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
      if (std::isfinite(value_new) && value_new <= value + 1e-4 * t * slope + slack) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    Mat s = u_new - u;
    Mat y = grad_new - grad;
    if (prob.inner(s, y) > 1e-300) {
      history.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(history.size()) > options.memory) history.pop_front();
    }
    u = std::move(u_new);
    grad = std::move(grad_new);
    phi = std::move(phi_new);
    value = value_new;
    gnorm = std::sqrt(prob.inner(grad, grad));
    converged = gnorm <= options.rel_tol * (1.0 + std::abs(value));
  }

  RateSolution sol;
  sol.value = value;
  sol.control = ControlPath(GridPath(u));
  sol.trajectory = phi;
  sol.diagnostics.iterations = it;
  sol.diagnostics.gradient_norm = gnorm;
  sol.diagnostics.grid_size = m;
  sol.diagnostics.converged = converged;
  sol.diagnostics.method = "lbfgs-adjoint";
  if (!converged) {
    throw ConvergenceError("laplace_value did not converge after " + std::to_string(it) +
                               " iterations (gradient norm " + format_double(gnorm) + ")",
                           std::move(sol));
  }
  return sol;
}

RateSolution laplace_value(const ModelSpec& spec, const PathFunctional& f, int m,
                           const LaplaceOptions& options) {
  if (m < 10) throw ArgumentError("laplace_value needs m >= 10");
  return laplace_value(linearize(spec, m), f, options);
}

// ---------------------------------------------------------------------------
// Truncation

Vec clip_radial(const ConstVecRef& u, double k) {
  if (!(k > 0.0)) throw ArgumentError("truncation level K must be positive");
  const double norm = u.norm();
  if (norm > k) return (k / norm) * u;
  return u;
}

TruncationComparison truncation_limit(const LinearizedFlow& flow, const ControlPath& u, double k) {
  const int m = flow.steps();
  const Mat nodes = control_on_grid(flow, u);
  Mat forcing_k(flow.dim(), m + 1);
  Mat forcing(flow.dim(), m + 1);
  TruncationComparison out;
  out.k = k;
  for (int j = 0; j <= m; ++j) {
    const Vec v = spectral::truncated_inv_sqrt(flow.cov[j], k) * clip_radial(nodes.col(j), k);
    const Vec av = flow.cov[j] * v;
    forcing_k.col(j) = av;
    forcing.col(j) = flow.cov_sqrt[j] * nodes.col(j);
    out.cost_k += 0.5 * trapezoid_weight(j, m) * v.dot(av);
    out.cost_limit += 0.5 * trapezoid_weight(j, m) * nodes.col(j).squaredNorm();
  }
  out.path_k = integrate_forced(flow, forcing_k);
  out.path_limit = integrate_forced(flow, forcing);
  out.path_gap = sup_distance(out.path_k, out.path_limit);
  return out;
}

}  // namespace modev
