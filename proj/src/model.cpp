#include "modev/model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "modev/errors.hpp"
#include "modev/format.hpp"
#include "modev/spectral.hpp"

namespace modev {

// ---------------------------------------------------------------------------
// Drifts

Drift::Drift(int dim) : dim_(dim) {
  if (dim < 1) throw ArgumentError("drift dimension must be positive");
}

Vec Drift::value(const ConstVecRef& x) const {
  Vec out(dim());
  value_into(x, out);
  return out;
}

Mat Drift::jacobian(const ConstVecRef& x) const {
  Mat out(dim(), dim());
  jacobian_into(x, out);
  return out;
}

LinearDrift::LinearDrift(Mat matrix, Vec offset)
    : Drift(static_cast<int>(matrix.rows())), matrix_(std::move(matrix)), offset_(std::move(offset)) {
  if (matrix_.rows() != matrix_.cols() || offset_.size() != matrix_.rows()) {
    throw ArgumentError("linear drift: matrix must be square and match the offset");
  }
}

void LinearDrift::value_into(const ConstVecRef& x, VecRef out) const {
  out.noalias() = matrix_ * x;
  out += offset_;
}

void LinearDrift::jacobian_into(const ConstVecRef&, Eigen::Ref<Mat> out) const { out = matrix_; }

TanhDrift::TanhDrift(int dim, double scale) : Drift(dim), scale_(scale) {}

double TanhDrift::value_1d(double x) const { return -scale_ * std::tanh(x); }

void TanhDrift::value_into(const ConstVecRef& x, VecRef out) const {
  for (int k = 0; k < dim(); ++k) out(k) = -scale_ * std::tanh(x(k));
}

void TanhDrift::jacobian_into(const ConstVecRef& x, Eigen::Ref<Mat> out) const {
  out.setZero();
  for (int k = 0; k < dim(); ++k) {
    const double c = std::cosh(x(k));
    out(k, k) = -scale_ / (c * c);
  }
}

SquareDrift::SquareDrift(int dim) : Drift(dim) {}

void SquareDrift::value_into(const ConstVecRef& x, VecRef out) const {
  out = x.cwiseProduct(x);
}

void SquareDrift::jacobian_into(const ConstVecRef& x, Eigen::Ref<Mat> out) const {
  out.setZero();
  for (int k = 0; k < dim(); ++k) out(k, k) = 2.0 * x(k);
}

CustomDrift::CustomDrift(int dim, std::function<Vec(const Vec&)> value,
                         std::function<Mat(const Vec&)> jacobian, std::string name)
    : Drift(dim), value_(std::move(value)), jacobian_(std::move(jacobian)), name_(std::move(name)) {
  if (!value_ || !jacobian_) throw ArgumentError("custom drift needs value and jacobian");
}

void CustomDrift::value_into(const ConstVecRef& x, VecRef out) const { out = value_(x); }

void CustomDrift::jacobian_into(const ConstVecRef& x, Eigen::Ref<Mat> out) const {
  out = jacobian_(x);
}

double Drift::value_1d(double x) const {
  Vec in = Vec::Constant(1, x);
  Vec out(1);
  value_into(in, out);
  return out(0);
}

DriftPtr make_zero_drift(int dim) {
  return std::make_shared<LinearDrift>(Mat::Zero(dim, dim), Vec::Zero(dim));
}

DriftPtr make_constant_drift(Vec value) {
  const auto d = value.size();
  return std::make_shared<LinearDrift>(Mat::Zero(d, d), std::move(value));
}

DriftPtr make_ou_drift(int dim, double theta) {
  return std::make_shared<LinearDrift>(-theta * Mat::Identity(dim, dim), Vec::Zero(dim));
}

// ---------------------------------------------------------------------------
// ModelSpec

double ModelSpec::a(std::int64_t n) const {
  return std::pow(static_cast<double>(n), -gamma);
}

double ModelSpec::amplification(std::int64_t n) const {
  return std::pow(static_cast<double>(n), 0.5 - gamma);
}

ModelSpec make_model(std::string id, Vec x0, DriftPtr drift, KernelPtr kernel, double gamma,
                     DeclaredBounds bounds) {
  if (!drift || !kernel) throw ConfigError("model '" + id + "': drift and kernel are required");
  const int d = static_cast<int>(x0.size());
  if (d < 1) throw ConfigError("model '" + id + "': dimension must be positive");
  if (drift->dim() != d || kernel->dim() != d) {
    throw ConfigError("model '" + id + "': x0, drift and kernel dimensions disagree");
  }
  if (!(gamma > 0.0 && gamma < 0.5)) {
    throw ConfigError("model '" + id + "': gamma must lie in (0, 1/2), got " +
                      format_double(gamma));
  }
  if (!x0.allFinite()) throw ConfigError("model '" + id + "': x0 must be finite");
  ModelSpec spec;
  spec.id = std::move(id);
  spec.dim = d;
  spec.x0 = std::move(x0);
  spec.drift = std::move(drift);
  spec.kernel = std::move(kernel);
  spec.gamma = gamma;
  spec.bounds = bounds;
  return spec;
}

// ---------------------------------------------------------------------------
// Validation

const ValidationClause* ValidationReport::find(const std::string& name) const {
  for (const auto& c : clauses) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

constexpr int kMeanSamples = 4000;
constexpr int kRandomDirections = 8;

std::vector<Vec> alpha_directions(int d, RngStream& rng) {
  std::vector<Vec> dirs;
  for (int k = 0; k < d; ++k) {
    Vec e = Vec::Zero(d);
    e(k) = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  if (d > 1) {
    for (int r = 0; r < kRandomDirections; ++r) {
      Vec v(d);
      for (int k = 0; k < d; ++k) v(k) = standard_normal(rng);
      dirs.push_back(v / v.norm());
    }
  }
  return dirs;
}

void require_finite(const ConstVecRef& v, const char* what, const ConstVecRef& x) {
  if (!v.allFinite()) {
    throw NumericalError(std::string(what) + " is not finite at probe point x = " +
                         format_vector(x));
  }
}

}  // namespace

ValidationReport validate_model(const ModelSpec& spec, int probe_count, std::uint64_t seed) {
  if (probe_count < 1) throw ArgumentError("validate_model: probe_count must be >= 1");
  const int d = spec.dim;
  const auto& kernel = *spec.kernel;
  const auto& drift = *spec.drift;
  const double radius = spec.bounds.probe_radius;
  const double lambda = std::min(spec.bounds.lambda, kernel.mgf_radius() * (1.0 - 1e-9));

  RngStream probe_rng = RngStream::derive(seed, 0xfeed, 0);
  std::vector<Vec> probes{spec.x0};
  while (static_cast<int>(probes.size()) < probe_count) {
    Vec p(d);
    for (int k = 0; k < d; ++k) p(k) = radius * (2.0 * uniform_open(probe_rng) - 1.0);
    probes.push_back(p);
  }
  const auto dirs = alpha_directions(d, probe_rng);

  double max_b = 0.0, max_db = 0.0, max_fd_err = 0.0, max_h = 0.0, max_mean = 0.0;
  double max_mean_ratio = 0.0, max_a = 0.0, min_eig = kInf, max_hess_err = 0.0;
  double max_third = 0.0, max_fenchel = 0.0;
  Vec b(d), b_up(d), b_down(d);
  Mat db(d, d);
  Vec y(d);

  for (std::size_t p = 0; p < probes.size(); ++p) {
    const Vec& x = probes[p];
    drift.value_into(x, b);
    require_finite(b, "drift", x);
    drift.jacobian_into(x, db);
    if (!db.allFinite()) {
      throw NumericalError("drift Jacobian is not finite at probe point x = " + format_vector(x));
    }
    max_b = std::max(max_b, b.norm());
    max_db = std::max(max_db, db.operatorNorm());

    // Central-difference Jacobian check along every coordinate.
    const double h = 1e-5 * (1.0 + x.norm());
    for (int k = 0; k < d; ++k) {
      Vec xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      drift.value_into(xp, b_up);
      drift.value_into(xm, b_down);
      const Vec fd = (b_up - b_down) / (2.0 * h);
      const double err = (fd - db.col(k)).norm() / (1.0 + db.col(k).norm());
      max_fd_err = std::max(max_fd_err, err);
    }

    // Covariance.
    const Mat a = covariance(kernel, x);
    max_a = std::max(max_a, a.operatorNorm());
    min_eig = std::min(min_eig, spectral::eigen_sym(a).values.minCoeff());

    // mgf on the lambda-sphere (convexity puts the max on the boundary).
    for (const auto& dir : dirs) {
      const Vec alpha = lambda * dir;
      const double hc = log_mgf(kernel, x, alpha);
      max_h = std::max(max_h, hc);
      if (std::isfinite(hc)) {
        const Vec m = tilt_mean(kernel, x, alpha);
        require_finite(m, "tilt mean", x);
      }
    }

    // Hessian of H_c at 0 versus A(x).
    const double ha = 1e-4;
    Mat hess(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        Vec pp = Vec::Zero(d), pm = Vec::Zero(d), mp = Vec::Zero(d), mm = Vec::Zero(d);
        pp(i) += ha; pp(j) += ha;
        pm(i) += ha; pm(j) -= ha;
        mp(i) -= ha; mp(j) += ha;
        mm(i) -= ha; mm(j) -= ha;
        hess(i, j) = (log_mgf(kernel, x, pp) - log_mgf(kernel, x, pm) - log_mgf(kernel, x, mp) +
                      log_mgf(kernel, x, mm)) /
                     (4.0 * ha * ha);
      }
    }
    max_hess_err = std::max(max_hess_err, (hess - a).norm() / std::max(1.0, a.norm()));

    // Third derivative along coordinate axes, inside half the lambda ball.
    const double h3 = 1e-3;
    for (int k = 0; k < d; ++k) {
      for (double base : {0.0, 0.5 * lambda, -0.5 * lambda}) {
        Vec c = Vec::Zero(d);
        c(k) = base;
        auto at = [&](double s) {
          Vec q = c;
          q(k) += s;
          return log_mgf(kernel, x, q);
        };
        const double third =
            (at(2 * h3) - 2 * at(h3) + 2 * at(-h3) - at(-2 * h3)) / (2.0 * h3 * h3 * h3);
        if (std::isfinite(third)) max_third = std::max(max_third, std::abs(third));
      }
    }

    // Fenchel equality at a moderate tilt for catalog closed forms.
    {
      const Vec alpha = 0.5 * lambda * dirs.front();
      const Vec m = tilt_mean(kernel, x, alpha);
      if (auto lc = kernel.legendre_closed_form(x, m)) {
        max_fenchel = std::max(max_fenchel, std::abs(*lc + log_mgf(kernel, x, alpha) - alpha.dot(m)));
      }
    }

    // Sampler mean.
    Vec mean = Vec::Zero(d);
    for (int s = 0; s < kMeanSamples; ++s) {
      RngStream rng = RngStream::derive(seed, p, static_cast<std::uint64_t>(s) + 1);
      kernel.sample_into(x, rng, y);
      require_finite(y, "kernel sample", x);
      mean += y;
    }
    mean /= kMeanSamples;
    max_mean = std::max(max_mean, mean.norm());
    const double se = std::sqrt(std::max(a.trace(), 0.0) / kMeanSamples);
    max_mean_ratio = std::max(max_mean_ratio, se > 0.0 ? mean.norm() / se : (mean.norm() > 0 ? kInf : 0.0));
  }

  const auto& bd = spec.bounds;
  ValidationReport report;
  report.probe_count = static_cast<int>(probes.size());
  report.probe_radius = radius;
  report.clauses = {
      {"drift_bound", max_b, bd.drift, max_b <= bd.drift, "max |b(x)| over probes"},
      {"jacobian_bound", max_db, bd.drift, max_db <= bd.drift,
       "max |Db(x)| (operator norm) over probes"},
      {"jacobian_finite_difference", max_fd_err, 1e-4, max_fd_err <= 1e-4,
       "max relative error of central differences vs Db"},
      {"mgf_bound", max_h, bd.mgf, max_h <= bd.mgf,
       "max H_c(x, alpha) over |alpha| = lambda probes"},
      {"sampler_mean", max_mean, 5.0, max_mean_ratio <= 5.0,
       "max |sample mean| over probes; pass if within 5 standard errors"},
      {"covariance_bound", max_a, bd.covariance, max_a <= bd.covariance, "max |A(x)| over probes"},
      {"covariance_psd", min_eig, -spectral::kNegativeTol, min_eig >= -spectral::kNegativeTol,
       "smallest eigenvalue of A(x)"},
      {"hessian_matches_covariance", max_hess_err, 1e-4, max_hess_err <= 1e-4,
       "relative error of finite-difference Hessian of H_c at 0 vs A(x)"},
      {"fenchel_equality", max_fenchel, 1e-6, max_fenchel <= 1e-6,
       "|L_c(m) + H_c(alpha) - <alpha, m>| for closed-form kernels"},
      {"third_derivative", max_third, kInf, true,
       "measured max |d^3 H_c| along axes within lambda/2 (informational)"},
  };
  report.pass = std::all_of(report.clauses.begin(), report.clauses.end(),
                            [](const ValidationClause& c) { return c.pass; });
  return report;
}

}  // namespace modev
