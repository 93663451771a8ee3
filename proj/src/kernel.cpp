#include "modev/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "modev/errors.hpp"
#include "modev/format.hpp"
#include "modev/spectral.hpp"

namespace modev {

double standard_normal(RngStream& rng) {
  std::normal_distribution<double> normal;
  return normal(rng);
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Gaussian: return "Gaussian";
    case KernelKind::Rademacher: return "Rademacher";
    case KernelKind::DiscreteFinite: return "DiscreteFinite";
    case KernelKind::DegenerateProduct: return "DegenerateProduct";
    case KernelKind::Custom: return "Custom";
  }
  return "Unknown";
}

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr std::int64_t kDefaultCovarianceSamples = 200000;
constexpr std::uint64_t kCovarianceSeed = 0x5eed'c0f4'0000'0001ULL;
constexpr int kMaxRejections = 1'000'000;

// log cosh(a) without overflow.
double log_cosh(double a) {
  const double m = std::abs(a);
  return m + std::log1p(std::exp(-2.0 * m)) - kLn2;
}

// Legendre transform of log cosh.
double rademacher_legendre(double beta) {
  const double m = std::abs(beta);
  if (m > 1.0) return kInf;
  if (m == 1.0) return kLn2;
  return 0.5 * (1.0 + beta) * std::log1p(beta) + 0.5 * (1.0 - beta) * std::log1p(-beta);
}

// P(+1) under the alpha-tilted symmetric Bernoulli.
double rademacher_plus(double alpha) { return 1.0 / (1.0 + std::exp(-2.0 * alpha)); }

double signed_unit(RngStream& rng, double p_plus) {
  return uniform_open(rng) < p_plus ? 1.0 : -1.0;
}

void require_dim(const NoiseKernel& k, const ConstVecRef& v, const char* what) {
  if (v.size() != k.dim()) {
    throw ArgumentError(std::string(what) + " has dimension " + std::to_string(v.size()) +
                        ", kernel expects " + std::to_string(k.dim()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// NoiseKernel defaults

NoiseKernel::NoiseKernel(int dim) : dim_(dim) {
  if (dim < 1) throw ArgumentError("kernel dimension must be positive");
}

void NoiseKernel::tilt_mean_into(const ConstVecRef& x, const ConstVecRef& alpha,
                                 VecRef out) const {
  const double h = 1e-5 * (1.0 + alpha.norm());
  Vec probe = alpha;
  for (int k = 0; k < dim(); ++k) {
    probe(k) = alpha(k) + h;
    const double up = log_mgf_value(x, probe);
    probe(k) = alpha(k) - h;
    const double down = log_mgf_value(x, probe);
    probe(k) = alpha(k);
    out(k) = (up - down) / (2.0 * h);
  }
}

Mat NoiseKernel::covariance_at(const ConstVecRef& x) const {
  return estimate_covariance(*this, x, kDefaultCovarianceSamples, kCovarianceSeed).value;
}

void NoiseKernel::sample_tilted_into(const ConstVecRef& x, const ConstVecRef& alpha,
                                     RngStream& rng, VecRef out) const {
  if (alpha.isZero(0.0)) {
    sample_into(x, rng, out);
    return;
  }
  const auto envelope = tilt_envelope(x, alpha);
  if (!envelope) {
    throw UnsupportedTiltError("kernel '" + name() +
                               "' has no exact tilted sampler and no envelope bound M(alpha)");
  }
  for (int tries = 0; tries < kMaxRejections; ++tries) {
    sample_into(x, rng, out);
    const double log_accept = out.dot(alpha) - *envelope;
    if (log_accept > 1e-12) {
      throw NumericalError("tilt envelope M(alpha) is not an upper bound at alpha = " +
                           format_vector(alpha));
    }
    if (std::log(uniform_open(rng)) <= log_accept) return;
  }
  throw NumericalError("rejection sampler exceeded " + std::to_string(kMaxRejections) +
                       " proposals at alpha = " + format_vector(alpha));
}

double NoiseKernel::sample_tilted_1d(double x, double alpha, RngStream& rng) const {
  Vec xv = Vec::Constant(1, x);
  Vec av = Vec::Constant(1, alpha);
  Vec out(1);
  sample_tilted_into(xv, av, rng, out);
  return out(0);
}

double NoiseKernel::log_mgf_1d(double x, double alpha) const {
  Vec xv = Vec::Constant(1, x);
  Vec av = Vec::Constant(1, alpha);
  return log_mgf_value(xv, av);
}

double NoiseKernel::support_function(const ConstVecRef&, const ConstVecRef&) const {
  return kInf;
}

std::optional<double> NoiseKernel::legendre_closed_form(const ConstVecRef&,
                                                        const ConstVecRef&) const {
  return std::nullopt;
}

std::optional<double> NoiseKernel::tilt_envelope(const ConstVecRef&, const ConstVecRef&) const {
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Gaussian

GaussianKernel::GaussianKernel(Mat covariance)
    : NoiseKernel(static_cast<int>(covariance.rows())), cov_(std::move(covariance)) {
  if (cov_.rows() != cov_.cols()) throw ArgumentError("Gaussian covariance must be square");
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  sqrt_ = spectral::psd_sqrt(cov_);
}

void GaussianKernel::sample_into(const ConstVecRef&, RngStream& rng, VecRef out) const {
  if (dim() == 1) {
    out(0) = sqrt_(0, 0) * standard_normal(rng);
    return;
  }
  Vec z(dim());
  for (int k = 0; k < dim(); ++k) z(k) = standard_normal(rng);
  out.noalias() = sqrt_ * z;
}

double GaussianKernel::log_mgf_value(const ConstVecRef&, const ConstVecRef& alpha) const {
  return 0.5 * alpha.dot(cov_ * alpha);
}

void GaussianKernel::tilt_mean_into(const ConstVecRef&, const ConstVecRef& alpha,
                                    VecRef out) const {
  out.noalias() = cov_ * alpha;
}

void GaussianKernel::sample_tilted_into(const ConstVecRef& x, const ConstVecRef& alpha,
                                        RngStream& rng, VecRef out) const {
  if (dim() == 1) {
    out(0) = cov_(0, 0) * alpha(0) + sqrt_(0, 0) * standard_normal(rng);
    return;
  }
  sample_into(x, rng, out);
  out.noalias() += cov_ * alpha;
}

double GaussianKernel::sample_tilted_1d(double, double alpha, RngStream& rng) const {
  return cov_(0, 0) * alpha + sqrt_(0, 0) * standard_normal(rng);
}

double GaussianKernel::support_function(const ConstVecRef&, const ConstVecRef& v) const {
  // The support is range(C): bounded in direction v only when v is in the null space.
  const double scale = std::max(1.0, cov_.norm());
  return (cov_ * v).norm() <= 1e-12 * scale * v.norm() ? 0.0 : kInf;
}

std::optional<double> GaussianKernel::legendre_closed_form(const ConstVecRef&,
                                                           const ConstVecRef& beta) const {
  return 0.5 * spectral::pinv_quad_form(cov_, beta);
}

// ---------------------------------------------------------------------------
// Rademacher

RademacherKernel::RademacherKernel(int dim) : NoiseKernel(dim) {}

void RademacherKernel::sample_into(const ConstVecRef&, RngStream& rng, VecRef out) const {
  for (int k = 0; k < dim(); ++k) out(k) = signed_unit(rng, 0.5);
}

double RademacherKernel::log_mgf_value(const ConstVecRef&, const ConstVecRef& alpha) const {
  double h = 0.0;
  for (int k = 0; k < dim(); ++k) h += log_cosh(alpha(k));
  return h;
}

void RademacherKernel::tilt_mean_into(const ConstVecRef&, const ConstVecRef& alpha,
                                      VecRef out) const {
  for (int k = 0; k < dim(); ++k) out(k) = std::tanh(alpha(k));
}

Mat RademacherKernel::covariance_at(const ConstVecRef&) const {
  return Mat::Identity(dim(), dim());
}

void RademacherKernel::sample_tilted_into(const ConstVecRef&, const ConstVecRef& alpha,
                                          RngStream& rng, VecRef out) const {
  for (int k = 0; k < dim(); ++k) out(k) = signed_unit(rng, rademacher_plus(alpha(k)));
}

double RademacherKernel::sample_tilted_1d(double, double alpha, RngStream& rng) const {
  return signed_unit(rng, rademacher_plus(alpha));
}

double RademacherKernel::log_mgf_1d(double, double alpha) const { return log_cosh(alpha); }

double RademacherKernel::support_function(const ConstVecRef&, const ConstVecRef& v) const {
  return v.cwiseAbs().sum();
}

std::optional<double> RademacherKernel::legendre_closed_form(const ConstVecRef&,
                                                             const ConstVecRef& beta) const {
  double total = 0.0;
  for (int k = 0; k < dim(); ++k) total += rademacher_legendre(beta(k));
  return total;
}

// ---------------------------------------------------------------------------
// Discrete

DiscreteKernel::DiscreteKernel(Mat atoms, Vec probabilities)
    : NoiseKernel(static_cast<int>(atoms.rows())),
      atoms_(std::move(atoms)),
      probs_(std::move(probabilities)) {
  if (atoms_.cols() == 0 || atoms_.cols() != probs_.size()) {
    throw ArgumentError("discrete kernel: need one probability per atom");
  }
  if (probs_.minCoeff() < 0.0) throw ArgumentError("discrete kernel: negative probability");
  const double total = probs_.sum();
  if (std::abs(total - 1.0) > 1e-9) {
    throw ArgumentError("discrete kernel: probabilities sum to " + format_double(total));
  }
  probs_ /= total;
  const Vec mean = atoms_ * probs_;
  const double scale = 1.0 + atoms_.cwiseAbs().maxCoeff();
  if (mean.norm() > 1e-10 * scale) {
    throw ArgumentError("discrete kernel: atoms are not centered, mean " + format_vector(mean));
  }
  log_probs_ = probs_.array().log().matrix();
}

Vec DiscreteKernel::tilted_probabilities(const ConstVecRef& alpha) const {
  Vec logits = log_probs_ + atoms_.transpose() * alpha;
  const double top = logits.maxCoeff();
  Vec p = (logits.array() - top).exp().matrix();
  return p / p.sum();
}

void DiscreteKernel::sample_into(const ConstVecRef&, RngStream& rng, VecRef out) const {
  const double u = uniform_open(rng);
  double acc = 0.0;
  Eigen::Index j = 0;
  for (; j + 1 < probs_.size(); ++j) {
    acc += probs_(j);
    if (u < acc) break;
  }
  out = atoms_.col(j);
}

double DiscreteKernel::log_mgf_value(const ConstVecRef&, const ConstVecRef& alpha) const {
  if (alpha.isZero(0.0)) return 0.0;
  const Vec logits = log_probs_ + atoms_.transpose() * alpha;
  const double top = logits.maxCoeff();
  return top + std::log((logits.array() - top).exp().sum());
}

void DiscreteKernel::tilt_mean_into(const ConstVecRef&, const ConstVecRef& alpha,
                                    VecRef out) const {
  out.noalias() = atoms_ * tilted_probabilities(alpha);
}

Mat DiscreteKernel::covariance_at(const ConstVecRef&) const {
  return atoms_ * probs_.asDiagonal() * atoms_.transpose();
}

void DiscreteKernel::sample_tilted_into(const ConstVecRef&, const ConstVecRef& alpha,
                                        RngStream& rng, VecRef out) const {
  const Vec p = tilted_probabilities(alpha);
  const double u = uniform_open(rng);
  double acc = 0.0;
  Eigen::Index j = 0;
  for (; j + 1 < p.size(); ++j) {
    acc += p(j);
    if (u < acc) break;
  }
  out = atoms_.col(j);
}

double DiscreteKernel::support_function(const ConstVecRef&, const ConstVecRef& v) const {
  double best = -kInf;
  for (Eigen::Index j = 0; j < atoms_.cols(); ++j) {
    if (probs_(j) > 0.0) best = std::max(best, atoms_.col(j).dot(v));
  }
  return best;
}

bool DiscreteKernel::degenerate_zero() const { return atoms_.isZero(0.0); }

// ---------------------------------------------------------------------------
// Product

ProductKernel::ProductKernel(std::vector<ProductFactor> factors)
    : NoiseKernel(static_cast<int>(factors.size())), factors_(std::move(factors)) {
  for (auto& f : factors_) {
    if (f.type == ProductFactor::Type::Gaussian) {
      if (f.variance < 0.0) throw ArgumentError("product kernel: negative Gaussian variance");
      if (f.variance == 0.0) f = ProductFactor::point_mass();
    }
  }
}

void ProductKernel::sample_into(const ConstVecRef&, RngStream& rng, VecRef out) const {
  for (int k = 0; k < dim(); ++k) {
    const auto& f = factors_[k];
    switch (f.type) {
      case ProductFactor::Type::Gaussian: out(k) = std::sqrt(f.variance) * standard_normal(rng); break;
      case ProductFactor::Type::Rademacher: out(k) = signed_unit(rng, 0.5); break;
      case ProductFactor::Type::PointMass: out(k) = 0.0; break;
    }
  }
}

double ProductKernel::log_mgf_value(const ConstVecRef&, const ConstVecRef& alpha) const {
  double h = 0.0;
  for (int k = 0; k < dim(); ++k) {
    const auto& f = factors_[k];
    switch (f.type) {
      case ProductFactor::Type::Gaussian: h += 0.5 * f.variance * alpha(k) * alpha(k); break;
      case ProductFactor::Type::Rademacher: h += log_cosh(alpha(k)); break;
      case ProductFactor::Type::PointMass: break;
    }
  }
  return h;
}

void ProductKernel::tilt_mean_into(const ConstVecRef&, const ConstVecRef& alpha,
                                   VecRef out) const {
  for (int k = 0; k < dim(); ++k) {
    const auto& f = factors_[k];
    switch (f.type) {
      case ProductFactor::Type::Gaussian: out(k) = f.variance * alpha(k); break;
      case ProductFactor::Type::Rademacher: out(k) = std::tanh(alpha(k)); break;
      case ProductFactor::Type::PointMass: out(k) = 0.0; break;
    }
  }
}

Mat ProductKernel::covariance_at(const ConstVecRef&) const {
  Mat a = Mat::Zero(dim(), dim());
  for (int k = 0; k < dim(); ++k) {
    const auto& f = factors_[k];
    a(k, k) = f.type == ProductFactor::Type::PointMass ? 0.0 : f.variance;
  }
  return a;
}

void ProductKernel::sample_tilted_into(const ConstVecRef&, const ConstVecRef& alpha,
                                       RngStream& rng, VecRef out) const {
  for (int k = 0; k < dim(); ++k) {
    const auto& f = factors_[k];
    switch (f.type) {
      case ProductFactor::Type::Gaussian:
        out(k) = f.variance * alpha(k) + std::sqrt(f.variance) * standard_normal(rng);
        break;
      case ProductFactor::Type::Rademacher:
        out(k) = signed_unit(rng, rademacher_plus(alpha(k)));
        break;
      case ProductFactor::Type::PointMass: out(k) = 0.0; break;
    }
  }
}

double ProductKernel::support_function(const ConstVecRef&, const ConstVecRef& v) const {
  double total = 0.0;
  for (int k = 0; k < dim(); ++k) {
    switch (factors_[k].type) {
      case ProductFactor::Type::Gaussian:
        if (v(k) != 0.0) return kInf;
        break;
      case ProductFactor::Type::Rademacher: total += std::abs(v(k)); break;
      case ProductFactor::Type::PointMass: break;
    }
  }
  return total;
}

std::optional<double> ProductKernel::legendre_closed_form(const ConstVecRef&,
                                                          const ConstVecRef& beta) const {
  double total = 0.0;
  for (int k = 0; k < dim(); ++k) {
    const auto& f = factors_[k];
    switch (f.type) {
      case ProductFactor::Type::Gaussian: total += 0.5 * beta(k) * beta(k) / f.variance; break;
      case ProductFactor::Type::Rademacher: total += rademacher_legendre(beta(k)); break;
      case ProductFactor::Type::PointMass:
        if (std::abs(beta(k)) > 1e-12) return kInf;
        break;
    }
  }
  return total;
}

bool ProductKernel::degenerate_zero() const {
  return std::all_of(factors_.begin(), factors_.end(), [](const ProductFactor& f) {
    return f.type == ProductFactor::Type::PointMass;
  });
}

// ---------------------------------------------------------------------------
// Custom

CustomKernel::CustomKernel(CustomKernelDef def) : NoiseKernel(def.dim), def_(std::move(def)) {
  if (!def_.sampler || !def_.log_mgf) {
    throw ArgumentError("custom kernel '" + def_.name + "' needs a sampler and a log_mgf");
  }
}

void CustomKernel::sample_into(const ConstVecRef& x, RngStream& rng, VecRef out) const {
  out = def_.sampler(x, rng);
}

double CustomKernel::log_mgf_value(const ConstVecRef& x, const ConstVecRef& alpha) const {
  return def_.log_mgf(x, alpha);
}

void CustomKernel::tilt_mean_into(const ConstVecRef& x, const ConstVecRef& alpha,
                                  VecRef out) const {
  if (def_.tilt_mean) {
    out = def_.tilt_mean(x, alpha);
  } else {
    NoiseKernel::tilt_mean_into(x, alpha, out);
  }
}

Mat CustomKernel::covariance_at(const ConstVecRef& x) const {
  return def_.covariance ? def_.covariance(x) : NoiseKernel::covariance_at(x);
}

void CustomKernel::sample_tilted_into(const ConstVecRef& x, const ConstVecRef& alpha,
                                      RngStream& rng, VecRef out) const {
  if (def_.tilted_sampler) {
    out = def_.tilted_sampler(x, alpha, rng);
  } else {
    NoiseKernel::sample_tilted_into(x, alpha, rng, out);
  }
}

double CustomKernel::support_function(const ConstVecRef& x, const ConstVecRef& v) const {
  return def_.support ? def_.support(x, v) : kInf;
}

std::optional<double> CustomKernel::legendre_closed_form(const ConstVecRef& x,
                                                         const ConstVecRef& beta) const {
  if (!def_.legendre) return std::nullopt;
  return def_.legendre(x, beta);
}

std::optional<double> CustomKernel::tilt_envelope(const ConstVecRef& x,
                                                  const ConstVecRef& alpha) const {
  if (!def_.envelope) return std::nullopt;
  return def_.envelope(x, alpha);
}

KernelPtr make_centered_exponential_kernel(int dim, bool closed_forms) {
  CustomKernelDef def;
  def.dim = dim;
  def.name = closed_forms ? "exponential" : "exponential-generic";
  def.mgf_radius = 1.0;
  def.state_independent = true;
  def.sampler = [dim](const Vec&, RngStream& rng) {
    Vec y(dim);
    for (int k = 0; k < dim; ++k) y(k) = -std::log(uniform_open(rng)) - 1.0;
    return y;
  };
  def.log_mgf = [dim](const Vec&, const Vec& alpha) {
    double h = 0.0;
    for (int k = 0; k < dim; ++k) {
      if (alpha(k) >= 1.0) return kInf;
      h += -alpha(k) - std::log1p(-alpha(k));
    }
    return h;
  };
  def.tilted_sampler = [dim](const Vec&, const Vec& alpha, RngStream& rng) {
    Vec y(dim);
    for (int k = 0; k < dim; ++k) {
      if (alpha(k) >= 1.0) throw DomainError("exponential kernel: tilt component >= 1");
      y(k) = -std::log(uniform_open(rng)) / (1.0 - alpha(k)) - 1.0;
    }
    return y;
  };
  def.covariance = [dim](const Vec&) { return Mat::Identity(dim, dim).eval(); };
  def.support = [dim](const Vec&, const Vec& v) {
    double total = 0.0;
    for (int k = 0; k < dim; ++k) {
      if (v(k) > 0.0) return kInf;
      total -= v(k);
    }
    return total;
  };
  if (closed_forms) {
    def.tilt_mean = [dim](const Vec&, const Vec& alpha) {
      Vec m(dim);
      for (int k = 0; k < dim; ++k) m(k) = alpha(k) / (1.0 - alpha(k));
      return m;
    };
    def.legendre = [dim](const Vec&, const Vec& beta) {
      double total = 0.0;
      for (int k = 0; k < dim; ++k) {
        if (beta(k) <= -1.0) return kInf;
        total += beta(k) - std::log1p(beta(k));
      }
      return total;
    };
  }
  return std::make_shared<CustomKernel>(std::move(def));
}

// ---------------------------------------------------------------------------
// Checked front ends

double log_mgf(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& alpha) {
  require_dim(kernel, alpha, "alpha");
  if (!alpha.allFinite()) throw ArgumentError("log_mgf: alpha must be finite");
  const double h = kernel.log_mgf_value(x, alpha);
  if (std::isnan(h)) {
    throw NumericalError("log_mgf returned NaN at x = " + format_vector(x) +
                         ", alpha = " + format_vector(alpha));
  }
  return h;
}

Vec tilt_mean(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& alpha) {
  require_dim(kernel, alpha, "alpha");
  if (alpha.norm() >= kernel.mgf_radius()) {
    throw DomainError("tilt " + format_vector(alpha) + " is outside the mgf radius " +
                      format_double(kernel.mgf_radius()));
  }
  Vec out(kernel.dim());
  kernel.tilt_mean_into(x, alpha, out);
  if (!out.allFinite()) {
    throw NumericalError("tilt_mean is not finite at x = " + format_vector(x) +
                         ", alpha = " + format_vector(alpha));
  }
  return out;
}

Mat covariance(const NoiseKernel& kernel, const ConstVecRef& x) {
  Mat a = kernel.covariance_at(x);
  if (a.rows() != kernel.dim() || a.cols() != kernel.dim()) {
    throw ArgumentError("covariance has wrong shape");
  }
  if (!a.allFinite()) throw NumericalError("covariance is not finite at x = " + format_vector(x));
  a = 0.5 * (a + a.transpose()).eval();
  const auto eig = spectral::eigen_sym(a);
  const double scale = std::max(1.0, std::abs(eig.values(0)));
  if (eig.values.minCoeff() < -spectral::kNegativeTol * scale) {
    throw NotPsdError("covariance at x = " + format_vector(x) +
                      " is not PSD: smallest eigenvalue " + format_double(eig.values.minCoeff()));
  }
  return a;
}

double tilt_relative_entropy(const NoiseKernel& kernel, const ConstVecRef& x,
                             const ConstVecRef& alpha) {
  const Vec m = tilt_mean(kernel, x, alpha);
  return alpha.dot(m) - log_mgf(kernel, x, alpha);
}

CovarianceEstimate estimate_covariance(const NoiseKernel& kernel, const ConstVecRef& x,
                                       std::int64_t samples, std::uint64_t seed) {
  if (samples < 2) throw ArgumentError("estimate_covariance: need at least 2 samples");
  const int d = kernel.dim();
  Mat sum = Mat::Zero(d, d);
  Mat sum_sq = Mat::Zero(d, d);
  Vec y(d);
  for (std::int64_t i = 0; i < samples; ++i) {
    RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(i), 0);
    kernel.sample_into(x, rng, y);
    const Mat outer = y * y.transpose();
    sum += outer;
    sum_sq += outer.cwiseProduct(outer);
  }
  const double n = static_cast<double>(samples);
  CovarianceEstimate est;
  est.samples = samples;
  est.value = sum / n;
  const Mat var = (sum_sq / n - est.value.cwiseProduct(est.value)) * (n / (n - 1.0));
  est.std_error = (var.cwiseMax(0.0) / n).cwiseSqrt();
  return est;
}

}  // namespace modev
