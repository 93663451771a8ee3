#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "modev/rng.hpp"
#include "modev/types.hpp"

namespace modev {

enum class KernelKind { Gaussian, Rademacher, DiscreteFinite, DegenerateProduct, Custom };

std::string to_string(KernelKind kind);

/// State-dependent centered noise distribution mu_x on R^d.
///
/// Implementations are pure: no mutable state, no stored RNG. Every random
/// method takes the stream explicitly so a kernel can be shared across
/// worker threads.
class NoiseKernel {
 public:
  virtual ~NoiseKernel() = default;

  int dim() const { return dim_; }
  virtual KernelKind kind() const = 0;
  virtual std::string name() const = 0;

  /// Draw from mu_x.
  virtual void sample_into(const ConstVecRef& x, RngStream& rng, VecRef out) const = 0;

  /// H_c(x, alpha) = log E exp<y, alpha>. May return +inf.
  virtual double log_mgf_value(const ConstVecRef& x, const ConstVecRef& alpha) const = 0;

  /// Mean of the tilted law, i.e. the alpha-gradient of H_c. The default
  /// uses central differences of log_mgf_value with h = 1e-5 (1 + |alpha|).
  virtual void tilt_mean_into(const ConstVecRef& x, const ConstVecRef& alpha, VecRef out) const;

  /// A(x). The default is a fixed-seed Monte Carlo estimate.
  virtual Mat covariance_at(const ConstVecRef& x) const;

  /// Draw from eta(dy) ~ exp<y, alpha> mu_x(dy). The default is rejection
  /// sampling against mu_x using tilt_envelope; kernels without one throw
  /// UnsupportedTiltError.
  virtual void sample_tilted_into(const ConstVecRef& x, const ConstVecRef& alpha, RngStream& rng,
                                  VecRef out) const;

  /// Radius of a Euclidean ball on which H_c is finite (+inf if everywhere).
  virtual double mgf_radius() const { return kInf; }

  /// Support function sup_{y in supp mu_x} <y, v>; +inf when unbounded or
  /// unknown.
  virtual double support_function(const ConstVecRef& x, const ConstVecRef& v) const;

  /// Closed-form Legendre transform of H_c(x, .), when the kernel knows one.
  virtual std::optional<double> legendre_closed_form(const ConstVecRef& x,
                                                     const ConstVecRef& beta) const;

  /// M(alpha) >= sup_{y in supp} <y, alpha>, used by the rejection sampler.
  virtual std::optional<double> tilt_envelope(const ConstVecRef& x, const ConstVecRef& alpha) const;

  /// True when the noise is identically zero for every x.
  virtual bool degenerate_zero() const { return false; }

  /// True when mu_x does not depend on x.
  virtual bool state_independent() const { return true; }

  /// Scalar versions for d = 1, used by the sampler's scalar loop. The
  /// defaults wrap the vector methods.
  virtual double sample_tilted_1d(double x, double alpha, RngStream& rng) const;
  virtual double log_mgf_1d(double x, double alpha) const;

 protected:
  explicit NoiseKernel(int dim);

 private:
  int dim_;
};

using KernelPtr = std::shared_ptr<const NoiseKernel>;

/// N(0, C) with constant covariance C (may be singular).
class GaussianKernel final : public NoiseKernel {
 public:
  explicit GaussianKernel(Mat covariance);

  KernelKind kind() const override { return KernelKind::Gaussian; }
  std::string name() const override { return "gaussian"; }
  double sample_tilted_1d(double x, double alpha, RngStream& rng) const override;
  double log_mgf_1d(double, double alpha) const override { return 0.5 * cov_(0, 0) * alpha * alpha; }
  void sample_into(const ConstVecRef& x, RngStream& rng, VecRef out) const override;
  double log_mgf_value(const ConstVecRef& x, const ConstVecRef& alpha) const override;
  void tilt_mean_into(const ConstVecRef& x, const ConstVecRef& alpha, VecRef out) const override;
  Mat covariance_at(const ConstVecRef&) const override { return cov_; }
  void sample_tilted_into(const ConstVecRef& x, const ConstVecRef& alpha, RngStream& rng,
                          VecRef out) const override;
  double support_function(const ConstVecRef& x, const ConstVecRef& v) const override;
  std::optional<double> legendre_closed_form(const ConstVecRef& x,
                                             const ConstVecRef& beta) const override;

 private:
  Mat cov_;
  Mat sqrt_;
};

/// Independent +-1 coordinates with equal probability.
class RademacherKernel final : public NoiseKernel {
 public:
  explicit RademacherKernel(int dim);

  KernelKind kind() const override { return KernelKind::Rademacher; }
  std::string name() const override { return "rademacher"; }
  double sample_tilted_1d(double x, double alpha, RngStream& rng) const override;
  double log_mgf_1d(double x, double alpha) const override;
  void sample_into(const ConstVecRef& x, RngStream& rng, VecRef out) const override;
  double log_mgf_value(const ConstVecRef& x, const ConstVecRef& alpha) const override;
  void tilt_mean_into(const ConstVecRef& x, const ConstVecRef& alpha, VecRef out) const override;
  Mat covariance_at(const ConstVecRef& x) const override;
  void sample_tilted_into(const ConstVecRef& x, const ConstVecRef& alpha, RngStream& rng,
                          VecRef out) const override;
  double support_function(const ConstVecRef& x, const ConstVecRef& v) const override;
  std::optional<double> legendre_closed_form(const ConstVecRef& x,
                                             const ConstVecRef& beta) const override;
};

/// Finitely many atoms (columns of `atoms`) with probabilities summing to
/// one and zero mean. Tilting reweights the atoms.
class DiscreteKernel final : public NoiseKernel {
 public:
  DiscreteKernel(Mat atoms, Vec probabilities);

  KernelKind kind() const override { return KernelKind::DiscreteFinite; }
  std::string name() const override { return "discrete"; }
  void sample_into(const ConstVecRef& x, RngStream& rng, VecRef out) const override;
  double log_mgf_value(const ConstVecRef& x, const ConstVecRef& alpha) const override;
  void tilt_mean_into(const ConstVecRef& x, const ConstVecRef& alpha, VecRef out) const override;
  Mat covariance_at(const ConstVecRef& x) const override;
  void sample_tilted_into(const ConstVecRef& x, const ConstVecRef& alpha, RngStream& rng,
                          VecRef out) const override;
  double support_function(const ConstVecRef& x, const ConstVecRef& v) const override;
  bool degenerate_zero() const override;

  const Mat& atoms() const { return atoms_; }
  const Vec& probabilities() const { return probs_; }

  /// Probabilities of the atoms under the tilt alpha.
  Vec tilted_probabilities(const ConstVecRef& alpha) const;

 private:
  Mat atoms_;
  Vec probs_;
  Vec log_probs_;
};

/// One coordinate of a product kernel.
struct ProductFactor {
  enum class Type { Gaussian, Rademacher, PointMass };
  Type type = Type::PointMass;
  double variance = 1.0;  ///< Gaussian only

  static ProductFactor gaussian(double variance) { return {Type::Gaussian, variance}; }
  static ProductFactor rademacher() { return {Type::Rademacher, 1.0}; }
  static ProductFactor point_mass() { return {Type::PointMass, 0.0}; }
};

/// Independent one-dimensional factors; point masses make the covariance
/// singular.
class ProductKernel final : public NoiseKernel {
 public:
  explicit ProductKernel(std::vector<ProductFactor> factors);

  KernelKind kind() const override { return KernelKind::DegenerateProduct; }
  std::string name() const override { return "product"; }
  void sample_into(const ConstVecRef& x, RngStream& rng, VecRef out) const override;
  double log_mgf_value(const ConstVecRef& x, const ConstVecRef& alpha) const override;
  void tilt_mean_into(const ConstVecRef& x, const ConstVecRef& alpha, VecRef out) const override;
  Mat covariance_at(const ConstVecRef& x) const override;
  void sample_tilted_into(const ConstVecRef& x, const ConstVecRef& alpha, RngStream& rng,
                          VecRef out) const override;
  double support_function(const ConstVecRef& x, const ConstVecRef& v) const override;
  std::optional<double> legendre_closed_form(const ConstVecRef& x,
                                             const ConstVecRef& beta) const override;
  bool degenerate_zero() const override;

  const std::vector<ProductFactor>& factors() const { return factors_; }

 private:
  std::vector<ProductFactor> factors_;
};

/// User-supplied kernel. Only `sampler` and `log_mgf` are required.
struct CustomKernelDef {
  int dim = 1;
  std::string name = "custom";
  std::function<Vec(const Vec& x, RngStream& rng)> sampler;
  std::function<double(const Vec& x, const Vec& alpha)> log_mgf;
  std::function<Vec(const Vec& x, const Vec& alpha, RngStream& rng)> tilted_sampler;
  std::function<Vec(const Vec& x, const Vec& alpha)> tilt_mean;
  std::function<Mat(const Vec& x)> covariance;
  std::function<double(const Vec& x, const Vec& alpha)> envelope;
  std::function<double(const Vec& x, const Vec& beta)> legendre;
  std::function<double(const Vec& x, const Vec& v)> support;
  double mgf_radius = kInf;
  bool state_independent = false;
};

class CustomKernel final : public NoiseKernel {
 public:
  explicit CustomKernel(CustomKernelDef def);

  KernelKind kind() const override { return KernelKind::Custom; }
  std::string name() const override { return def_.name; }
  void sample_into(const ConstVecRef& x, RngStream& rng, VecRef out) const override;
  double log_mgf_value(const ConstVecRef& x, const ConstVecRef& alpha) const override;
  void tilt_mean_into(const ConstVecRef& x, const ConstVecRef& alpha, VecRef out) const override;
  Mat covariance_at(const ConstVecRef& x) const override;
  void sample_tilted_into(const ConstVecRef& x, const ConstVecRef& alpha, RngStream& rng,
                          VecRef out) const override;
  double mgf_radius() const override { return def_.mgf_radius; }
  double support_function(const ConstVecRef& x, const ConstVecRef& v) const override;
  std::optional<double> legendre_closed_form(const ConstVecRef& x,
                                             const ConstVecRef& beta) const override;
  std::optional<double> tilt_envelope(const ConstVecRef& x, const ConstVecRef& alpha) const override;
  bool state_independent() const override { return def_.state_independent; }

 private:
  CustomKernelDef def_;
};

/// Centered unit exponential coordinates, y = E - 1. Light-tailed with a
/// finite mgf radius of 1; exact tilting (E ~ Exp(1 - alpha)). Built on
/// CustomKernel. With closed_forms = false the Legendre transform and the
/// tilted mean fall back to the generic numerical routes.
KernelPtr make_centered_exponential_kernel(int dim, bool closed_forms = true);

// Checked front ends used throughout the library.

/// H_c(x, alpha). Throws NumericalError naming (x, alpha) on NaN.
double log_mgf(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& alpha);

/// Mean of the alpha-tilted law. Throws DomainError outside the mgf radius.
Vec tilt_mean(const NoiseKernel& kernel, const ConstVecRef& x, const ConstVecRef& alpha);

/// A(x), symmetrized. Throws NotPsdError if it is not PSD within tolerance.
Mat covariance(const NoiseKernel& kernel, const ConstVecRef& x);

/// R(eta^alpha || mu_x) = <alpha, tilt_mean> - H_c for an exponential tilt.
double tilt_relative_entropy(const NoiseKernel& kernel, const ConstVecRef& x,
                             const ConstVecRef& alpha);

struct CovarianceEstimate {
  Mat value;
  Mat std_error;
  std::int64_t samples = 0;
};

/// Monte Carlo covariance with entrywise standard errors.
CovarianceEstimate estimate_covariance(const NoiseKernel& kernel, const ConstVecRef& x,
                                       std::int64_t samples, std::uint64_t seed);

}  // namespace modev
