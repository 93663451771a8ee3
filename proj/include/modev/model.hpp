#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "modev/kernel.hpp"
#include "modev/types.hpp"

namespace modev {

/// Drift field b: R^d -> R^d with Jacobian Db.
class Drift {
 public:
  virtual ~Drift() = default;

  int dim() const { return dim_; }
  virtual std::string name() const = 0;
  virtual void value_into(const ConstVecRef& x, VecRef out) const = 0;
  virtual void jacobian_into(const ConstVecRef& x, Eigen::Ref<Mat> out) const = 0;

  Vec value(const ConstVecRef& x) const;
  Mat jacobian(const ConstVecRef& x) const;

  /// b(x) for d = 1, used by the sampler's scalar loop.
  virtual double value_1d(double x) const;

 protected:
  explicit Drift(int dim);

 private:
  int dim_;
};

using DriftPtr = std::shared_ptr<const Drift>;

/// b(x) = M x + c. `ou` drift is M = -theta I, c = 0.
class LinearDrift final : public Drift {
 public:
  LinearDrift(Mat matrix, Vec offset);
  std::string name() const override { return "linear"; }
  void value_into(const ConstVecRef& x, VecRef out) const override;
  double value_1d(double x) const override { return matrix_(0, 0) * x + offset_(0); }
  void jacobian_into(const ConstVecRef& x, Eigen::Ref<Mat> out) const override;

 private:
  Mat matrix_;
  Vec offset_;
};

/// b(x)_k = -scale * tanh(x_k). Bounded with bounded derivative.
class TanhDrift final : public Drift {
 public:
  TanhDrift(int dim, double scale);
  std::string name() const override { return "tanh"; }
  void value_into(const ConstVecRef& x, VecRef out) const override;
  double value_1d(double x) const override;
  void jacobian_into(const ConstVecRef& x, Eigen::Ref<Mat> out) const override;

 private:
  double scale_;
};

/// b(x)_k = x_k^2. Violates the boundedness condition; kept for validation.
class SquareDrift final : public Drift {
 public:
  explicit SquareDrift(int dim);
  std::string name() const override { return "square"; }
  void value_into(const ConstVecRef& x, VecRef out) const override;
  double value_1d(double x) const override { return x * x; }
  void jacobian_into(const ConstVecRef& x, Eigen::Ref<Mat> out) const override;
};

/// Programmatic drift from closures.
class CustomDrift final : public Drift {
 public:
  CustomDrift(int dim, std::function<Vec(const Vec&)> value,
              std::function<Mat(const Vec&)> jacobian, std::string name = "custom");
  std::string name() const override { return name_; }
  void value_into(const ConstVecRef& x, VecRef out) const override;
  void jacobian_into(const ConstVecRef& x, Eigen::Ref<Mat> out) const override;

 private:
  std::function<Vec(const Vec&)> value_;
  std::function<Mat(const Vec&)> jacobian_;
  std::string name_;
};

DriftPtr make_zero_drift(int dim);
DriftPtr make_constant_drift(Vec value);
DriftPtr make_ou_drift(int dim, double theta);

/// Declared constants of the boundedness / mgf condition. Metadata only;
/// validate_model measures the actual values on a probe box.
struct DeclaredBounds {
  double drift = 10.0;        ///< K_b, bound on |b| and |Db|
  double covariance = 10.0;   ///< K_A
  double mgf = 10.0;          ///< K_mgf
  double lambda = 1.0;        ///< mgf ball radius
  double probe_radius = 5.0;  ///< half-width of the validation probe box
};

struct ModelSpec {
  std::string id = "custom";
  int dim = 1;
  Vec x0;
  DriftPtr drift;
  KernelPtr kernel;
  double gamma = 0.25;  ///< a(n) = n^{-gamma}
  DeclaredBounds bounds;

  /// Scaling a(n) = n^{-gamma}.
  double a(std::int64_t n) const;
  /// a(n) sqrt(n).
  double amplification(std::int64_t n) const;
};

/// Checks shapes and gamma in (0, 1/2); throws ConfigError otherwise.
ModelSpec make_model(std::string id, Vec x0, DriftPtr drift, KernelPtr kernel,
                     double gamma = 0.25, DeclaredBounds bounds = {});

struct ValidationClause {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = true;
  std::string detail;
};

/// Probe-based, hence partial, check of the model conditions.
struct ValidationReport {
  bool pass = true;
  bool partial = true;
  int probe_count = 0;
  double probe_radius = 0.0;
  std::vector<ValidationClause> clauses;

  const ValidationClause* find(const std::string& name) const;
};

/// Probes `probe_count` points (x0 first, the rest uniform in the declared
/// box) and reports each clause: drift bound, Jacobian bound, finite
/// difference Jacobian check, mgf bound on |alpha| <= lambda, sampler mean,
/// covariance bound and PSD, Hessian-at-zero vs covariance, and a measured
/// third-derivative constant. Throws NumericalError naming the point on
/// non-finite drift or kernel output.
ValidationReport validate_model(const ModelSpec& spec, int probe_count, std::uint64_t seed);

}  // namespace modev
