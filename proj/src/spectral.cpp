#include "modev/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "modev/errors.hpp"

namespace modev::spectral {

EigenDecomposition eigen_sym(const ConstMatRef& a) {
  if (a.rows() != a.cols()) {
    throw ArgumentError("eigen_sym: matrix is " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
  }
  const Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigen_sym: symmetric eigensolver failed");
  }
  // Eigen returns ascending order.
  const Eigen::Index d = sym.rows();
  EigenDecomposition out{Mat(d, d), Vec(d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values(i) = solver.eigenvalues()(d - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  return out;
}

double rank_threshold(const Vec& eigenvalues) {
  if (eigenvalues.size() == 0) return 0.0;
  const double lmax = std::max(eigenvalues.maxCoeff(), 0.0);
  return kRankRelTol * lmax;
}

namespace {

void check_psd(const Vec& values, double scale) {
  if (values.size() == 0) return;
  if (values.minCoeff() < -kNegativeTol * std::max(1.0, scale)) {
    throw NotPsdError("matrix is not positive semidefinite: smallest eigenvalue " +
                      std::to_string(values.minCoeff()));
  }
}

}  // namespace

Mat psd_sqrt(const ConstMatRef& a) {
  const auto eig = eigen_sym(a);
  check_psd(eig.values, eig.values.size() ? std::abs(eig.values(0)) : 0.0);
  const Vec root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * root.asDiagonal() * eig.vectors.transpose();
}

Mat psd_pinv(const ConstMatRef& a) {
  const auto eig = eigen_sym(a);
  const double cut = rank_threshold(eig.values);
  Vec inv = Vec::Zero(eig.values.size());
  for (Eigen::Index i = 0; i < inv.size(); ++i) {
    if (eig.values(i) > cut && eig.values(i) > 0.0) inv(i) = 1.0 / eig.values(i);
  }
  return eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
}

double pinv_quad_form(const ConstMatRef& a, const ConstVecRef& beta) {
  const auto eig = eigen_sym(a);
  const double cut = rank_threshold(eig.values);
  const Vec coords = eig.vectors.transpose() * beta;
  double value = 0.0;
  double residual_sq = 0.0;
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    if (eig.values(i) > cut && eig.values(i) > 0.0) {
      value += coords(i) * coords(i) / eig.values(i);
    } else {
      residual_sq += coords(i) * coords(i);
    }
  }
  if (std::sqrt(residual_sq) > kRankRelTol * beta.norm()) return kInf;
  return value;
}

Mat truncated_inv_sqrt(const ConstMatRef& a, double k) {
  if (!(k > 0.0)) throw ArgumentError("truncated_inv_sqrt: K must be positive");
  const auto eig = eigen_sym(a);
  const double cut = rank_threshold(eig.values);
  const double k2 = k * k;
  Vec diag(eig.values.size());
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    const double lam = eig.values(i);
    const double inv = (lam > cut && lam > 0.0) ? 1.0 / lam : kInf;
    diag(i) = std::sqrt(std::min(inv, k2));
  }
  return eig.vectors * diag.asDiagonal() * eig.vectors.transpose();
}

}  // namespace modev::spectral
