#pragma once

#include "modev/types.hpp"

namespace modev::spectral {

/// Relative rank cut: eigenvalues <= kRankRelTol * lambda_max count as zero,
/// and a vector is in the range when its projection residual is at most
/// kRankRelTol * |beta|.
inline constexpr double kRankRelTol = 1e-12;

/// Eigenvalues below -kNegativeTol (absolute, after scaling by max(1, |A|))
/// mean the matrix is not PSD; smaller negative values are clamped to zero.
inline constexpr double kNegativeTol = 1e-10;

struct EigenDecomposition {
  Mat vectors;  ///< orthogonal, columns are eigenvectors
  Vec values;   ///< descending
};

/// Symmetric eigendecomposition with eigenvalues sorted descending.
/// The input is symmetrized first.
EigenDecomposition eigen_sym(const ConstMatRef& a);

/// Absolute threshold below which an eigenvalue is treated as zero.
double rank_threshold(const Vec& eigenvalues);

/// Symmetric PSD square root. Throws NotPsdError on eigenvalues below
/// -kNegativeTol.
Mat psd_sqrt(const ConstMatRef& a);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix.
Mat psd_pinv(const ConstMatRef& a);

/// |beta|^2 in the A^{-1} norm with the infinite convention: +inf when beta
/// has a component outside the span of the positive-eigenvalue eigenvectors.
double pinv_quad_form(const ConstMatRef& a, const ConstVecRef& beta);

/// Q diag(min(1/lambda_i, K^2))^{1/2} Q^T, where 1/0 = +inf so null
/// directions get exactly K.
Mat truncated_inv_sqrt(const ConstMatRef& a, double k);

}  // namespace modev::spectral
