#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "modev/ratefn.hpp"
#include "modev/types.hpp"

namespace modev {

/// Per-step exponential tilts alpha_0..alpha_{n-1}. State-frozen schedules
/// store the tilts; a feedback schedule computes alpha_i from (i, Xbar_i).
struct ControlSchedule {
  using Feedback = std::function<void(int step, const ConstVecRef& xbar, VecRef alpha)>;

  int n = 0;
  double k = 0.0;
  Mat tilts;                          ///< d x n
  std::optional<ControlPath> source;  ///< the control u the tilts were built from
  bool feedback = false;
  Feedback feedback_fn;
  std::uint64_t fingerprint = 0;
  /// H_c(alpha_i), filled by PathSampler::prepare for state-independent
  /// kernels. Empty means "evaluate per step".
  Vec frozen_log_mgf;

  int dim() const { return static_cast<int>(tilts.rows()); }

  void tilt_into(int step, const ConstVecRef& xbar, VecRef alpha) const {
    if (feedback) {
      feedback_fn(step, xbar, alpha);
    } else {
      alpha = tilts.col(step);
    }
  }

  bool is_zero() const { return !feedback && tilts.isZero(0.0); }

  /// alpha_i = 0 for every step.
  static ControlSchedule zero(int dim, int n);
  /// alpha_i = alpha for every step.
  static ControlSchedule constant(const ConstVecRef& alpha, int n);
  /// Tilts given column-wise.
  static ControlSchedule from_tilts(Mat tilts);
};

/// 64-bit hash of a byte range, chained through `seed`.
std::uint64_t hash_bytes(const void* data, std::size_t size, std::uint64_t seed = 0);
std::uint64_t hash_matrix(const Mat& m, std::uint64_t seed = 0);
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);

}  // namespace modev
