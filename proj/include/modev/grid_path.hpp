#pragma once

#include <ostream>

#include "modev/types.hpp"

namespace modev {

/// Values on the uniform grid t_j = j/m of [0, 1], j = 0..m, read as a
/// piecewise-linear path. Nodes are stored column-wise (d x (m+1)).
class GridPath {
 public:
  GridPath() = default;
  explicit GridPath(Mat nodes);
  /// Constant path.
  static GridPath constant(const ConstVecRef& value, int steps);

  int dim() const { return static_cast<int>(nodes_.rows()); }
  int steps() const { return static_cast<int>(nodes_.cols()) - 1; }
  double time(int j) const { return static_cast<double>(j) / steps(); }

  const Mat& nodes() const { return nodes_; }
  Mat& nodes() { return nodes_; }
  auto node(int j) const { return nodes_.col(j); }
  auto terminal() const { return nodes_.col(steps()); }

  /// Piecewise-linear evaluation; grid times return the stored node.
  /// Throws ArgumentError for t outside [0, 1].
  Vec evaluate(double t) const;

  /// max_j |node_j| (the sup norm of a piecewise-linear path).
  double sup_norm() const;

 private:
  Mat nodes_;
};

/// interpolate(path, t) == path.evaluate(t).
Vec interpolate(const GridPath& path, double t);

/// sup_t |p(t) - q(t)|, evaluated on the union of both grids.
double sup_distance(const GridPath& p, const GridPath& q);

/// CSV with header "t,x0,x1,..." and one row per node, %.10g.
void write_csv(const GridPath& path, std::ostream& out);

}  // namespace modev
