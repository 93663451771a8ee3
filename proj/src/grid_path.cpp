#include "modev/grid_path.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "modev/errors.hpp"
#include "modev/format.hpp"

namespace modev {

GridPath::GridPath(Mat nodes) : nodes_(std::move(nodes)) {
  if (nodes_.cols() < 2 || nodes_.rows() < 1) {
    throw ArgumentError("GridPath needs at least two nodes of positive dimension");
  }
}

GridPath GridPath::constant(const ConstVecRef& value, int steps) {
  if (steps < 1) throw ArgumentError("GridPath::constant: steps must be >= 1");
  return GridPath(value.replicate(1, steps + 1));
}

Vec GridPath::evaluate(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ArgumentError("GridPath::evaluate: t = " + format_double(t) + " is outside [0, 1]");
  }
  const int m = steps();
  const double mt = m * t;
  const double nearest = std::round(mt);
  if (std::abs(mt - nearest) <= 1e-12 * std::max(1.0, mt)) {
    return nodes_.col(static_cast<Eigen::Index>(nearest));
  }
  const int i = std::min(static_cast<int>(std::floor(mt)), m - 1);
  const double w = mt - i;
  return (1.0 - w) * nodes_.col(i) + w * nodes_.col(i + 1);
}

double GridPath::sup_norm() const { return nodes_.colwise().norm().maxCoeff(); }

Vec interpolate(const GridPath& path, double t) { return path.evaluate(t); }

double sup_distance(const GridPath& p, const GridPath& q) {
  if (p.dim() != q.dim()) throw ArgumentError("sup_distance: dimension mismatch");
  // The difference is piecewise linear on the common refinement, so its norm
  // is maximized at a breakpoint of either grid.
  double best = 0.0;
  for (int j = 0; j <= p.steps(); ++j) best = std::max(best, (p.node(j) - q.evaluate(p.time(j))).norm());
  for (int j = 0; j <= q.steps(); ++j) best = std::max(best, (q.node(j) - p.evaluate(q.time(j))).norm());
  return best;
}

void write_csv(const GridPath& path, std::ostream& out) {
  out << "t";
  for (int k = 0; k < path.dim(); ++k) out << ",x" << k;
  out << "\n";
  for (int j = 0; j <= path.steps(); ++j) {
    out << format_double(path.time(j));
    for (int k = 0; k < path.dim(); ++k) out << "," << format_double(path.nodes()(k, j));
    out << "\n";
  }
}

}  // namespace modev
