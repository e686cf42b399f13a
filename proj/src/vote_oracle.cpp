#include "kpvote/vote_oracle.hpp"

#include <cmath>
#include <limits>

namespace kpvote {

double vote_objective(std::span<const Vec3> points, std::span<const Vec3> dirs,
                      std::span<const double> weights, const Vec3& k) {
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 d = points[i] - k;
    const double along = d.dot(dirs[i]);
    sum += weights[i] * (d.squaredNorm() - along * along);
  }
  return sum;
}

OracleResult brute_force_keypoint(std::span<const Vec3> points,
                                  std::span<const Vec3> dirs,
                                  std::span<const double> weights,
                                  int grid_per_axis, int max_sweeps,
                                  double position_tolerance) {
  if (points.empty() || points.size() != dirs.size() ||
      points.size() != weights.size())
    throw InvalidInput("brute_force_keypoint: bad instance");

  const auto objective = [&](const Vec3& k) {
    return vote_objective(points, dirs, weights, k);
  };

  // Coarse grid over the padded bounding box of the points.
  Vec3 lo = points[0], hi = points[0];
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 pad = 0.5 * (hi - lo) + Vec3::Constant(1e-3);
  lo -= pad;
  hi += pad;

  Vec3 best = lo;
  double best_val = std::numeric_limits<double>::infinity();
  const int g = std::max(grid_per_axis, 2);
  for (int ix = 0; ix < g; ++ix) {
    for (int iy = 0; iy < g; ++iy) {
      for (int iz = 0; iz < g; ++iz) {
        const Vec3 k(lo.x() + (hi.x() - lo.x()) * ix / (g - 1),
                     lo.y() + (hi.y() - lo.y()) * iy / (g - 1),
                     lo.z() + (hi.z() - lo.z()) * iz / (g - 1));
        const double val = objective(k);
        if (val < best_val) {
          best_val = val;
          best = k;
        }
      }
    }
  }

  // Cyclic coordinate descent. Along each axis the objective is an exact
  // parabola, so three samples give the line minimum directly.
  const double h0 = std::max((hi - lo).maxCoeff() / (g - 1), 1e-6);
  OracleResult out;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const Vec3 before = best;
    for (int axis = 0; axis < 3; ++axis) {
      const double h = h0;
      Vec3 plus = best, minus = best;
      plus(axis) += h;
      minus(axis) -= h;
      const double f0 = objective(best);
      const double fp = objective(plus);
      const double fm = objective(minus);
      const double curvature = fp - 2.0 * f0 + fm;
      if (curvature <= 0.0) continue;  // flat direction, leave it alone
      const double step = -h * (fp - fm) / (2.0 * curvature);
      best(axis) += step;
    }
    out.sweeps_used = sweep + 1;
    if ((best - before).norm() < position_tolerance) break;
  }

  out.position = best;
  out.objective = objective(best);
  return out;
}

}  // namespace kpvote
