#pragma once

#include <span>

#include "kpvote/geometry.hpp"

namespace kpvote {

// Brute-force reference minimizer for the voting objective, kept deliberately
// independent of the closed-form solver: it never touches the normal-system
// accumulation or the pseudoinverse, only direct evaluation of the objective
//
//   D(k) = sum_i c_i ( ||p_i - k||^2 - ((p_i - k) . v_i)^2 ).
//
// Method: coarse grid search over a padded bounding box of the points,
// then cyclic coordinate descent where each 1-D step is an exact parabolic
// line minimization (the objective is quadratic along any line).

struct OracleResult {
  Vec3 position = Vec3::Zero();
  double objective = 0.0;
  int sweeps_used = 0;
};

/// Direct summation of the objective at k.
double vote_objective(std::span<const Vec3> points, std::span<const Vec3> dirs,
                      std::span<const double> weights, const Vec3& k);

/// Grid resolution and descent limits are tuned so that well-conditioned
/// instances converge to ~1e-8 position accuracy.
OracleResult brute_force_keypoint(std::span<const Vec3> points,
                                  std::span<const Vec3> dirs,
                                  std::span<const double> weights,
                                  int grid_per_axis = 9, int max_sweeps = 4000,
                                  double position_tolerance = 1e-11);

}  // namespace kpvote
