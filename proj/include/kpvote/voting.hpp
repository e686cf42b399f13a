#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kpvote/geometry.hpp"

namespace kpvote {

// Weighted vector-wise voting. Each scene point p_i casts a ray along its
// predicted unit direction v_i toward a keypoint; the keypoint estimate is
// the point minimizing the weighted squared perpendicular distance to all
// rays,
//
//   D(k) = sum_i c_i (p_i - k)^T (I - v_i v_i^T) (p_i - k),
//
// which is a convex quadratic solved in closed form: one accumulation pass
// builds A = sum_i c_i (I - v_i v_i^T) and b = sum_i c_i (I - v_i v_i^T) p_i,
// then k = A^+ b. No iteration anywhere.

/// K ordered keypoints in a tagged frame. Order is stable and matches the
/// vector-field row order.
enum class Frame { object, camera };
struct KeypointSet {
  std::vector<Vec3> keypoints;
  Frame frame = Frame::object;
};

/// One voting instance: M camera-frame points, K unit-vector fields stored
/// row-major (row j = field for keypoint j), and M shared weights.
struct VectorVoteProblem {
  PointCloud points;                  ///< M points, camera frame, meters
  std::vector<UnitVector3> vectors;   ///< K*M, row-major
  std::vector<double> weights;        ///< M, all >= 0, at least one > 0
  std::size_t keypoint_count = 0;

  std::size_t point_count() const { return points.size(); }

  std::span<const UnitVector3> field(std::size_t j) const {
    return std::span<const UnitVector3>(vectors).subspan(j * points.size(),
                                                         points.size());
  }

  /// Throws ShapeError / InvalidInput / DegenerateProblem on violation.
  void validate() const;
};

/// Accumulated normal system A k = b plus the objective's constant term,
/// so the residual D(k) = constant - 2 k.b + k.A k is recoverable from the
/// system alone.
struct NormalSystem {
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  double constant = 0.0;     ///< sum_i c_i p_i^T (I - v_i v_i^T) p_i
  double weight_mass = 0.0;  ///< sum_i c_i
};

/// Solution for one keypoint.
struct KeypointEstimate {
  Vec3 position = Vec3::Zero();
  int normal_matrix_rank = 0;  ///< 0..3, from the pseudoinverse
  double residual = 0.0;       ///< objective D at the solution, >= 0
  double weight_mass = 0.0;
};

/// One compensated-summation pass over the points. Zero-weight points are
/// skipped outright so they cannot perturb the accumulators.
/// Throws ShapeError on length mismatch, DegenerateProblem when every
/// weight is zero, InvalidInput on non-finite data.
NormalSystem accumulate_normal_system(std::span<const Vec3> points,
                                      std::span<const UnitVector3> vectors,
                                      std::span<const double> weights);

/// Minimum-norm least-squares solution A^+ b with rank reporting. The
/// residual is the objective value at the solution (clamped at zero against
/// round-off). Rank-deficient systems are not an error: the minimum-norm
/// answer plus the rank flag lets callers decide.
KeypointEstimate solve_keypoint(const NormalSystem& system,
                                double rank_tolerance = 1e-9);

/// Independent closed-form solve per keypoint row; output order matches the
/// vector-field row order and reruns are bit-identical.
std::vector<KeypointEstimate> vote_all_keypoints(
    const VectorVoteProblem& problem, double rank_tolerance = 1e-9);

}  // namespace kpvote
