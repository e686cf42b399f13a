#pragma once

#include <span>
#include <vector>

#include "kpvote/geometry.hpp"
#include "kpvote/voting.hpp"

namespace kpvote {

// Closed-form weighted least-squares rigid fit between ordered point sets:
// centroid subtraction, weighted cross-covariance, SVD, determinant-sign
// correction. Pure rigid, no scale; reflections are never returned.

struct CorrespondenceSet {
  std::vector<Vec3> model_points;     ///< object frame, k_j*
  std::vector<Vec3> observed_points;  ///< camera frame, k_j
  std::vector<double> weights;        ///< >= 0; empty means all ones

  /// Throws TooFewCorrespondences (K < 3 or fewer than 3 positive weights),
  /// ShapeError, InvalidInput.
  void validate() const;
};

struct FitResult {
  RigidTransform transform;
  double rms_residual = 0.0;  ///< sqrt(weighted mean squared error)
};

/// T minimizing sum_j w_j || T k_j* - k_j ||^2 with det(R) = +1.
/// Throws DegenerateGeometry when the cross-covariance is rank-deficient
/// (second singular value below 1e-9 x first), i.e. collinear geometry.
FitResult fit_rigid_transform(const CorrespondenceSet& correspondences);

/// Convenience wrapper over fit_rigid_transform for keypoint sets. Frames
/// must be camera (predicted) and object (model); empty weights mean the
/// unweighted fit.
RigidTransform estimate_pose(const KeypointSet& predicted_camera,
                             const KeypointSet& model_object,
                             std::span<const double> weights = {});

}  // namespace kpvote
