#pragma once

#include <span>
#include <vector>

#include "kpvote/geometry.hpp"
#include "kpvote/voting.hpp"

namespace kpvote {

// Pose-accuracy metrics: average model-point distance (ADD), its
// closest-point variant for symmetric objects (ADD-S), exact step-function
// accuracy-threshold AUC, the 10%-of-diameter accuracy, and keypoint RMSE.

/// Exact max pairwise distance for N <= 5000; above that, a tight lower
/// bound from axis extremes plus a 512-point farthest-point subsample.
double cloud_diameter(std::span<const Vec3> points);

struct ObjectModel {
  PointCloud points;   ///< object frame
  double diameter = 0.0;  ///< meters, max pairwise distance
  bool symmetric = false;

  /// Computes the diameter from the points.
  static ObjectModel create(PointCloud points, bool symmetric);

  /// Validates a supplied diameter: exact comparison (1e-9) for N <= 5000,
  /// sampled-pair lower bound above. Throws InvalidModel.
  static ObjectModel with_diameter(PointCloud points, double diameter,
                                   bool symmetric);
};

/// (1/N) sum_p || (R p + t) - (R* p + t*) ||.
double add_metric(const ObjectModel& model, const RigidTransform& estimated,
                  const RigidTransform& truth);

/// (1/N) sum_p1 min_p2 || (R p1 + t) - (R* p2 + t*) ||. Dispatches to the
/// O(N^2) scan for N <= 2048 and to the exact grid-accelerated
/// nearest-neighbor path above.
double add_s_metric(const ObjectModel& model, const RigidTransform& estimated,
                    const RigidTransform& truth);

// The two ADD-S evaluation paths, exposed so they can be checked against
// each other at any N.
double add_s_metric_brute(const ObjectModel& model,
                          const RigidTransform& estimated,
                          const RigidTransform& truth);
double add_s_metric_grid(const ObjectModel& model,
                         const RigidTransform& estimated,
                         const RigidTransform& truth);

/// Area under accuracy(tau) = fraction of errors < tau for tau in
/// (0, max_threshold], normalized to [0,1]. Exact step-function
/// integration, no binning.
double auc(std::span<const double> errors, double max_threshold);

/// Fraction of errors strictly below 0.1 * diameter.
double add_0_1d_accuracy(std::span<const double> errors, double diameter);

/// Root-mean-square Euclidean keypoint error, meters. Sets must share K,
/// order, and frame.
double keypoint_rmse(const KeypointSet& estimated, const KeypointSet& truth);

struct PoseError {
  double add = 0.0;
  double add_s = 0.0;  ///< <= add by construction
  double keypoint_rmse = 0.0;
};

/// All three errors for one estimate against the ground truth.
PoseError evaluate_pose_error(const ObjectModel& model,
                              const RigidTransform& estimated,
                              const RigidTransform& truth,
                              const KeypointSet& estimated_keypoints,
                              const KeypointSet& truth_keypoints);

}  // namespace kpvote
