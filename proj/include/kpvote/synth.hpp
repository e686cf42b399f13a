#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kpvote/geometry.hpp"
#include "kpvote/metrics.hpp"
#include "kpvote/voting.hpp"

namespace kpvote {

// Deterministic ground-truth-known scene generation: a sampled object
// surface, farthest-point keypoints, a random pose, and vector fields /
// offsets corrupted by angular noise, direction outliers, and contiguous
// spherical-cap occlusion. Scene bytes depend only on the config; every
// consumer of randomness has its own purpose-tagged stream.

enum class ShapeKind { sphere, box, cylinder, loaded };
enum class WeightModel { uniform, oracle, random };

struct SceneConfig {
  std::uint64_t seed = 0;
  std::size_t point_count = 12800;
  std::size_t keypoint_count = 8;
  ShapeKind shape = ShapeKind::sphere;
  std::string model_file;  ///< required for ShapeKind::loaded
  double angular_noise_deg = 0.0;
  double outlier_fraction = 0.0;   ///< in [0, 1)
  double occlusion_fraction = 0.0; ///< in [0, 1)
  WeightModel weight_model = WeightModel::uniform;

  void validate() const;
};

struct SyntheticScene {
  ObjectModel model;                  ///< object frame, N = point_count
  KeypointSet model_keypoints;        ///< object frame, K
  RigidTransform truth_pose;
  KeypointSet truth_keypoints_camera; ///< truth_pose applied to model keypoints
  VectorVoteProblem problem;          ///< M = points kept after occlusion
  std::vector<Vec3> offsets;          ///< K*M, for the clustering baseline
  std::vector<char> outlier_mask;     ///< M, 1 = corrupted point
};

/// Greedy farthest-point sampling starting from a seeded random index.
/// Throws InvalidInput when k exceeds the cloud size.
KeypointSet farthest_point_sample(const PointCloud& cloud, std::size_t k,
                                  std::uint64_t seed);

/// Throws DegenerateScene when occlusion removes every point.
SyntheticScene generate_scene(const SceneConfig& config);

/// ASCII point cloud: one "x y z" triple per line (meters), lines starting
/// with '#' ignored. Throws IoError / InvalidInput.
PointCloud load_point_cloud(const std::string& path);

/// Self-describing JSON dump of a scene (debugging aid); schema documented
/// in the README.
void dump_scene(const SyntheticScene& scene, const SceneConfig& config,
                std::ostream& out);

}  // namespace kpvote
