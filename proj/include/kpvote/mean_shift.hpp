#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kpvote/geometry.hpp"
#include "kpvote/voting.hpp"

namespace kpvote {

// Iterative kernel mode-seeking over candidate keypoint positions; the
// clustering baseline the closed-form voter is compared against. Candidates
// are full offsets (p_i + offset_i), not unit vectors.

enum class Kernel { flat, gaussian };

struct MeanShiftConfig {
  double bandwidth = 0.01;        ///< meters, > 0
  Kernel kernel = Kernel::gaussian;
  int max_iterations = 100;
  double shift_tolerance = 1e-5;  ///< meters, > 0
  double merge_radius = 0.005;    ///< meters, > 0 and <= bandwidth

  /// Declared defaults, scale-relative so the baseline is fair across
  /// object sizes: gaussian kernel, bandwidth = 0.05 * diameter,
  /// merge_radius = bandwidth / 2.
  static MeanShiftConfig for_object_diameter(double diameter);

  void validate() const;
};

struct CandidateSet {
  std::vector<Vec3> candidates;
  std::vector<double> weights;  ///< >= 0, at least one positive

  void validate() const;
};

struct ModeResult {
  Vec3 mode = Vec3::Zero();
  int iterations_used = 0;  ///< max over seed trajectories
  double support = 0.0;     ///< kernel-weighted density at the mode
};

/// Reusable scratch space (spatial grid + seed list) so repeated timed calls
/// allocate nothing once warm.
struct MeanShiftWorkspace {
  std::vector<int> cell_start;
  std::vector<int> order;
  std::vector<int> cell_index;
  std::vector<std::size_t> seeds;
};

/// Runs weighted kernel mean updates from every seed (all candidates when
/// M <= 512, else 512 farthest-point-sampled candidates), converges on
/// shift < shift_tolerance or max_iterations, merges modes within
/// merge_radius (descending support, ties by lexicographic position) and
/// returns the strongest. Deterministic. Throws DegenerateProblem on an
/// empty or zero-weight candidate set.
ModeResult mean_shift_mode(const CandidateSet& candidates,
                           const MeanShiftConfig& config,
                           MeanShiftWorkspace* workspace = nullptr);

/// Candidates p_i + offset_{j,i} for keypoint j, weights shared with the
/// problem. offsets is K*M row-major.
CandidateSet make_candidates(const VectorVoteProblem& problem,
                             std::span<const Vec3> offsets, std::size_t j);

/// Runs mean_shift_mode per keypoint over shared points and offsets.
/// Throws ShapeError on shape mismatch; DegenerateProblem (annotated with
/// the keypoint index) when a keypoint has no usable candidates.
std::vector<Vec3> cluster_all_keypoints(const VectorVoteProblem& problem,
                                        std::span<const Vec3> offsets,
                                        const MeanShiftConfig& config);

}  // namespace kpvote
