#pragma once

#include <span>
#include <vector>

#include "kpvote/geometry.hpp"

namespace kpvote {

// The multi-task supervision terms as differentiable scalar functions with
// analytic gradients: focal loss for segmentation, per-vector L1, and the
// confidence-weighted vector-field loss
//   L_vecf = (1/M) sum_i (l_i c_i - w log c_i).

struct LossConfig {
  double lambda_seg = 1.0;
  double lambda_vecf = 1.0;
  double w_balance = 0.015;
  double focal_gamma = 2.0;
  double focal_alpha = 0.25;

  void validate() const;
};

struct FocalResult {
  double loss = 0.0;
  double d_loss_d_prob = 0.0;
};

/// -alpha (1 - p_t)^gamma log(p_t) with p_t = p for positives, 1 - p
/// otherwise. Throws DomainError unless p is strictly inside (0, 1).
FocalResult focal_loss(double predicted_prob, bool is_positive,
                       const LossConfig& config = {});

struct L1Result {
  double loss = 0.0;
  Vec3 gradient = Vec3::Zero();  ///< d loss / d predicted; 0 at kinks
};

/// Component-wise absolute difference, summed.
L1Result kps_l1_loss(const UnitVector3& predicted, const UnitVector3& target);

struct VecfSample {
  UnitVector3 predicted_vector;
  UnitVector3 target_vector;
  double confidence = 1.0;  ///< in (0, 1]
};

struct VecfResult {
  double loss = 0.0;
  std::vector<double> d_loss_d_confidence;  ///< (l_i - w / c_i) / M
};

VecfResult vecf_loss(std::span<const VecfSample> samples,
                     const LossConfig& config = {});

/// lambda_1 * L_seg + lambda_2 * L_vecf.
double total_loss(double seg_loss, double vecf, const LossConfig& config = {});

}  // namespace kpvote
