#include "kpvote/pose_fit.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace kpvote {

void CorrespondenceSet::validate() const {
  if (model_points.size() != observed_points.size())
    throw ShapeError("CorrespondenceSet: model/observed length mismatch");
  if (!weights.empty() && weights.size() != model_points.size())
    throw ShapeError("CorrespondenceSet: weights length mismatch");
  if (model_points.size() < 3)
    throw TooFewCorrespondences(
        "CorrespondenceSet: need at least 3 correspondences");
  validate_cloud(model_points, "CorrespondenceSet model");
  validate_cloud(observed_points, "CorrespondenceSet observed");
  if (!weights.empty()) {
    std::size_t positive = 0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw InvalidInput("CorrespondenceSet: weights must be finite, >= 0");
      if (w > 0.0) ++positive;
    }
    if (positive < 3)
      throw TooFewCorrespondences(
          "CorrespondenceSet: fewer than 3 positive-weight correspondences");
  }
}

FitResult fit_rigid_transform(const CorrespondenceSet& correspondences) {
  correspondences.validate();
  const std::size_t k = correspondences.model_points.size();
  const bool weighted = !correspondences.weights.empty();

  double mass = 0.0;
  Vec3 centroid_model = Vec3::Zero();
  Vec3 centroid_obs = Vec3::Zero();
  for (std::size_t j = 0; j < k; ++j) {
    const double w = weighted ? correspondences.weights[j] : 1.0;
    if (w == 0.0) continue;
    mass += w;
    centroid_model += w * correspondences.model_points[j];
    centroid_obs += w * correspondences.observed_points[j];
  }
  centroid_model /= mass;
  centroid_obs /= mass;

  // Weighted cross-covariance H = sum w (m - cm)(o - co)^T.
  Mat3 h = Mat3::Zero();
  for (std::size_t j = 0; j < k; ++j) {
    const double w = weighted ? correspondences.weights[j] : 1.0;
    if (w == 0.0) continue;
    h += w * (correspondences.model_points[j] - centroid_model) *
         (correspondences.observed_points[j] - centroid_obs).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (sv(1) < 1e-9 * sv(0))
    throw DegenerateGeometry(
        "fit_rigid_transform: collinear or degenerate correspondence "
        "geometry");

  // R maximizes trace(R H); the sign fix excludes reflections.
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();
  const Vec3 t = centroid_obs - r * centroid_model;

  FitResult out{RigidTransform(r, t), 0.0};
  double sq = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double w = weighted ? correspondences.weights[j] : 1.0;
    if (w == 0.0) continue;
    sq += w * (out.transform.apply(correspondences.model_points[j]) -
               correspondences.observed_points[j])
                  .squaredNorm();
  }
  out.rms_residual = std::sqrt(sq / mass);
  return out;
}

RigidTransform estimate_pose(const KeypointSet& predicted_camera,
                             const KeypointSet& model_object,
                             std::span<const double> weights) {
  if (predicted_camera.frame != Frame::camera)
    throw InvalidInput("estimate_pose: predicted keypoints must be camera-frame");
  if (model_object.frame != Frame::object)
    throw InvalidInput("estimate_pose: model keypoints must be object-frame");
  if (predicted_camera.keypoints.size() != model_object.keypoints.size())
    throw ShapeError("estimate_pose: keypoint count mismatch");

  CorrespondenceSet corr;
  corr.model_points = model_object.keypoints;
  corr.observed_points = predicted_camera.keypoints;
  corr.weights.assign(weights.begin(), weights.end());
  return fit_rigid_transform(corr).transform;
}

}  // namespace kpvote
