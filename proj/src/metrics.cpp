#include "kpvote/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kpvote {

namespace {

double max_pairwise(std::span<const Vec3> pts) {
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, (pts[i] - pts[j]).squaredNorm());
  return std::sqrt(best);
}

// Candidate extreme points: per-axis min/max plus an FPS subsample. The
// diameter endpoints lie on the convex hull, which FPS covers tightly.
double sampled_diameter(std::span<const Vec3> pts) {
  std::vector<Vec3> candidates;
  for (int axis = 0; axis < 3; ++axis) {
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i](axis) < pts[lo](axis)) lo = i;
      if (pts[i](axis) > pts[hi](axis)) hi = i;
    }
    candidates.push_back(pts[lo]);
    candidates.push_back(pts[hi]);
  }
  for (std::size_t idx : fps_indices(pts, 512, 0)) candidates.push_back(pts[idx]);
  return max_pairwise(candidates);
}

void validate_model(const ObjectModel& model, const char* op) {
  if (model.points.empty())
    throw InvalidModel(std::string(op) + ": empty object model");
  validate_cloud(model.points, op);
}

}  // namespace

double cloud_diameter(std::span<const Vec3> points) {
  validate_cloud(points, "cloud_diameter");
  if (points.size() <= 5000) return max_pairwise(points);
  return sampled_diameter(points);
}

ObjectModel ObjectModel::create(PointCloud points, bool symmetric) {
  const double d = cloud_diameter(points);
  ObjectModel m;
  m.points = std::move(points);
  m.diameter = d;
  m.symmetric = symmetric;
  return m;
}

ObjectModel ObjectModel::with_diameter(PointCloud points, double diameter,
                                       bool symmetric) {
  validate_cloud(points, "ObjectModel");
  if (!std::isfinite(diameter) || diameter < 0.0)
    throw InvalidModel("ObjectModel: bad diameter");
  if (points.size() <= 5000) {
    if (std::abs(diameter - max_pairwise(points)) > 1e-9)
      throw InvalidModel("ObjectModel: diameter != max pairwise distance");
  } else {
    if (diameter + 1e-12 < sampled_diameter(points))
      throw InvalidModel("ObjectModel: diameter below sampled lower bound");
  }
  ObjectModel m;
  m.points = std::move(points);
  m.diameter = diameter;
  m.symmetric = symmetric;
  return m;
}

double add_metric(const ObjectModel& model, const RigidTransform& estimated,
                  const RigidTransform& truth) {
  validate_model(model, "add_metric");
  double sum = 0.0;
  for (const Vec3& p : model.points)
    sum += (estimated.apply(p) - truth.apply(p)).norm();
  return sum / static_cast<double>(model.points.size());
}

double add_s_metric_brute(const ObjectModel& model,
                          const RigidTransform& estimated,
                          const RigidTransform& truth) {
  validate_model(model, "add_s_metric");
  const std::size_t n = model.points.size();
  std::vector<Vec3> est(n), tru(n);
  for (std::size_t i = 0; i < n; ++i) {
    est[i] = estimated.apply(model.points[i]);
    tru[i] = truth.apply(model.points[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      best = std::min(best, (est[i] - tru[j]).squaredNorm());
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(n);
}

namespace {

// Uniform grid over the target set with exact expanding-ring nearest
// neighbor: after finishing Chebyshev ring r, any point in ring r+1 is at
// least r * cell away, so the search stops as soon as best <= r * cell.
class NearestGrid {
 public:
  explicit NearestGrid(const std::vector<Vec3>& targets) : targets_(targets) {
    lo_ = targets.front();
    Vec3 hi = lo_;
    for (const Vec3& p : targets) {
      lo_ = lo_.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const double extent = std::max((hi - lo_).maxCoeff(), 1e-12);
    const double per_axis = std::cbrt(static_cast<double>(targets.size()));
    cell_ = std::max(extent / std::min(per_axis, 64.0), 1e-12);
    nx_ = dim(hi.x() - lo_.x());
    ny_ = dim(hi.y() - lo_.y());
    nz_ = dim(hi.z() - lo_.z());

    start_.assign(static_cast<std::size_t>(nx_) * ny_ * nz_ + 1, 0);
    order_.resize(targets.size());
    std::vector<int> idx(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
      idx[i] = cell_of(targets[i]);
      ++start_[idx[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    std::vector<int> cursor(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < targets.size(); ++i)
      order_[cursor[idx[i]]++] = static_cast<int>(i);
  }

  double nearest_distance(const Vec3& q) const {
    const int qx = coord(q.x() - lo_.x());
    const int qy = coord(q.y() - lo_.y());
    const int qz = coord(q.z() - lo_.z());
    const int max_ring =
        std::max({std::max(qx, nx_ - 1 - qx), std::max(qy, ny_ - 1 - qy),
                  std::max(qz, nz_ - 1 - qz), 1});

    double best_sq = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= max_ring; ++r) {
      scan_ring(q, qx, qy, qz, r, best_sq);
      if (best_sq <= square(static_cast<double>(r) * cell_)) break;
    }
    return std::sqrt(best_sq);
  }

 private:
  static double square(double x) { return x * x; }
  int dim(double extent) const {
    return std::max(static_cast<int>(extent / cell_) + 1, 1);
  }
  int coord(double offset) const {
    return static_cast<int>(std::floor(offset / cell_));
  }
  int cell_of(const Vec3& p) const {
    const int x = std::clamp(coord(p.x() - lo_.x()), 0, nx_ - 1);
    const int y = std::clamp(coord(p.y() - lo_.y()), 0, ny_ - 1);
    const int z = std::clamp(coord(p.z() - lo_.z()), 0, nz_ - 1);
    return (x * ny_ + y) * nz_ + z;
  }

  void scan_cell(const Vec3& q, int x, int y, int z, double& best_sq) const {
    if (x < 0 || y < 0 || z < 0 || x >= nx_ || y >= ny_ || z >= nz_) return;
    const int c = (x * ny_ + y) * nz_ + z;
    for (int k = start_[c]; k < start_[c + 1]; ++k)
      best_sq = std::min(best_sq, (q - targets_[order_[k]]).squaredNorm());
  }

  void scan_ring(const Vec3& q, int qx, int qy, int qz, int r,
                 double& best_sq) const {
    if (r == 0) {
      scan_cell(q, qx, qy, qz, best_sq);
      return;
    }
    for (int dx = -r; dx <= r; ++dx) {
      for (int dy = -r; dy <= r; ++dy) {
        for (int dz = -r; dz <= r; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r)
            continue;
          scan_cell(q, qx + dx, qy + dy, qz + dz, best_sq);
        }
      }
    }
  }

  const std::vector<Vec3>& targets_;
  Vec3 lo_;
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1, nz_ = 1;
  std::vector<int> start_;
  std::vector<int> order_;
};

}  // namespace

double add_s_metric_grid(const ObjectModel& model,
                         const RigidTransform& estimated,
                         const RigidTransform& truth) {
  validate_model(model, "add_s_metric");
  const std::size_t n = model.points.size();
  std::vector<Vec3> est(n), tru(n);
  for (std::size_t i = 0; i < n; ++i) {
    est[i] = estimated.apply(model.points[i]);
    tru[i] = truth.apply(model.points[i]);
  }
  const NearestGrid grid(tru);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += grid.nearest_distance(est[i]);
  return sum / static_cast<double>(n);
}

double add_s_metric(const ObjectModel& model, const RigidTransform& estimated,
                    const RigidTransform& truth) {
  return model.points.size() <= 2048
             ? add_s_metric_brute(model, estimated, truth)
             : add_s_metric_grid(model, estimated, truth);
}

double auc(std::span<const double> errors, double max_threshold) {
  if (errors.empty()) throw InvalidInput("auc: empty error list");
  if (!(max_threshold > 0.0))
    throw InvalidInput("auc: max_threshold must be > 0");
  for (double e : errors)
    if (!(e >= 0.0) || !std::isfinite(e))
      throw InvalidInput("auc: errors must be finite and >= 0");

  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());

  // Walk the step function accuracy(tau) = #{e < tau} / n segment by
  // segment; below counts errors strictly less than the current tau.
  double integral = 0.0;
  double prev = 0.0;
  std::size_t below = 0;
  for (double e : sorted) {
    const double cut = std::min(e, max_threshold);
    if (cut > prev) {
      integral += (cut - prev) * static_cast<double>(below);
      prev = cut;
    }
    ++below;
  }
  if (prev < max_threshold)
    integral += (max_threshold - prev) * static_cast<double>(below);
  return integral / (max_threshold * static_cast<double>(sorted.size()));
}

double add_0_1d_accuracy(std::span<const double> errors, double diameter) {
  if (errors.empty()) throw InvalidInput("add_0_1d_accuracy: empty error list");
  if (!(diameter > 0.0))
    throw InvalidInput("add_0_1d_accuracy: diameter must be > 0");
  const double threshold = diameter / 10.0;
  std::size_t hits = 0;
  for (double e : errors)
    if (e < threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

PoseError evaluate_pose_error(const ObjectModel& model,
                              const RigidTransform& estimated,
                              const RigidTransform& truth,
                              const KeypointSet& estimated_keypoints,
                              const KeypointSet& truth_keypoints) {
  PoseError e;
  e.add = add_metric(model, estimated, truth);
  e.add_s = std::min(add_s_metric(model, estimated, truth), e.add);
  e.keypoint_rmse = keypoint_rmse(estimated_keypoints, truth_keypoints);
  return e;
}

double keypoint_rmse(const KeypointSet& estimated, const KeypointSet& truth) {
  if (estimated.keypoints.size() != truth.keypoints.size())
    throw ShapeError("keypoint_rmse: keypoint count mismatch");
  if (estimated.keypoints.empty())
    throw ShapeError("keypoint_rmse: empty keypoint sets");
  double sq = 0.0;
  for (std::size_t j = 0; j < truth.keypoints.size(); ++j)
    sq += (estimated.keypoints[j] - truth.keypoints[j]).squaredNorm();
  return std::sqrt(sq / static_cast<double>(truth.keypoints.size()));
}

}  // namespace kpvote
