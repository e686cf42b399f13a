#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "kpvote/errors.hpp"

namespace kpvote {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Ordered list of 3D points, meters.
using PointCloud = std::vector<Vec3>;

bool is_finite(const Vec3& v);
bool is_finite(const Mat3& m);

/// Throws InvalidInput if any coordinate is non-finite or the cloud is empty.
void validate_cloud(std::span<const Vec3> points, const char* what);

/// Direction vector normalized at construction. Zero-length input is an
/// error; after construction |norm - 1| <= 1e-9 always holds.
class UnitVector3 {
 public:
  UnitVector3() : v_(Vec3::UnitX()) {}
  explicit UnitVector3(const Vec3& v);
  UnitVector3(double x, double y, double z) : UnitVector3(Vec3(x, y, z)) {}

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

 private:
  Vec3 v_;
};

/// Proper rigid motion [R, t]: rotation orthonormal with det +1 (both
/// enforced at construction to 1e-9), translation in meters.
struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  RigidTransform() : rotation(Mat3::Identity()), translation(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return RigidTransform(); }

  /// R p + t.
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const;
};

/// R p + t.
Vec3 apply_transform(const RigidTransform& t, const Vec3& p);

/// Composition: result applies `second` first, then `first`. The rotation
/// product is re-orthonormalized when drift exceeds 1e-12.
RigidTransform compose(const RigidTransform& first,
                       const RigidTransform& second);

/// Full 3x3 singular value decomposition m = u * diag(sigma) * v^T with
/// sigma sorted descending, u and v orthonormal. Computed by one-sided
/// Jacobi rotations, which keeps small singular values accurate; the voting
/// normal system is always 3x3 so no general-size path is needed.
struct Svd3 {
  Mat3 u;
  Vec3 sigma;
  Mat3 v;
};
Svd3 svd3(const Mat3& m);

struct Pseudoinverse3 {
  Mat3 pinv;
  int rank;  ///< retained singular values, 0..3
};

/// Moore-Penrose pseudoinverse via the 3x3 SVD. Singular values below
/// rank_tolerance * sigma_max are treated as zero; rank counts the rest.
Pseudoinverse3 pseudoinverse_3x3(const Mat3& m, double rank_tolerance = 1e-9);

// Quaternion codec (w, x, y, z) for the file-format boundary; the library
// itself stores rotations as matrices throughout.
Eigen::Vector4d quat_from_rotation(const Mat3& r);
Mat3 rotation_from_quat(const Eigen::Vector4d& q_wxyz);

/// Greedy farthest-point sampling: selects k indices maximizing the minimum
/// pairwise distance, starting from start_index. Deterministic.
std::vector<std::size_t> fps_indices(std::span<const Vec3> points,
                                     std::size_t k, std::size_t start_index);

}  // namespace kpvote
