#include "kpvote/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace kpvote {

bool is_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

bool is_finite(const Mat3& m) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!std::isfinite(m(r, c))) return false;
  return true;
}

void validate_cloud(std::span<const Vec3> points, const char* what) {
  if (points.empty())
    throw InvalidInput(std::string(what) + ": empty point cloud");
  for (const Vec3& p : points)
    if (!is_finite(p))
      throw InvalidInput(std::string(what) + ": non-finite coordinate");
}

UnitVector3::UnitVector3(const Vec3& v) {
  if (!is_finite(v)) throw InvalidInput("UnitVector3: non-finite input");
  const double n = v.norm();
  if (n < 1e-150) throw InvalidInput("UnitVector3: zero-length input");
  v_ = v / n;
}

namespace {

double orthonormality_drift(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

// Nearest rotation in the Frobenius sense: R = u * diag(1,1,det(u v^T)) * v^T.
Mat3 orthonormalize(const Mat3& r) {
  const Svd3 s = svd3(r);
  const double d = (s.u * s.v.transpose()).determinant();
  Mat3 fix = Mat3::Identity();
  fix(2, 2) = d < 0.0 ? -1.0 : 1.0;
  return s.u * fix * s.v.transpose();
}

}  // namespace

RigidTransform::RigidTransform(const Mat3& rotation_in, const Vec3& translation_in)
    : rotation(rotation_in), translation(translation_in) {
  if (!is_finite(rotation) || !is_finite(translation))
    throw InvalidInput("RigidTransform: non-finite entries");
  if (orthonormality_drift(rotation) > 1e-9)
    throw InvalidInput("RigidTransform: rotation not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw InvalidInput("RigidTransform: rotation is not proper (det != +1)");
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform t;
  t.rotation = rotation.transpose();
  t.translation = -(t.rotation * translation);
  return t;
}

Vec3 apply_transform(const RigidTransform& t, const Vec3& p) {
  return t.apply(p);
}

RigidTransform compose(const RigidTransform& first, const RigidTransform& second) {
  Mat3 r = first.rotation * second.rotation;
  if (orthonormality_drift(r) > 1e-12) r = orthonormalize(r);
  return RigidTransform(r, first.rotation * second.translation + first.translation);
}

Svd3 svd3(const Mat3& m) {
  if (!is_finite(m)) throw InvalidMatrix("svd3: non-finite entries");

  // One-sided Jacobi: rotate column pairs of b = m * v until mutually
  // orthogonal. Then column norms are the singular values and the
  // normalized columns form u.
  Mat3 b = m;
  Mat3 v = Mat3::Identity();
  constexpr int kMaxSweeps = 60;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double app = b.col(p).squaredNorm();
        const double aqq = b.col(q).squaredNorm();
        const double apq = b.col(p).dot(b.col(q));
        if (apq == 0.0 || apq * apq <= 1e-30 * app * aqq) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t =
            std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int r = 0; r < 3; ++r) {
          const double bp = b(r, p), bq = b(r, q);
          b(r, p) = c * bp - s * bq;
          b(r, q) = s * bp + c * bq;
          const double vp = v(r, p), vq = v(r, q);
          v(r, p) = c * vp - s * vq;
          v(r, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  Vec3 sigma(b.col(0).norm(), b.col(1).norm(), b.col(2).norm());

  // Sort singular values descending, permuting u and v columns alongside.
  std::array<int, 3> order = {0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int a, int c) { return sigma(a) > sigma(c); });
  Svd3 out;
  for (int i = 0; i < 3; ++i) {
    out.sigma(i) = sigma(order[i]);
    out.v.col(i) = v.col(order[i]);
    out.u.col(i) = b.col(order[i]);
  }

  // Normalize u columns; complete an orthonormal basis for null columns.
  int nonzero = 0;
  for (int i = 0; i < 3; ++i) {
    if (out.sigma(i) > 0.0) {
      out.u.col(i) /= out.sigma(i);
      ++nonzero;
    }
  }
  if (nonzero == 2) {
    out.u.col(2) = out.u.col(0).cross(out.u.col(1)).normalized();
  } else if (nonzero == 1) {
    Vec3 e = Vec3::UnitX();
    if (std::abs(out.u.col(0).x()) > std::abs(out.u.col(0).y())) e = Vec3::UnitY();
    out.u.col(1) = (e - out.u.col(0).dot(e) * out.u.col(0)).normalized();
    out.u.col(2) = out.u.col(0).cross(out.u.col(1)).normalized();
  } else if (nonzero == 0) {
    out.u = Mat3::Identity();
  }
  return out;
}

Pseudoinverse3 pseudoinverse_3x3(const Mat3& m, double rank_tolerance) {
  if (!is_finite(m)) throw InvalidMatrix("pseudoinverse_3x3: non-finite entries");
  if (!(rank_tolerance > 0.0))
    throw InvalidInput("pseudoinverse_3x3: rank_tolerance must be > 0");

  const Svd3 s = svd3(m);
  const double cutoff = rank_tolerance * s.sigma(0);

  Pseudoinverse3 out{Mat3::Zero(), 0};
  for (int i = 0; i < 3; ++i) {
    if (s.sigma(i) > 0.0 && s.sigma(i) >= cutoff) {
      out.pinv += s.v.col(i) * s.u.col(i).transpose() / s.sigma(i);
      ++out.rank;
    }
  }
  return out;
}

Eigen::Vector4d quat_from_rotation(const Mat3& r) {
  // Shepperd's method: pick the numerically largest component first.
  Eigen::Vector4d q;  // w x y z
  const double tr = r.trace();
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    q << 0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
        (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
    q << (r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
        (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
    q << (r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
        (r(1, 2) + r(2, 1)) / s;
  } else {
    double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
    q << (r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s,
        (r(1, 2) + r(2, 1)) / s, 0.25 * s;
  }
  if (q(0) < 0.0) q = -q;  // canonical hemisphere
  return q / q.norm();
}

Mat3 rotation_from_quat(const Eigen::Vector4d& q_wxyz) {
  Eigen::Vector4d q = q_wxyz;
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw InvalidInput("rotation_from_quat: bad quaternion");
  q /= n;
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

std::vector<std::size_t> fps_indices(std::span<const Vec3> points,
                                     std::size_t k, std::size_t start_index) {
  if (k > points.size())
    throw InvalidInput("fps_indices: k exceeds point count");
  if (start_index >= points.size())
    throw InvalidInput("fps_indices: start index out of range");

  std::vector<std::size_t> selected;
  selected.reserve(k);
  if (k == 0) return selected;

  // The start index only seeds the first pick (the point farthest from it),
  // so extremes win regardless of the seed; the min-distance field is then
  // rebuilt from the selected set alone.
  const std::size_t n = points.size();
  std::vector<char> taken(n, 0);

  std::size_t first = 0;
  double far_sq = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (points[i] - points[start_index]).squaredNorm();
    if (d > far_sq) {
      far_sq = d;
      first = i;
    }
  }
  taken[first] = 1;
  selected.push_back(first);

  std::vector<double> best_sq(n);
  for (std::size_t i = 0; i < n; ++i)
    best_sq[i] = (points[i] - points[first]).squaredNorm();

  while (selected.size() < k) {
    std::size_t next = n;
    far_sq = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (best_sq[i] > far_sq) {
        far_sq = best_sq[i];
        next = i;
      }
    }
    taken[next] = 1;
    selected.push_back(next);
    for (std::size_t i = 0; i < n; ++i)
      best_sq[i] =
          std::min(best_sq[i], (points[i] - points[next]).squaredNorm());
  }
  return selected;
}

}  // namespace kpvote
