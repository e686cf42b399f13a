#include "kpvote/voting.hpp"

#include <algorithm>
#include <cmath>

namespace kpvote {

namespace {

// Kahan compensated accumulator. At M = 12800 points naive summation loses
// several digits; compensation keeps the normal system accurate at any M.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

void VectorVoteProblem::validate() const {
  const std::size_t m = points.size();
  if (m == 0) throw DegenerateProblem("VectorVoteProblem: no points (M = 0)");
  if (keypoint_count == 0)
    throw InvalidInput("VectorVoteProblem: keypoint_count must be >= 1");
  if (vectors.size() != keypoint_count * m)
    throw ShapeError("VectorVoteProblem: vector_fields must be K x M");
  if (weights.size() != m)
    throw ShapeError("VectorVoteProblem: weights length != point count");
  validate_cloud(points, "VectorVoteProblem");
  bool any_positive = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidInput("VectorVoteProblem: weights must be finite and >= 0");
    any_positive |= w > 0.0;
  }
  if (!any_positive)
    throw DegenerateProblem("VectorVoteProblem: all weights are zero");
}

NormalSystem accumulate_normal_system(std::span<const Vec3> points,
                                      std::span<const UnitVector3> vectors,
                                      std::span<const double> weights) {
  const std::size_t m = points.size();
  if (m == 0) throw DegenerateProblem("accumulate_normal_system: M = 0");
  if (vectors.size() != m || weights.size() != m)
    throw ShapeError("accumulate_normal_system: length mismatch");

  // Six unique entries of the symmetric A, three of b, the constant term
  // and the weight mass.
  Kahan a00, a01, a02, a11, a12, a22;
  Kahan b0, b1, b2;
  Kahan constant, mass;

  bool any_positive = false;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = weights[i];
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidInput("accumulate_normal_system: bad weight");
    if (w == 0.0) continue;  // exactly transparent
    any_positive = true;

    const Vec3& p = points[i];
    if (!is_finite(p))
      throw InvalidInput("accumulate_normal_system: non-finite point");
    const Vec3& v = vectors[i].vec();

    // w * (I - v v^T)
    const double p00 = w * (1.0 - v.x() * v.x());
    const double p11 = w * (1.0 - v.y() * v.y());
    const double p22 = w * (1.0 - v.z() * v.z());
    const double p01 = -w * v.x() * v.y();
    const double p02 = -w * v.x() * v.z();
    const double p12 = -w * v.y() * v.z();

    a00.add(p00);
    a01.add(p01);
    a02.add(p02);
    a11.add(p11);
    a12.add(p12);
    a22.add(p22);

    const double r0 = p00 * p.x() + p01 * p.y() + p02 * p.z();
    const double r1 = p01 * p.x() + p11 * p.y() + p12 * p.z();
    const double r2 = p02 * p.x() + p12 * p.y() + p22 * p.z();
    b0.add(r0);
    b1.add(r1);
    b2.add(r2);

    constant.add(r0 * p.x() + r1 * p.y() + r2 * p.z());
    mass.add(w);
  }
  if (!any_positive)
    throw DegenerateProblem("accumulate_normal_system: all weights are zero");

  NormalSystem out;
  out.a << a00.sum, a01.sum, a02.sum, a01.sum, a11.sum, a12.sum, a02.sum,
      a12.sum, a22.sum;
  out.b = Vec3(b0.sum, b1.sum, b2.sum);
  out.constant = constant.sum;
  out.weight_mass = mass.sum;
  return out;
}

KeypointEstimate solve_keypoint(const NormalSystem& system,
                                double rank_tolerance) {
  if (!is_finite(system.a) || !is_finite(system.b))
    throw InvalidInput("solve_keypoint: non-finite normal system");

  const Pseudoinverse3 pinv = pseudoinverse_3x3(system.a, rank_tolerance);

  KeypointEstimate est;
  est.position = pinv.pinv * system.b;
  est.normal_matrix_rank = pinv.rank;
  est.weight_mass = system.weight_mass;
  const double d = system.constant - 2.0 * est.position.dot(system.b) +
                   est.position.dot(system.a * est.position);
  est.residual = std::max(0.0, d);
  return est;
}

std::vector<KeypointEstimate> vote_all_keypoints(
    const VectorVoteProblem& problem, double rank_tolerance) {
  problem.validate();

  std::vector<KeypointEstimate> estimates;
  estimates.reserve(problem.keypoint_count);
  for (std::size_t j = 0; j < problem.keypoint_count; ++j) {
    try {
      estimates.push_back(solve_keypoint(
          accumulate_normal_system(problem.points, problem.field(j),
                                   problem.weights),
          rank_tolerance));
    } catch (const DegenerateProblem& e) {
      throw DegenerateProblem(
          "keypoint " + std::to_string(j) + ": " + e.what(),
          static_cast<std::ptrdiff_t>(j));
    }
  }
  return estimates;
}

}  // namespace kpvote
