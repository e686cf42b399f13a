#include "kpvote/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kpvote/rng.hpp"

namespace kpvote {

namespace {

using json = nlohmann::ordered_json;

constexpr double kTau = 2.0 * std::numbers::pi;

double uniform01(std::mt19937_64& gen) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(gen);
}

Vec3 uniform_direction(std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  while (true) {
    const Vec3 v(normal(gen), normal(gen), normal(gen));
    const double n = v.norm();
    if (n > 1e-9) return v / n;
  }
}

/// Uniform rotation via the subgroup-algorithm quaternion construction.
Mat3 uniform_rotation(std::mt19937_64& gen) {
  const double u1 = uniform01(gen);
  const double u2 = uniform01(gen);
  const double u3 = uniform01(gen);
  const Eigen::Vector4d q(std::sqrt(u1) * std::cos(kTau * u3),      // w
                          std::sqrt(1.0 - u1) * std::sin(kTau * u2),
                          std::sqrt(1.0 - u1) * std::cos(kTau * u2),
                          std::sqrt(u1) * std::sin(kTau * u3));
  return rotation_from_quat(q);
}

// Surface samplers, object frame, centered at the origin. Desk-scale
// defaults: sphere r = 0.1 m, box half extents (0.06, 0.08, 0.10) m,
// cylinder r = 0.06 m / h = 0.2 m.
Vec3 sample_sphere(std::mt19937_64& gen) { return 0.1 * uniform_direction(gen); }

Vec3 sample_box(std::mt19937_64& gen) {
  const Vec3 half(0.06, 0.08, 0.10);
  const double ax = half.y() * half.z();
  const double ay = half.x() * half.z();
  const double az = half.x() * half.y();
  const double pick = uniform01(gen) * (ax + ay + az);
  const int axis = pick < ax ? 0 : (pick < ax + ay ? 1 : 2);
  const double sign = uniform01(gen) < 0.5 ? -1.0 : 1.0;
  Vec3 p;
  for (int k = 0; k < 3; ++k)
    p(k) = (2.0 * uniform01(gen) - 1.0) * half(k);
  p(axis) = sign * half(axis);
  return p;
}

Vec3 sample_cylinder(std::mt19937_64& gen) {
  const double r = 0.06, h = 0.2;
  const double side_area = kTau * r * h;
  const double cap_area = std::numbers::pi * r * r;
  const double pick = uniform01(gen) * (side_area + 2.0 * cap_area);
  if (pick < side_area) {
    const double phi = kTau * uniform01(gen);
    return Vec3(r * std::cos(phi), r * std::sin(phi),
                (uniform01(gen) - 0.5) * h);
  }
  const double phi = kTau * uniform01(gen);
  const double rad = r * std::sqrt(uniform01(gen));
  const double z = pick < side_area + cap_area ? h / 2.0 : -h / 2.0;
  return Vec3(rad * std::cos(phi), rad * std::sin(phi), z);
}

PointCloud sample_surface(const SceneConfig& cfg, std::mt19937_64& gen) {
  if (cfg.shape == ShapeKind::loaded) {
    PointCloud file_points = load_point_cloud(cfg.model_file);
    if (cfg.point_count <= file_points.size()) {
      std::shuffle(file_points.begin(), file_points.end(), gen);
      file_points.resize(cfg.point_count);
      return file_points;
    }
    PointCloud out(cfg.point_count);
    std::uniform_int_distribution<std::size_t> pick(0, file_points.size() - 1);
    for (Vec3& p : out) p = file_points[pick(gen)];
    return out;
  }
  PointCloud out(cfg.point_count);
  for (Vec3& p : out) {
    switch (cfg.shape) {
      case ShapeKind::sphere: p = sample_sphere(gen); break;
      case ShapeKind::box: p = sample_box(gen); break;
      default: p = sample_cylinder(gen); break;
    }
  }
  return out;
}

/// Rotate a unit vector by `angle` about a random axis perpendicular to it.
Vec3 perturb_direction(const Vec3& v, double angle, std::mt19937_64& gen) {
  // Deterministic orthonormal frame around v.
  Vec3 helper = std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = v.cross(helper).normalized();
  const Vec3 e2 = v.cross(e1);
  const double phi = kTau * uniform01(gen);
  const Vec3 axis = std::cos(phi) * e1 + std::sin(phi) * e2;
  // Rodrigues with axis.dot(v) = 0.
  return std::cos(angle) * v + std::sin(angle) * axis.cross(v);
}

}  // namespace

void SceneConfig::validate() const {
  if (point_count < 1) throw InvalidInput("SceneConfig: point_count must be >= 1");
  if (keypoint_count < 1)
    throw InvalidInput("SceneConfig: keypoint_count must be >= 1");
  if (keypoint_count > point_count)
    throw InvalidInput("SceneConfig: keypoint_count exceeds point_count");
  if (!(angular_noise_deg >= 0.0) || !std::isfinite(angular_noise_deg))
    throw InvalidInput("SceneConfig: angular_noise_deg must be >= 0");
  if (!(outlier_fraction >= 0.0) || outlier_fraction >= 1.0)
    throw InvalidInput("SceneConfig: outlier_fraction must be in [0, 1)");
  if (!(occlusion_fraction >= 0.0) || occlusion_fraction >= 1.0)
    throw InvalidInput("SceneConfig: occlusion_fraction must be in [0, 1)");
  if (shape == ShapeKind::loaded && model_file.empty())
    throw InvalidInput("SceneConfig: loaded shape requires model_file");
}

KeypointSet farthest_point_sample(const PointCloud& cloud, std::size_t k,
                                  std::uint64_t seed) {
  validate_cloud(cloud, "farthest_point_sample");
  if (k > cloud.size())
    throw InvalidInput("farthest_point_sample: k exceeds cloud size");

  auto gen = make_stream(seed, 0, "fps-start");
  const std::size_t start =
      std::uniform_int_distribution<std::size_t>(0, cloud.size() - 1)(gen);

  KeypointSet set;
  set.frame = Frame::object;
  for (std::size_t idx : fps_indices(cloud, k, start))
    set.keypoints.push_back(cloud[idx]);
  return set;
}

SyntheticScene generate_scene(const SceneConfig& config) {
  config.validate();
  const std::uint64_t seed = config.seed;

  // 1. Object surface in the object frame.
  auto surface_gen = make_stream(seed, 0, "surface");
  PointCloud object_points = sample_surface(config, surface_gen);
  const bool symmetric =
      config.shape == ShapeKind::sphere || config.shape == ShapeKind::cylinder;

  SyntheticScene scene;
  scene.model = ObjectModel::create(object_points, symmetric);

  // 2. Keypoints by farthest-point sampling on the model surface.
  scene.model_keypoints = farthest_point_sample(
      object_points, config.keypoint_count, stream_seed(seed, 0, "keypoints"));

  // 3. Pose: uniform rotation, translation uniform in a 0.5 m box at 1 m
  // nominal depth.
  auto pose_gen = make_stream(seed, 0, "pose");
  const Mat3 rotation = uniform_rotation(pose_gen);
  const Vec3 translation(0.5 * (uniform01(pose_gen) - 0.5),
                         0.5 * (uniform01(pose_gen) - 0.5),
                         1.0 + 0.5 * (uniform01(pose_gen) - 0.5));
  scene.truth_pose = RigidTransform(rotation, translation);

  scene.truth_keypoints_camera.frame = Frame::camera;
  for (const Vec3& k : scene.model_keypoints.keypoints)
    scene.truth_keypoints_camera.keypoints.push_back(scene.truth_pose.apply(k));

  // 4. Occlusion: drop a contiguous spherical cap, not random points, so
  // the remaining vote geometry is anisotropic the way real occlusion
  // makes it.
  const std::size_t m_total = object_points.size();
  const std::size_t drop =
      static_cast<std::size_t>(std::llround(config.occlusion_fraction *
                                            static_cast<double>(m_total)));
  std::vector<std::size_t> kept(m_total);
  std::iota(kept.begin(), kept.end(), std::size_t{0});
  if (drop > 0) {
    if (drop >= m_total)
      throw DegenerateScene("generate_scene: occlusion removed every point");
    auto occl_gen = make_stream(seed, 0, "occlusion");
    const Vec3 cap_dir = uniform_direction(occl_gen);
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : object_points) centroid += p;
    centroid /= static_cast<double>(m_total);

    std::vector<std::size_t> by_depth = kept;
    std::stable_sort(by_depth.begin(), by_depth.end(),
                     [&](std::size_t a, std::size_t b) {
                       const double da = (object_points[a] - centroid).dot(cap_dir);
                       const double db = (object_points[b] - centroid).dot(cap_dir);
                       if (da != db) return da > db;
                       return a < b;
                     });
    by_depth.resize(drop);
    std::vector<char> dropped(m_total, 0);
    for (std::size_t i : by_depth) dropped[i] = 1;
    kept.clear();
    for (std::size_t i = 0; i < m_total; ++i)
      if (!dropped[i]) kept.push_back(i);
  }
  const std::size_t m = kept.size();

  // 5. Camera-frame points.
  scene.problem.points.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    scene.problem.points[i] = scene.truth_pose.apply(object_points[kept[i]]);
  scene.problem.keypoint_count = config.keypoint_count;

  // 6. Outlier selection among kept points.
  const std::size_t n_out = static_cast<std::size_t>(
      std::llround(config.outlier_fraction * static_cast<double>(m)));
  scene.outlier_mask.assign(m, 0);
  {
    auto out_gen = make_stream(seed, 0, "outliers");
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n_out; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(idx[i], idx[pick(out_gen)]);
      scene.outlier_mask[idx[i]] = 1;
    }
  }

  // 7. Vector fields and offsets. Inliers: true direction rotated about a
  // random perpendicular axis by |N(0, sigma)| clamped at 3 sigma (the
  // documented deviation bound). Outliers: uniformly random direction.
  // Offsets get the matching treatment: corrupted direction times the true
  // distance.
  Vec3 centroid_cam = Vec3::Zero();
  for (const Vec3& p : scene.problem.points) centroid_cam += p;
  centroid_cam /= static_cast<double>(m);

  const double sigma_rad = config.angular_noise_deg * std::numbers::pi / 180.0;
  auto noise_gen = make_stream(seed, 0, "noise");
  auto outdir_gen = make_stream(seed, 0, "outlier-dirs");
  std::normal_distribution<double> angle_noise(0.0, sigma_rad);

  const std::size_t k_count = config.keypoint_count;
  scene.problem.vectors.resize(k_count * m);
  scene.offsets.resize(k_count * m);
  for (std::size_t j = 0; j < k_count; ++j) {
    const Vec3& kp = scene.truth_keypoints_camera.keypoints[j];
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3 diff = kp - scene.problem.points[i];
      const double dist = diff.norm();
      // A surface point can coincide with its keypoint (keypoints are
      // sampled from the surface); any direction is consistent there.
      Vec3 true_dir;
      if (dist > 1e-12) {
        true_dir = diff / dist;
      } else {
        const Vec3 fallback = kp - centroid_cam;
        true_dir = fallback.norm() > 1e-9 ? fallback.normalized() : Vec3::UnitZ();
      }

      Vec3 dir;
      if (scene.outlier_mask[i]) {
        dir = uniform_direction(outdir_gen);
      } else if (sigma_rad > 0.0) {
        const double angle =
            std::min(std::abs(angle_noise(noise_gen)), 3.0 * sigma_rad);
        dir = perturb_direction(true_dir, angle, noise_gen);
      } else {
        dir = true_dir;
      }
      scene.problem.vectors[j * m + i] = UnitVector3(dir);
      scene.offsets[j * m + i] = dist * dir;
    }
  }

  // 8. Weights.
  scene.problem.weights.resize(m);
  auto weight_gen = make_stream(seed, 0, "weights");
  for (std::size_t i = 0; i < m; ++i) {
    switch (config.weight_model) {
      case WeightModel::uniform:
        scene.problem.weights[i] = 1.0;
        break;
      case WeightModel::oracle:
        // 0.01 rather than 0 for outliers: exercises the weighted path,
        // not the deletion path.
        scene.problem.weights[i] = scene.outlier_mask[i] ? 0.01 : 1.0;
        break;
      case WeightModel::random:
        scene.problem.weights[i] =
            std::uniform_real_distribution<double>(0.1, 1.0)(weight_gen);
        break;
    }
  }

  scene.problem.validate();
  return scene;
}

PointCloud load_point_cloud(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_point_cloud: cannot open " + path);

  PointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    Vec3 p;
    if (!(fields >> p.x() >> p.y() >> p.z()) || !is_finite(p))
      throw InvalidInput("load_point_cloud: bad line " + std::to_string(line_no) +
                         " in " + path);
    cloud.push_back(p);
  }
  if (cloud.empty())
    throw InvalidInput("load_point_cloud: no points in " + path);
  return cloud;
}

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json cloud_json(std::span<const Vec3> pts) {
  json arr = json::array();
  for (const Vec3& p : pts) arr.push_back(vec3_json(p));
  return arr;
}

}  // namespace

void dump_scene(const SyntheticScene& scene, const SceneConfig& config,
                std::ostream& out) {
  json doc;
  doc["schema"] = "kpvote.scene.v1";
  doc["config"] = {
      {"seed", config.seed},
      {"point_count", config.point_count},
      {"keypoint_count", config.keypoint_count},
      {"shape", config.shape == ShapeKind::sphere     ? "sphere"
                : config.shape == ShapeKind::box      ? "box"
                : config.shape == ShapeKind::cylinder ? "cylinder"
                                                      : "loaded"},
      {"model_file", config.model_file},
      {"angular_noise_deg", config.angular_noise_deg},
      {"outlier_fraction", config.outlier_fraction},
      {"occlusion_fraction", config.occlusion_fraction},
      {"weight_model", config.weight_model == WeightModel::uniform  ? "uniform"
                       : config.weight_model == WeightModel::oracle ? "oracle"
                                                                    : "random"},
  };
  doc["model"] = {{"diameter_m", scene.model.diameter},
                  {"symmetric", scene.model.symmetric},
                  {"points", cloud_json(scene.model.points)}};
  doc["model_keypoints"] = cloud_json(scene.model_keypoints.keypoints);
  const Eigen::Vector4d q = quat_from_rotation(scene.truth_pose.rotation);
  doc["truth_pose"] = {
      {"rotation_quat_wxyz", json::array({q(0), q(1), q(2), q(3)})},
      {"translation_m", vec3_json(scene.truth_pose.translation)}};
  doc["truth_keypoints_camera"] = cloud_json(scene.truth_keypoints_camera.keypoints);

  const std::size_t m = scene.problem.point_count();
  json fields = json::array();
  json offs = json::array();
  for (std::size_t j = 0; j < scene.problem.keypoint_count; ++j) {
    json row = json::array();
    json orow = json::array();
    for (std::size_t i = 0; i < m; ++i) {
      row.push_back(vec3_json(scene.problem.vectors[j * m + i].vec()));
      orow.push_back(vec3_json(scene.offsets[j * m + i]));
    }
    fields.push_back(std::move(row));
    offs.push_back(std::move(orow));
  }
  doc["problem"] = {{"points_camera", cloud_json(scene.problem.points)},
                    {"weights", scene.problem.weights},
                    {"vector_fields", std::move(fields)}};
  doc["offsets"] = std::move(offs);
  json mask = json::array();
  for (char c : scene.outlier_mask) mask.push_back(static_cast<int>(c));
  doc["outlier_mask"] = std::move(mask);

  out << doc.dump(2) << '\n';
}

}  // namespace kpvote
