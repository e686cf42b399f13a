// Acceptance suite: end-to-end checks of the voting library and benchmark
// harness, one pass/fail line per criterion. Requires the CLI binary path
// as argv[1] (used by the determinism criterion).

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kpvote/bench.hpp"
#include "kpvote/fusion.hpp"
#include "kpvote/losses.hpp"
#include "kpvote/metrics.hpp"
#include "kpvote/pose_fit.hpp"
#include "kpvote/rng.hpp"
#include "kpvote/synth.hpp"
#include "kpvote/vote_oracle.hpp"
#include "kpvote/voting.hpp"

using namespace kpvote;

namespace {

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

double runif(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

Vec3 random_point(std::mt19937_64& gen, double half) {
  return Vec3(runif(gen, -half, half), runif(gen, -half, half),
              runif(gen, -half, half));
}

Vec3 random_unit(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  while (true) {
    const Vec3 v(n(gen), n(gen), n(gen));
    if (v.norm() > 1e-9) return v.normalized();
  }
}

Mat3 random_rotation_matrix(std::mt19937_64& gen) {
  const Vec3 axis = random_unit(gen);
  const double angle = runif(gen, 0.0, 2.0 * std::numbers::pi);
  Mat3 k;
  k << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Mat3::Identity() + std::sin(angle) * k +
         (1.0 - std::cos(angle)) * k * k;
}

struct VoteInstance {
  std::vector<Vec3> points;
  std::vector<Vec3> dirs;
  std::vector<double> weights;
};

// Rays aimed at a hidden target with bounded angular noise and occasional
// outliers. Instances whose normal matrix is worse conditioned than ~200
// are regenerated: the coordinate-descent oracle converges too slowly on
// near-degenerate quadratics to honor the 1e-6 position agreement.
VoteInstance make_instance(std::uint64_t seed, int m) {
  auto gen = rng(seed);
  std::normal_distribution<double> angle(0.0, 5.0 * std::numbers::pi / 180.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0;; ++attempt) {
    VoteInstance inst;
    const Vec3 truth = random_point(gen, 0.2);
    for (int i = 0; i < m; ++i) {
      const Vec3 p = random_point(gen, 0.5);
      Vec3 d = truth - p;
      if (d.norm() < 1e-3) {
        --i;
        continue;
      }
      d.normalize();
      if (i % 10 == 9) {
        d = random_unit(gen);  // outlier ray
      } else {
        Vec3 perp(gauss(gen), gauss(gen), gauss(gen));
        perp -= perp.dot(d) * d;
        if (perp.norm() > 1e-12)
          d = (d + std::tan(std::abs(angle(gen))) * perp.normalized())
                  .normalized();
      }
      inst.points.push_back(p);
      inst.dirs.push_back(d);
      inst.weights.push_back(runif(gen, 0.1, 1.0));
    }
    std::vector<UnitVector3> units;
    for (const Vec3& d : inst.dirs) units.emplace_back(d);
    const NormalSystem sys =
        accumulate_normal_system(inst.points, units, inst.weights);
    const Svd3 s = svd3(sys.a);
    if ((s.sigma(2) > 0.0 && s.sigma(0) / s.sigma(2) < 200.0) || attempt > 50)
      return inst;
  }
}

// ---------------------------------------------------------------------------

bool criterion_1_oracle_equivalence(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  double worst_gap = 0.0, worst_pos = 0.0;
  for (int inst_id = 0; inst_id < 100; ++inst_id) {
    auto gen = rng(9000 + inst_id);
    const int m = 3 + static_cast<int>(runif(gen, 0.0, 197.99));
    const VoteInstance inst = make_instance(17000 + inst_id * 7, m);

    std::vector<UnitVector3> units;
    for (const Vec3& d : inst.dirs) units.emplace_back(d);
    const KeypointEstimate est = solve_keypoint(
        accumulate_normal_system(inst.points, units, inst.weights));
    const OracleResult oracle =
        brute_force_keypoint(inst.points, inst.dirs, inst.weights);

    const double closed =
        vote_objective(inst.points, inst.dirs, inst.weights, est.position);
    worst_gap = std::max(worst_gap, closed - oracle.objective);
    worst_pos = std::max(worst_pos, (est.position - oracle.position).norm());
  }
  const double secs = elapsed_s(start);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "worst objective gap %.3g (<= 1e-8), worst position delta "
                "%.3g m (<= 1e-6), %.1f s (< 30 s)",
                worst_gap, worst_pos, secs);
  detail = buf;
  return worst_gap <= 1e-8 && worst_pos <= 1e-6 && secs < 30.0;
}

bool criterion_2_exact_recovery(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  double worst_rmse = 0.0, worst_add = 0.0;
  for (int s = 0; s < 20; ++s) {
    SceneConfig cfg;
    cfg.seed = stream_seed(2025, s, "exact");
    cfg.point_count = 1000;
    cfg.keypoint_count = 8;
    const SyntheticScene scene = generate_scene(cfg);

    const auto estimates = vote_all_keypoints(scene.problem);
    KeypointSet predicted;
    predicted.frame = Frame::camera;
    for (const auto& e : estimates) predicted.keypoints.push_back(e.position);

    worst_rmse = std::max(
        worst_rmse, keypoint_rmse(predicted, scene.truth_keypoints_camera));
    const RigidTransform pose = estimate_pose(predicted, scene.model_keypoints);
    worst_add = std::max(worst_add, add_metric(scene.model, pose, scene.truth_pose));
  }
  const double secs = elapsed_s(start);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "worst kp rmse %.3g m, worst add %.3g m (< 1e-9), %.1f s (< 5 s)",
                worst_rmse, worst_add, secs);
  detail = buf;
  return worst_rmse < 1e-9 && worst_add < 1e-9 && secs < 5.0;
}

bool criterion_3_baseline_comparison(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.scene.point_count = 12800;
  cfg.scene.keypoint_count = 8;
  cfg.scene.angular_noise_deg = 5.0;
  cfg.scene.outlier_fraction = 0.1;
  cfg.scene.weight_model = WeightModel::oracle;
  cfg.trials = 20;
  cfg.timing_repetitions = 3;
  cfg.master_seed = 20250809;

  const auto reports = run_experiment(cfg);

  std::vector<double> wvwv_times, ms_times;
  double wvwv_rmse = 0.0, ms_rmse = 0.0;
  int wvwv_n = 0, ms_n = 0;
  for (const TrialReport& r : reports) {
    if (r.degenerate) continue;
    if (r.algorithm == Algorithm::wvwv) {
      wvwv_times.push_back(static_cast<double>(r.vote_time_ns));
      wvwv_rmse += r.kp_rmse_m;
      ++wvwv_n;
    } else {
      ms_times.push_back(static_cast<double>(r.vote_time_ns));
      ms_rmse += r.kp_rmse_m;
      ++ms_n;
    }
  }
  if (wvwv_n == 0 || ms_n == 0) {
    detail = "degenerate trials";
    return false;
  }
  wvwv_rmse /= wvwv_n;
  ms_rmse /= ms_n;
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2]
                        : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  const double time_ratio = median(wvwv_times) / median(ms_times);
  const double rmse_ratio = wvwv_rmse / ms_rmse;
  const double secs = elapsed_s(start);

  char buf[256];
  std::snprintf(
      buf, sizeof(buf),
      "(a) vote-time ratio %.4f (<= 0.5); (b) kp-rmse ratio %.2f (<= 1.05, "
      "wvwv %.3g m vs meanshift %.3g m); %.0f s (< 120 s)",
      time_ratio, rmse_ratio, wvwv_rmse, ms_rmse, secs);
  detail = buf;
  if (rmse_ratio > 1.05) {
    detail +=
        " -- expected red: under pure synthetic angular noise the "
        "perpendicular least-squares objective is biased toward the point "
        "cloud by ~1.5 sin^2(sigma) |k - centroid| per keypoint, while the "
        "kernel mode tracks the nearly symmetric candidate core; parity "
        "needs network-correlated errors, not synthetic ray noise";
  }
  return time_ratio <= 0.5 && rmse_ratio <= 1.05 && secs < 120.0;
}

bool criterion_4_pose_fit(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  auto gen = rng(31337);
  double worst_rot = 0.0, worst_trans = 0.0;
  bool det_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 3 + static_cast<std::size_t>(runif(gen, 0.0, 13.99));
    const RigidTransform pose(random_rotation_matrix(gen),
                              random_point(gen, 0.5));
    CorrespondenceSet corr;
    for (std::size_t j = 0; j < k; ++j) {
      const Vec3 m = random_point(gen, 0.25);
      corr.model_points.push_back(m);
      corr.observed_points.push_back(pose.apply(m));
    }
    FitResult fit;
    try {
      fit = fit_rigid_transform(corr);
    } catch (const DegenerateGeometry&) {
      --trial;  // fluke collinear draw, regenerate
      continue;
    }
    worst_rot = std::max(worst_rot, (fit.transform.rotation - pose.rotation)
                                        .cwiseAbs()
                                        .maxCoeff());
    worst_trans = std::max(
        worst_trans, (fit.transform.translation - pose.translation).norm());

    // Mirror the observations; the fit must still return a proper rotation.
    CorrespondenceSet mirrored = corr;
    for (Vec3& o : mirrored.observed_points) o.z() = -o.z();
    const FitResult flipped = fit_rigid_transform(mirrored);
    det_ok = det_ok &&
             std::abs(flipped.transform.rotation.determinant() - 1.0) < 1e-9;
  }
  const double secs = elapsed_s(start);
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "worst rotation entry error %.3g (<= 1e-9), worst translation "
                "error %.3g m (<= 1e-9), mirrored det(+1) %s, %.1f s (< 10 s)",
                worst_rot, worst_trans, det_ok ? "ok" : "VIOLATED", secs);
  detail = buf;
  return worst_rot <= 1e-9 && worst_trans <= 1e-9 && det_ok && secs < 10.0;
}

bool criterion_5_metric_identities(std::string& detail) {
  auto gen = rng(515151);

  // ADD-S <= ADD on 1000 random model/pose pairs.
  bool order_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    PointCloud pts;
    const int n = 20 + static_cast<int>(runif(gen, 0.0, 40.0));
    for (int i = 0; i < n; ++i) pts.push_back(random_point(gen, 0.1));
    const ObjectModel model = ObjectModel::create(pts, false);
    const RigidTransform est(random_rotation_matrix(gen), random_point(gen, 0.3));
    const RigidTransform truth(random_rotation_matrix(gen), random_point(gen, 0.3));
    order_ok = order_ok && add_s_metric(model, est, truth) <=
                               add_metric(model, est, truth) + 1e-12;
  }

  // Grid-accelerated ADD-S equals brute force at N = 500.
  double worst_grid = 0.0;
  {
    PointCloud pts;
    for (int i = 0; i < 500; ++i) pts.push_back(random_point(gen, 0.1));
    const ObjectModel model = ObjectModel::create(pts, false);
    for (int trial = 0; trial < 10; ++trial) {
      const RigidTransform est(random_rotation_matrix(gen), random_point(gen, 0.3));
      const RigidTransform truth(random_rotation_matrix(gen), random_point(gen, 0.3));
      worst_grid = std::max(worst_grid,
                            std::abs(add_s_metric_grid(model, est, truth) -
                                     add_s_metric_brute(model, est, truth)));
    }
  }

  // AUC closed form and the worked example.
  double worst_auc = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> errors;
    const int n = 1 + static_cast<int>(runif(gen, 0.0, 50.0));
    for (int i = 0; i < n; ++i) errors.push_back(runif(gen, 0.0, 0.2));
    const double ceiling = runif(gen, 0.01, 0.15);
    double closed = 0.0;
    for (double e : errors)
      closed += std::min(1.0, std::max(0.0, (ceiling - e) / ceiling));
    closed /= static_cast<double>(errors.size());
    worst_auc = std::max(worst_auc, std::abs(auc(errors, ceiling) - closed));
  }
  const std::vector<double> worked = {0.02, 0.06};
  const double worked_auc = auc(worked, 0.10);

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "adds<=add %s; grid-vs-brute delta %.3g (<= 1e-12); auc "
                "closed-form delta %.3g (<= 1e-12); worked auc %.12f",
                order_ok ? "ok" : "VIOLATED", worst_grid, worst_auc, worked_auc);
  detail = buf;
  return order_ok && worst_grid <= 1e-12 && worst_auc <= 1e-12 &&
         std::abs(worked_auc - 0.6) <= 1e-12;
}

bool criterion_6_loss_gradients(std::string& detail) {
  auto gen = rng(616161);
  const double h = 1e-6;
  double worst_rel = 0.0;

  // Focal loss.
  for (int i = 0; i < 1000; ++i) {
    const double p = runif(gen, 0.05, 0.95);
    const bool pos = i % 2 == 0;
    LossConfig cfg;
    cfg.focal_gamma = runif(gen, 0.0, 4.0);
    cfg.focal_alpha = runif(gen, 0.1, 1.0);
    const double analytic = focal_loss(p, pos, cfg).d_loss_d_prob;
    const double numeric =
        (focal_loss(p + h, pos, cfg).loss - focal_loss(p - h, pos, cfg).loss) /
        (2.0 * h);
    worst_rel = std::max(worst_rel, std::abs(analytic - numeric) /
                                        std::max(std::abs(numeric), 1e-8));
  }

  // Vector L1 (kink-guarded) against the direct component formula.
  int checked = 0;
  while (checked < 1000) {
    const Vec3 a = random_unit(gen);
    const Vec3 b = random_unit(gen);
    if ((a - b).cwiseAbs().minCoeff() < 1e-3) continue;
    ++checked;
    const L1Result r = kps_l1_loss(UnitVector3(a), UnitVector3(b));
    const UnitVector3 ub(b);
    for (int k = 0; k < 3; ++k) {
      Vec3 plus = a, minus = a;
      plus(k) += h;
      minus(k) -= h;
      const auto direct = [&](const Vec3& v) {
        return std::abs(v.x() - ub.x()) + std::abs(v.y() - ub.y()) +
               std::abs(v.z() - ub.z());
      };
      const double numeric = (direct(plus) - direct(minus)) / (2.0 * h);
      worst_rel = std::max(worst_rel, std::abs(r.gradient(k) - numeric) /
                                          std::max(std::abs(numeric), 1e-8));
    }
  }

  // Vecf confidence gradient.
  for (int i = 0; i < 1000; ++i) {
    VecfSample s;
    s.predicted_vector = UnitVector3(random_unit(gen));
    s.target_vector = UnitVector3(random_unit(gen));
    s.confidence = runif(gen, 0.05, 0.99);
    const std::vector<VecfSample> one = {s};
    const double analytic = vecf_loss(one).d_loss_d_confidence[0];
    VecfSample plus = s, minus = s;
    plus.confidence += h;
    minus.confidence -= h;
    const double numeric = (vecf_loss(std::vector<VecfSample>{plus}).loss -
                            vecf_loss(std::vector<VecfSample>{minus}).loss) /
                           (2.0 * h);
    worst_rel = std::max(worst_rel, std::abs(analytic - numeric) /
                                        std::max(std::abs(numeric), 1e-8));
  }

  // Stationarity at c* = w / l with the declared w = 0.015: build a unit
  // pair with L1 distance 0.03 by bisection, then check the gradient.
  double lo = 0.0, hi = 0.1;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((1.0 - std::cos(mid)) + std::sin(mid) < 0.03 ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  VecfSample s;
  s.predicted_vector = UnitVector3(std::cos(theta), std::sin(theta), 0.0);
  s.target_vector = UnitVector3(1, 0, 0);
  const double l = kps_l1_loss(s.predicted_vector, s.target_vector).loss;
  LossConfig cfg;  // w_balance = 0.015
  s.confidence = cfg.w_balance / l;
  const double stationary =
      std::abs(vecf_loss(std::vector<VecfSample>{s}, cfg)
                   .d_loss_d_confidence[0]);

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "worst gradient rel error %.3g (<= 1e-4); vecf gradient at "
                "c* %.3g (<= 1e-10)",
                worst_rel, stationary);
  detail = buf;
  return worst_rel <= 1e-4 && stationary <= 1e-10;
}

bool criterion_7_fusion_invariants(std::string& detail) {
  auto gen = rng(717171);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto tokens = [&](Eigen::Index l, Eigen::Index c) {
    Eigen::MatrixXd m(l, c);
    for (Eigen::Index r = 0; r < l; ++r)
      for (Eigen::Index k = 0; k < c; ++k) m(r, k) = n(gen);
    return m;
  };

  // Softmax row sums across 100 random configurations.
  double worst_sum = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 1 + static_cast<int>(runif(gen, 0.0, 15.0));
    const int cols = 1 + static_cast<int>(runif(gen, 0.0, 15.0));
    const Eigen::MatrixXd soft = softmax_rows(30.0 * tokens(rows, cols));
    for (int r = 0; r < rows; ++r)
      worst_sum = std::max(worst_sum, std::abs(soft.row(r).sum() - 1.0));
  }

  // Fused length law and the zero-update round trip.
  bool shape_ok = true, round_trip_ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index hw = 1 + static_cast<Eigen::Index>(runif(gen, 0.0, 11.0));
    const Eigen::Index geo_n = 1 + static_cast<Eigen::Index>(runif(gen, 0.0, 9.0));
    const Eigen::Index c = 4;
    const Eigen::MatrixXd rgb_tokens = tokens(hw, c);
    const Eigen::MatrixXd geo_tokens = tokens(geo_n, c);
    auto w = AttentionWeights::random(c, 2, 100 + trial);
    w.w_o.setZero();
    const FeatureSequence fused =
        fuse_bidirectional(FeatureSequence::rgb(rgb_tokens),
                           FeatureSequence::geometry(geo_tokens), w, w);
    shape_ok = shape_ok && fused.length() == hw + geo_n;
    const FeatureSequence through =
        transformer_layer(fused, TransformerLayerWeights::identity(c, 2));
    const auto [rgb_back, geo_back] = split_fused(through);
    round_trip_ok = round_trip_ok &&
                    (rgb_back.data - rgb_tokens).cwiseAbs().maxCoeff() == 0.0 &&
                    (geo_back.data - geo_tokens).cwiseAbs().maxCoeff() == 0.0;
  }

  // Three-token cross-attention against a hand-rolled scalar route
  // (C = 4, heads = 2).
  const Eigen::Index c = 4;
  const auto w = AttentionWeights::random(c, 2, 424242);
  const Eigen::MatrixXd query_tokens = tokens(5, c);
  const Eigen::MatrixXd kv_tokens = tokens(3, c);
  const Eigen::RowVectorXd out =
      cross_attention(FeatureSequence::rgb(query_tokens),
                      FeatureSequence::geometry(kv_tokens), w);

  std::vector<double> pooled(c, -1e300);
  for (Eigen::Index r = 0; r < query_tokens.rows(); ++r)
    for (Eigen::Index k = 0; k < c; ++k)
      pooled[k] = std::max(pooled[k], query_tokens(r, k));
  const auto rowmat = [&](const std::vector<double>& v, const Eigen::MatrixXd& m) {
    std::vector<double> o(c, 0.0);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < c; ++i) o[j] += v[i] * m(i, j);
    return o;
  };
  const std::vector<double> q = rowmat(pooled, w.w_q_max);
  std::vector<std::vector<double>> keys(3), values(3);
  for (int t = 0; t < 3; ++t) {
    std::vector<double> row(c);
    for (Eigen::Index k = 0; k < c; ++k) row[k] = kv_tokens(t, k);
    keys[t] = rowmat(row, w.w_k);
    values[t] = rowmat(row, w.w_v);
  }
  std::vector<double> concat(c, 0.0);
  const int dk = 2;
  for (int head = 0; head < 2; ++head) {
    double score[3];
    double mx = -1e300;
    for (int t = 0; t < 3; ++t) {
      score[t] = 0.0;
      for (int k = 0; k < dk; ++k)
        score[t] += q[head * dk + k] * keys[t][head * dk + k];
      score[t] /= std::sqrt(2.0);
      mx = std::max(mx, score[t]);
    }
    double denom = 0.0;
    for (int t = 0; t < 3; ++t) {
      score[t] = std::exp(score[t] - mx);
      denom += score[t];
    }
    for (int t = 0; t < 3; ++t)
      for (int k = 0; k < dk; ++k)
        concat[head * dk + k] += score[t] / denom * values[t][head * dk + k];
  }
  const std::vector<double> expected = rowmat(concat, w.w_o);
  double worst_ca = 0.0;
  for (Eigen::Index k = 0; k < c; ++k)
    worst_ca = std::max(worst_ca, std::abs(out(k) - expected[k]));

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "softmax row-sum error %.3g (<= 1e-6); length law %s; "
                "round trip %s; 3-token oracle delta %.3g (<= 1e-10)",
                worst_sum, shape_ok ? "ok" : "VIOLATED",
                round_trip_ok ? "ok" : "VIOLATED", worst_ca);
  detail = buf;
  return worst_sum <= 1e-6 && shape_ok && round_trip_ok && worst_ca <= 1e-10;
}

bool criterion_8_occlusion_sweep(std::string& detail, const std::string& cli) {
  // Fixed noise 10 deg, 30% outliers, M = 800, K = 8; 20 shared seeds per
  // occlusion level. Accuracy is ADD-0.1d with each scene's own diameter.
  const std::vector<double> levels = {0.0, 0.2, 0.4, 0.6, 0.8};
  const int seeds = 20;

  const auto run_level = [&](double occlusion, WeightModel weights) {
    int hits = 0;
    for (int s = 0; s < seeds; ++s) {
      SceneConfig cfg;
      cfg.seed = stream_seed(777, s, "occl");
      cfg.point_count = 800;
      cfg.keypoint_count = 8;
      cfg.angular_noise_deg = 10.0;
      cfg.outlier_fraction = 0.3;
      cfg.occlusion_fraction = occlusion;
      cfg.weight_model = weights;
      const SyntheticScene scene = generate_scene(cfg);
      const auto estimates = vote_all_keypoints(scene.problem);
      KeypointSet predicted;
      predicted.frame = Frame::camera;
      for (const auto& e : estimates) predicted.keypoints.push_back(e.position);
      const RigidTransform pose = estimate_pose(predicted, scene.model_keypoints);
      const double add = add_metric(scene.model, pose, scene.truth_pose);
      if (add < scene.model.diameter / 10.0) ++hits;
    }
    return static_cast<double>(hits) / seeds;
  };

  std::vector<double> accuracy;
  for (double lvl : levels) accuracy.push_back(run_level(lvl, WeightModel::oracle));
  bool monotone = true;
  for (std::size_t i = 1; i < accuracy.size(); ++i)
    monotone = monotone && accuracy[i] <= accuracy[i - 1];

  const double oracle_06 = accuracy[3];
  const double uniform_06 = run_level(0.6, WeightModel::uniform);

  // The CLI sweep emits one table row per level.
  namespace fs = std::filesystem;
  const fs::path table = fs::temp_directory_path() / "kpvote_accept_sweep.txt";
  const std::string cmd =
      cli +
      " sweep --axis occlusion --values 0,0.2,0.4,0.6,0.8"
      " --set scene.point_count=200 --set scene.keypoint_count=4"
      " --set trials=2 --set timing_repetitions=3"
      " --set 'algorithms=[\"wvwv\"]' > " +
      table.string();
  int sweep_rows = 0;
  if (std::system(cmd.c_str()) == 0) {
    std::ifstream in(table);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty() && (line[0] == ' ' || std::isdigit(line[0])) &&
          line.find("level") == std::string::npos)
        ++sweep_rows;
  }

  std::ostringstream ss;
  ss << "add-0.1d by occlusion:";
  for (std::size_t i = 0; i < levels.size(); ++i)
    ss << " " << levels[i] << "->" << accuracy[i];
  ss << (monotone ? " (non-increasing)" : " (NOT monotone)");
  ss << "; at 0.6 oracle " << oracle_06 << " vs unweighted " << uniform_06;
  ss << "; cli sweep rows " << sweep_rows << " (= 5)";
  detail = ss.str();
  return monotone && oracle_06 >= uniform_06 && sweep_rows == 5;
}

bool criterion_9_determinism(std::string& detail, const std::string& cli) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path();
  const fs::path csv1 = dir / "kpvote_accept_t1.csv";
  const fs::path csv2 = dir / "kpvote_accept_t4.csv";

  const std::string args =
      " run --set scene.point_count=600 --set scene.keypoint_count=6"
      " --set scene.angular_noise_deg=5 --set scene.outlier_fraction=0.1"
      " --set scene.weight_model=oracle --set trials=6"
      " --set timing_repetitions=3 --set master_seed=42 --csv ";

  ::setenv("VOTE_BENCH_THREADS", "1", 1);
  if (std::system((cli + args + csv1.string() + " > /dev/null").c_str()) != 0) {
    detail = "single-thread run failed";
    return false;
  }
  ::setenv("VOTE_BENCH_THREADS", "4", 1);
  if (std::system((cli + args + csv2.string() + " > /dev/null").c_str()) != 0) {
    detail = "four-thread run failed";
    return false;
  }
  ::unsetenv("VOTE_BENCH_THREADS");

  std::ifstream f1(csv1), f2(csv2);
  if (!f1 || !f2) {
    detail = "missing CSV output";
    return false;
  }
  std::string l1, l2;
  int lines = 0, mismatches = 0;
  while (true) {
    const bool g1 = static_cast<bool>(std::getline(f1, l1));
    const bool g2 = static_cast<bool>(std::getline(f2, l2));
    if (g1 != g2) {
      detail = "line counts differ";
      return false;
    }
    if (!g1) break;
    ++lines;
    std::istringstream s1(l1), s2(l2);
    std::string a, b;
    int field = 0;
    while (true) {
      const bool h1 = static_cast<bool>(std::getline(s1, a, ','));
      const bool h2 = static_cast<bool>(std::getline(s2, b, ','));
      if (h1 != h2) {
        ++mismatches;
        break;
      }
      if (!h1) break;
      if (field != 5 && field != 6 && a != b) ++mismatches;  // allow time columns
      ++field;
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "%d lines compared, %d non-timing mismatches (threads 1 vs 4)",
                lines, mismatches);
  detail = buf;
  return lines > 0 && mismatches == 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance_tests <path-to-vote_bench>\n";
    return 2;
  }
  const std::string cli = argv[1];

  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "closed-form voting matches the brute-force oracle",
       criterion_1_oracle_equivalence},
      {2, "noise-free exact recovery through the full pipeline",
       criterion_2_exact_recovery},
      {3, "voting-vs-meanshift time and accuracy comparison",
       criterion_3_baseline_comparison},
      {4, "rigid-fit generate-and-recover and reflection handling",
       criterion_4_pose_fit},
      {5, "metric identities (adds<=add, grid==brute, auc closed form)",
       criterion_5_metric_identities},
      {6, "loss gradients vs central differences and vecf stationarity",
       criterion_6_loss_gradients},
      {7, "fusion block invariants and scalar attention oracle",
       criterion_7_fusion_invariants},
      {8, "occlusion sweep monotonicity and weight benefit",
       [&cli](std::string& d) { return criterion_8_occlusion_sweep(d, cli); }},
      {9, "thread-count determinism of the benchmark CSV",
       [&cli](std::string& d) { return criterion_9_determinism(d, cli); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    std::string text;
    bool ok = false;
    try {
      ok = c.fn(text);
    } catch (const std::exception& e) {
      text = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": "
              << c.name << " (" << text << ")\n";
    std::cout.flush();
    if (!ok) ++failures;
  }
  if (failures > 0)
    std::cout << failures << " criterion(s) failed\n";
  else
    std::cout << "all criteria passed\n";
  return failures == 0 ? 0 : 1;
}
