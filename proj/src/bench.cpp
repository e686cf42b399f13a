#include "kpvote/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "kpvote/metrics.hpp"
#include "kpvote/pose_fit.hpp"
#include "kpvote/rng.hpp"

namespace kpvote {

namespace {

using json = nlohmann::ordered_json;

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw InvalidInput("csv: bad numeric field '" + s + "'");
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::int64_t median_ns(std::vector<std::int64_t> v) {
  std::vector<double> d(v.begin(), v.end());
  return static_cast<std::int64_t>(std::llround(median(std::move(d))));
}

// Timed regions must not overlap; trial generation and metrics may proceed
// concurrently around them.
std::mutex& timing_mutex() {
  static std::mutex m;
  return m;
}

std::string shape_name(ShapeKind s) {
  switch (s) {
    case ShapeKind::sphere: return "sphere";
    case ShapeKind::box: return "box";
    case ShapeKind::cylinder: return "cylinder";
    default: return "loaded";
  }
}

ShapeKind shape_from_name(const std::string& n) {
  if (n == "sphere") return ShapeKind::sphere;
  if (n == "box") return ShapeKind::box;
  if (n == "cylinder") return ShapeKind::cylinder;
  if (n == "loaded") return ShapeKind::loaded;
  throw ConfigError("unknown shape '" + n + "'");
}

std::string weight_model_name(WeightModel w) {
  switch (w) {
    case WeightModel::uniform: return "uniform";
    case WeightModel::oracle: return "oracle";
    default: return "random";
  }
}

WeightModel weight_model_from_name(const std::string& n) {
  if (n == "uniform") return WeightModel::uniform;
  if (n == "oracle") return WeightModel::oracle;
  if (n == "random") return WeightModel::random;
  throw ConfigError("unknown weight model '" + n + "'");
}

std::string kernel_name(Kernel k) {
  return k == Kernel::gaussian ? "gaussian" : "flat";
}

Kernel kernel_from_name(const std::string& n) {
  if (n == "gaussian") return Kernel::gaussian;
  if (n == "flat") return Kernel::flat;
  throw ConfigError("unknown kernel '" + n + "'");
}

}  // namespace

std::string algorithm_name(Algorithm a) {
  return a == Algorithm::wvwv ? "wvwv" : "meanshift";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "wvwv") return Algorithm::wvwv;
  if (name == "meanshift") return Algorithm::meanshift;
  throw ConfigError("unknown algorithm '" + name + "'");
}

MeanShiftConfig MeanShiftSettings::resolve(double diameter) const {
  if (!(diameter > 0.0))
    throw InvalidInput("MeanShiftSettings: diameter must be > 0");
  MeanShiftConfig c;
  c.bandwidth = bandwidth_scale * diameter;
  c.kernel = kernel;
  c.max_iterations = max_iterations;
  c.shift_tolerance = shift_tolerance;
  c.merge_radius = merge_radius_factor * c.bandwidth;
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  scene.validate();
  if (algorithms.empty())
    throw ConfigError("ExperimentConfig: need at least one algorithm");
  for (std::size_t i = 0; i < algorithms.size(); ++i)
    for (std::size_t j = i + 1; j < algorithms.size(); ++j)
      if (algorithms[i] == algorithms[j])
        throw ConfigError("ExperimentConfig: duplicate algorithm");
  if (trials < 1) throw ConfigError("ExperimentConfig: trials must be >= 1");
  if (timing_repetitions < 3)
    throw ConfigError("ExperimentConfig: timing_repetitions must be >= 3");
  if (!(auc_max_threshold_m > 0.0))
    throw ConfigError("ExperimentConfig: auc_max_threshold_m must be > 0");
  if (!(rank_tolerance > 0.0))
    throw ConfigError("ExperimentConfig: rank_tolerance must be > 0");
  if (!(meanshift.bandwidth_scale > 0.0) ||
      !(meanshift.merge_radius_factor > 0.0) ||
      meanshift.merge_radius_factor > 1.0 ||
      !(meanshift.shift_tolerance > 0.0) || meanshift.max_iterations < 1)
    throw ConfigError("ExperimentConfig: bad meanshift settings");
}

std::uint64_t ExperimentConfig::fingerprint() const {
  // Canonical string over result-affecting fields only; output paths and
  // thread count are deliberately excluded so reruns with different
  // plumbing hash identically.
  std::ostringstream ss;
  ss << "scene.point_count=" << scene.point_count
     << ";scene.keypoint_count=" << scene.keypoint_count
     << ";scene.shape=" << shape_name(scene.shape)
     << ";scene.model_file=" << scene.model_file
     << ";scene.angular_noise_deg=" << format_g17(scene.angular_noise_deg)
     << ";scene.outlier_fraction=" << format_g17(scene.outlier_fraction)
     << ";scene.occlusion_fraction=" << format_g17(scene.occlusion_fraction)
     << ";scene.weight_model=" << weight_model_name(scene.weight_model)
     << ";algorithms=";
  for (Algorithm a : algorithms) ss << algorithm_name(a) << ",";
  ss << ";trials=" << trials << ";timing_repetitions=" << timing_repetitions
     << ";master_seed=" << master_seed
     << ";ms.bandwidth_scale=" << format_g17(meanshift.bandwidth_scale)
     << ";ms.kernel=" << kernel_name(meanshift.kernel)
     << ";ms.max_iterations=" << meanshift.max_iterations
     << ";ms.shift_tolerance=" << format_g17(meanshift.shift_tolerance)
     << ";ms.merge_radius_factor=" << format_g17(meanshift.merge_radius_factor)
     << ";auc_max_threshold_m=" << format_g17(auc_max_threshold_m)
     << ";rank_tolerance=" << format_g17(rank_tolerance)
     << ";pose_weight_by_vote_mass=" << (pose_weight_by_vote_mass ? 1 : 0);
  return tag_hash(ss.str());
}

unsigned bench_thread_count() {
  if (const char* env = std::getenv("VOTE_BENCH_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && v <= 256) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace {

struct TrialOutcome {
  std::vector<TrialReport> reports;  // one per algorithm
};

TrialReport degenerate_report(int trial, Algorithm algo,
                              const std::string& reason) {
  TrialReport r;
  r.trial = trial;
  r.algorithm = algo;
  r.degenerate = true;
  r.degenerate_reason = reason;
  r.kp_rmse_m = r.add_m = r.adds_m = std::numeric_limits<double>::quiet_NaN();
  return r;
}

void fill_metrics(TrialReport& r, const SyntheticScene& scene,
                  const KeypointSet& predicted,
                  std::span<const double> fit_weights) {
  r.per_keypoint_error_m.resize(predicted.keypoints.size());
  for (std::size_t j = 0; j < predicted.keypoints.size(); ++j)
    r.per_keypoint_error_m[j] =
        (predicted.keypoints[j] - scene.truth_keypoints_camera.keypoints[j])
            .norm();

  const auto t0 = std::chrono::steady_clock::now();
  const RigidTransform pose =
      estimate_pose(predicted, scene.model_keypoints, fit_weights);
  const auto t1 = std::chrono::steady_clock::now();
  r.fit_time_ns = std::max<std::int64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count(), 1);

  const PoseError err = evaluate_pose_error(
      scene.model, pose, scene.truth_pose, predicted,
      scene.truth_keypoints_camera);
  r.kp_rmse_m = err.keypoint_rmse;
  r.add_m = err.add;
  r.adds_m = err.add_s;
}

TrialOutcome run_trial(const ExperimentConfig& config, int trial) {
  SceneConfig scene_cfg = config.scene;
  scene_cfg.seed = stream_seed(config.master_seed, static_cast<std::uint64_t>(trial),
                               "trial");

  TrialOutcome outcome;
  SyntheticScene scene;
  try {
    scene = generate_scene(scene_cfg);
  } catch (const Error& e) {
    for (Algorithm a : config.algorithms)
      outcome.reports.push_back(degenerate_report(trial, a, e.what()));
    return outcome;
  }

  const int reps = config.timing_repetitions;
  for (Algorithm algo : config.algorithms) {
    try {
      TrialReport r;
      r.trial = trial;
      r.algorithm = algo;
      KeypointSet predicted;
      predicted.frame = Frame::camera;
      std::vector<double> fit_weights;

      if (algo == Algorithm::wvwv) {
        std::vector<KeypointEstimate> estimates;
        std::vector<std::int64_t> times(reps);
        {
          std::lock_guard<std::mutex> lock(timing_mutex());
          for (int rep = 0; rep < reps; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            estimates = vote_all_keypoints(scene.problem, config.rank_tolerance);
            const auto t1 = std::chrono::steady_clock::now();
            times[rep] =
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
                    .count();
          }
        }
        r.vote_time_ns = std::max<std::int64_t>(median_ns(times), 1);
        for (const KeypointEstimate& e : estimates) {
          predicted.keypoints.push_back(e.position);
          r.ranks.push_back(e.normal_matrix_rank);
          if (config.pose_weight_by_vote_mass)
            fit_weights.push_back(e.weight_mass);
        }
      } else {
        const MeanShiftConfig ms_cfg =
            config.meanshift.resolve(scene.model.diameter);
        // Candidate construction is input prep shared with the voter's
        // vector fields; keep it (and its allocations) outside the timed
        // region.
        std::vector<CandidateSet> candidates;
        candidates.reserve(scene.problem.keypoint_count);
        for (std::size_t j = 0; j < scene.problem.keypoint_count; ++j)
          candidates.push_back(make_candidates(scene.problem, scene.offsets, j));

        MeanShiftWorkspace ws;
        std::vector<Vec3> modes(scene.problem.keypoint_count);
        std::vector<std::int64_t> times(reps);
        {
          std::lock_guard<std::mutex> lock(timing_mutex());
          for (int rep = 0; rep < reps; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            for (std::size_t j = 0; j < candidates.size(); ++j)
              modes[j] = mean_shift_mode(candidates[j], ms_cfg, &ws).mode;
            const auto t1 = std::chrono::steady_clock::now();
            times[rep] =
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
                    .count();
          }
        }
        r.vote_time_ns = std::max<std::int64_t>(median_ns(times), 1);
        predicted.keypoints = modes;
      }

      fill_metrics(r, scene, predicted, fit_weights);
      outcome.reports.push_back(std::move(r));
    } catch (const Error& e) {
      outcome.reports.push_back(degenerate_report(trial, algo, e.what()));
    }
  }
  return outcome;
}

}  // namespace

std::vector<TrialReport> run_experiment(const ExperimentConfig& config) {
  config.validate();

  const int trials = config.trials;
  std::vector<TrialOutcome> outcomes(trials);
  const unsigned threads =
      std::min<unsigned>(bench_thread_count(), static_cast<unsigned>(trials));

  if (threads <= 1) {
    for (int t = 0; t < trials; ++t) outcomes[t] = run_trial(config, t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const int t = next.fetch_add(1);
          if (t >= trials) return;
          outcomes[t] = run_trial(config, t);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  // Assembly is order-independent: slots are indexed by trial id, so the
  // emitted sequence is (trial, algorithm-config-order) regardless of
  // scheduling.
  std::vector<TrialReport> reports;
  reports.reserve(static_cast<std::size_t>(trials) * config.algorithms.size());
  for (TrialOutcome& o : outcomes)
    for (TrialReport& r : o.reports) reports.push_back(std::move(r));
  return reports;
}

namespace {

std::string rank_flags_string(const TrialReport& r) {
  if (r.degenerate) return "X";
  if (r.algorithm != Algorithm::wvwv || r.ranks.empty()) return "-";
  std::string s;
  for (int rank : r.ranks) s += static_cast<char>('0' + std::clamp(rank, 0, 3));
  return s;
}

}  // namespace

void write_csv(const std::vector<TrialReport>& reports,
               const ExperimentConfig& config, double diameter_m,
               std::ostream& out) {
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(config.fingerprint()));
  out << "# fingerprint=" << fp << " diameter_m=" << format_g17(diameter_m)
      << " auc_max_m=" << format_g17(config.auc_max_threshold_m) << "\n";
  out << "trial,algorithm,kp_rmse_m,add_m,adds_m,vote_time_ns,fit_time_ns,"
         "rank_flags\n";
  for (const TrialReport& r : reports) {
    out << r.trial << ',' << algorithm_name(r.algorithm) << ','
        << format_g17(r.kp_rmse_m) << ',' << format_g17(r.add_m) << ','
        << format_g17(r.adds_m) << ',' << r.vote_time_ns << ','
        << r.fit_time_ns << ',' << rank_flags_string(r) << '\n';
  }
}

ParsedCsv read_csv(std::istream& in) {
  ParsedCsv parsed;
  std::string line;
  bool have_header = false;
  bool have_meta = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string token;
      while (meta >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "fingerprint")
          parsed.fingerprint = std::strtoull(value.c_str(), nullptr, 16);
        else if (key == "diameter_m")
          parsed.diameter_m = parse_double(value);
        else if (key == "auc_max_m")
          parsed.auc_max_m = parse_double(value);
      }
      have_meta = true;
      continue;
    }
    if (!have_header) {
      if (line !=
          "trial,algorithm,kp_rmse_m,add_m,adds_m,vote_time_ns,fit_time_ns,"
          "rank_flags")
        throw InvalidInput("csv: unexpected header '" + line + "'");
      have_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 8)
      throw InvalidInput("csv: expected 8 fields, got line '" + line + "'");

    TrialReport r;
    r.trial = static_cast<int>(std::strtol(fields[0].c_str(), nullptr, 10));
    r.algorithm = algorithm_from_name(fields[1]);
    r.kp_rmse_m = parse_double(fields[2]);
    r.add_m = parse_double(fields[3]);
    r.adds_m = parse_double(fields[4]);
    r.vote_time_ns = std::strtoll(fields[5].c_str(), nullptr, 10);
    r.fit_time_ns = std::strtoll(fields[6].c_str(), nullptr, 10);
    if (fields[7] == "X") {
      r.degenerate = true;
    } else if (fields[7] != "-") {
      for (char c : fields[7]) r.ranks.push_back(c - '0');
    }
    parsed.reports.push_back(std::move(r));
  }
  if (!have_meta || !have_header)
    throw InvalidInput("csv: missing metadata or header line");
  return parsed;
}

ParsedCsv read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_csv(in);
}

void write_json(const std::vector<TrialReport>& reports,
                const ExperimentConfig& config, double diameter_m,
                std::ostream& out) {
  char fp[32];
  std::snprintf(fp, sizeof(fp), "%016llx",
                static_cast<unsigned long long>(config.fingerprint()));
  json doc;
  doc["schema"] = "kpvote.report.v1";
  doc["fingerprint"] = fp;
  doc["diameter_m"] = diameter_m;
  doc["config"] = json::parse(experiment_config_to_json(config));
  json rows = json::array();
  for (const TrialReport& r : reports) {
    json row = {{"trial", r.trial},
                {"algorithm", algorithm_name(r.algorithm)},
                {"degenerate", r.degenerate}};
    if (r.degenerate) {
      row["reason"] = r.degenerate_reason;
    } else {
      row["kp_rmse_m"] = r.kp_rmse_m;
      row["per_keypoint_error_m"] = r.per_keypoint_error_m;
      row["add_m"] = r.add_m;
      row["adds_m"] = r.adds_m;
      row["vote_time_ns"] = r.vote_time_ns;
      row["fit_time_ns"] = r.fit_time_ns;
      row["ranks"] = r.ranks;
    }
    rows.push_back(std::move(row));
  }
  doc["reports"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

Summary summarize(const std::vector<TrialReport>& reports, double diameter_m,
                  double auc_max_m) {
  if (reports.empty()) throw InvalidInput("summarize: no reports");

  Summary summary;
  std::vector<Algorithm> seen;
  for (const TrialReport& r : reports)
    if (std::find(seen.begin(), seen.end(), r.algorithm) == seen.end())
      seen.push_back(r.algorithm);

  int usable_total = 0;
  for (Algorithm a : seen) {
    AlgorithmSummary s;
    s.algorithm = a;
    std::vector<double> rmse, adds_errors, vote_times, fit_times;
    std::vector<double> add_errors;
    for (const TrialReport& r : reports) {
      if (r.algorithm != a) continue;
      ++s.trials;
      if (r.degenerate) {
        ++s.degenerate;
        continue;
      }
      rmse.push_back(r.kp_rmse_m);
      add_errors.push_back(r.add_m);
      vote_times.push_back(static_cast<double>(r.vote_time_ns));
      fit_times.push_back(static_cast<double>(r.fit_time_ns));
    }
    if (!rmse.empty()) {
      s.mean_kp_rmse_m = 0.0;
      for (double v : rmse) s.mean_kp_rmse_m += v;
      s.mean_kp_rmse_m /= static_cast<double>(rmse.size());
      s.median_kp_rmse_m = median(rmse);
      s.add_auc = auc(add_errors, auc_max_m);
      if (diameter_m > 0.0) s.add_0_1d = add_0_1d_accuracy(add_errors, diameter_m);
      s.median_vote_time_ns = median(vote_times);
      s.median_fit_time_ns = median(fit_times);
      usable_total += static_cast<int>(rmse.size());
    }
    summary.per_algorithm.push_back(s);
  }
  summary.all_degenerate = usable_total == 0;

  const auto find = [&](Algorithm a) -> const AlgorithmSummary* {
    for (const AlgorithmSummary& s : summary.per_algorithm)
      if (s.algorithm == a && s.trials > s.degenerate) return &s;
    return nullptr;
  };
  const AlgorithmSummary* fast = find(Algorithm::wvwv);
  const AlgorithmSummary* base = find(Algorithm::meanshift);
  if (fast && base && fast->median_vote_time_ns > 0.0)
    summary.speedup_vs_meanshift =
        base->median_vote_time_ns / fast->median_vote_time_ns;
  return summary;
}

std::string format_summary_table(const Summary& summary) {
  std::ostringstream out;
  if (summary.all_degenerate) {
    out << "all trials degenerate (100% failure); no aggregates\n";
    for (const AlgorithmSummary& s : summary.per_algorithm)
      out << "  " << algorithm_name(s.algorithm) << ": " << s.degenerate << "/"
          << s.trials << " degenerate\n";
    return out.str();
  }
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %6s %5s %14s %14s %8s %9s %12s %11s\n",
                "algorithm", "trials", "fail", "kp_rmse_mean_m",
                "kp_rmse_med_m", "add_auc", "add_0.1d", "vote_ms_med",
                "fit_ms_med");
  out << line;
  for (const AlgorithmSummary& s : summary.per_algorithm) {
    if (s.trials == s.degenerate) {
      std::snprintf(line, sizeof(line), "%-10s %6d %5d %14s %14s %8s %9s %12s %11s\n",
                    algorithm_name(s.algorithm).c_str(), s.trials, s.degenerate,
                    "-", "-", "-", "-", "-", "-");
      out << line;
      continue;
    }
    std::snprintf(line, sizeof(line),
                  "%-10s %6d %5d %14.6g %14.6g %8.4f %9.4f %12.4f %11.4f\n",
                  algorithm_name(s.algorithm).c_str(), s.trials, s.degenerate,
                  s.mean_kp_rmse_m, s.median_kp_rmse_m, s.add_auc, s.add_0_1d,
                  s.median_vote_time_ns / 1e6, s.median_fit_time_ns / 1e6);
    out << line;
  }
  if (summary.speedup_vs_meanshift) {
    std::snprintf(line, sizeof(line),
                  "speedup (meanshift median vote time / wvwv): %.3fx\n",
                  *summary.speedup_vs_meanshift);
    out << line;
  }
  return out.str();
}

namespace {

void apply_scene_json(SceneConfig& scene, const json& j) {
  if (j.contains("point_count")) scene.point_count = j["point_count"].get<std::size_t>();
  if (j.contains("keypoint_count"))
    scene.keypoint_count = j["keypoint_count"].get<std::size_t>();
  if (j.contains("shape")) scene.shape = shape_from_name(j["shape"].get<std::string>());
  if (j.contains("model_file")) scene.model_file = j["model_file"].get<std::string>();
  if (j.contains("angular_noise_deg"))
    scene.angular_noise_deg = j["angular_noise_deg"].get<double>();
  if (j.contains("outlier_fraction"))
    scene.outlier_fraction = j["outlier_fraction"].get<double>();
  if (j.contains("occlusion_fraction"))
    scene.occlusion_fraction = j["occlusion_fraction"].get<double>();
  if (j.contains("weight_model"))
    scene.weight_model = weight_model_from_name(j["weight_model"].get<std::string>());
}

}  // namespace

ExperimentConfig experiment_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("scene")) apply_scene_json(cfg.scene, j["scene"]);
    if (j.contains("algorithms")) {
      cfg.algorithms.clear();
      for (const auto& a : j["algorithms"])
        cfg.algorithms.push_back(algorithm_from_name(a.get<std::string>()));
    }
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("timing_repetitions"))
      cfg.timing_repetitions = j["timing_repetitions"].get<int>();
    if (j.contains("master_seed"))
      cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("meanshift")) {
      const json& ms = j["meanshift"];
      if (ms.contains("bandwidth_scale"))
        cfg.meanshift.bandwidth_scale = ms["bandwidth_scale"].get<double>();
      if (ms.contains("kernel"))
        cfg.meanshift.kernel = kernel_from_name(ms["kernel"].get<std::string>());
      if (ms.contains("max_iterations"))
        cfg.meanshift.max_iterations = ms["max_iterations"].get<int>();
      if (ms.contains("shift_tolerance"))
        cfg.meanshift.shift_tolerance = ms["shift_tolerance"].get<double>();
      if (ms.contains("merge_radius_factor"))
        cfg.meanshift.merge_radius_factor =
            ms["merge_radius_factor"].get<double>();
    }
    if (j.contains("auc_max_threshold_m"))
      cfg.auc_max_threshold_m = j["auc_max_threshold_m"].get<double>();
    if (j.contains("rank_tolerance"))
      cfg.rank_tolerance = j["rank_tolerance"].get<double>();
    if (j.contains("pose_weight_by_vote_mass"))
      cfg.pose_weight_by_vote_mass = j["pose_weight_by_vote_mass"].get<bool>();
    if (j.contains("output_csv")) cfg.output_csv = j["output_csv"].get<std::string>();
    if (j.contains("output_json")) cfg.output_json = j["output_json"].get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value type: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return experiment_config_from_json_text(buf.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["scene"] = {{"point_count", cfg.scene.point_count},
                {"keypoint_count", cfg.scene.keypoint_count},
                {"shape", shape_name(cfg.scene.shape)},
                {"model_file", cfg.scene.model_file},
                {"angular_noise_deg", cfg.scene.angular_noise_deg},
                {"outlier_fraction", cfg.scene.outlier_fraction},
                {"occlusion_fraction", cfg.scene.occlusion_fraction},
                {"weight_model", weight_model_name(cfg.scene.weight_model)}};
  json algos = json::array();
  for (Algorithm a : cfg.algorithms) algos.push_back(algorithm_name(a));
  j["algorithms"] = std::move(algos);
  j["trials"] = cfg.trials;
  j["timing_repetitions"] = cfg.timing_repetitions;
  j["master_seed"] = cfg.master_seed;
  j["meanshift"] = {{"bandwidth_scale", cfg.meanshift.bandwidth_scale},
                    {"kernel", kernel_name(cfg.meanshift.kernel)},
                    {"max_iterations", cfg.meanshift.max_iterations},
                    {"shift_tolerance", cfg.meanshift.shift_tolerance},
                    {"merge_radius_factor", cfg.meanshift.merge_radius_factor}};
  j["auc_max_threshold_m"] = cfg.auc_max_threshold_m;
  j["rank_tolerance"] = cfg.rank_tolerance;
  j["pose_weight_by_vote_mass"] = cfg.pose_weight_by_vote_mass;
  j["output_csv"] = cfg.output_csv;
  j["output_json"] = cfg.output_json;
  return j.dump(2);
}

}  // namespace kpvote
