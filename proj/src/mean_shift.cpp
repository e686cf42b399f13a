#include "kpvote/mean_shift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kpvote {

namespace {

constexpr std::size_t kMaxSeeds = 512;

// The gaussian kernel is evaluated with a hard cutoff at 6 bandwidths
// (relative weight exp(-18) ~ 1.5e-8) so a spatial grid can skip far
// candidates; the flat kernel cuts off at the bandwidth by definition.
double cutoff_radius(const MeanShiftConfig& c) {
  return c.kernel == Kernel::gaussian ? 6.0 * c.bandwidth : c.bandwidth;
}

struct Grid {
  Vec3 origin;
  double cell = 1.0;
  int nx = 1, ny = 1, nz = 1;
  const std::vector<Vec3>* pts = nullptr;
  const std::vector<double>* wts = nullptr;
  std::vector<int>* cell_start = nullptr;  // CSR offsets, size nx*ny*nz+1
  std::vector<int>* order = nullptr;       // candidate indices by cell

  int clampi(int v, int hi) const { return std::min(std::max(v, 0), hi); }

  int cell_of(const Vec3& p) const {
    const int ix = clampi(static_cast<int>(std::floor((p.x() - origin.x()) / cell)), nx - 1);
    const int iy = clampi(static_cast<int>(std::floor((p.y() - origin.y()) / cell)), ny - 1);
    const int iz = clampi(static_cast<int>(std::floor((p.z() - origin.z()) / cell)), nz - 1);
    return (ix * ny + iy) * nz + iz;
  }
};

Grid build_grid(const CandidateSet& cs, double radius, MeanShiftWorkspace& ws) {
  Grid g;
  g.pts = &cs.candidates;
  g.wts = &cs.weights;
  g.cell_start = &ws.cell_start;
  g.order = &ws.order;

  Vec3 lo = cs.candidates.front(), hi = lo;
  for (const Vec3& p : cs.candidates) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  g.origin = lo;
  const double extent = std::max((hi - lo).maxCoeff(), 1e-12);
  // Cell edge = cutoff radius, capped so the grid never exceeds 64^3 cells.
  g.cell = std::max(radius, extent / 64.0);
  g.nx = g.clampi(static_cast<int>((hi.x() - lo.x()) / g.cell), 63) + 1;
  g.ny = g.clampi(static_cast<int>((hi.y() - lo.y()) / g.cell), 63) + 1;
  g.nz = g.clampi(static_cast<int>((hi.z() - lo.z()) / g.cell), 63) + 1;

  const int ncells = g.nx * g.ny * g.nz;
  const int n = static_cast<int>(cs.candidates.size());
  ws.cell_index.assign(n, 0);
  ws.cell_start.assign(ncells + 1, 0);
  ws.order.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    ws.cell_index[i] = g.cell_of(cs.candidates[i]);
    ++ws.cell_start[ws.cell_index[i] + 1];
  }
  for (int c = 0; c < ncells; ++c) ws.cell_start[c + 1] += ws.cell_start[c];
  std::vector<int> cursor(ws.cell_start.begin(), ws.cell_start.end() - 1);
  for (int i = 0; i < n; ++i) ws.order[cursor[ws.cell_index[i]]++] = i;
  return g;
}

struct KernelSum {
  Vec3 weighted_mean = Vec3::Zero();
  double density = 0.0;
};

// Kernel-weighted mean and density at x, scanning only grid cells within
// the cutoff radius. Candidate visit order is fixed by the grid layout, so
// sums are reproducible.
KernelSum kernel_sum_at(const Vec3& x, const Grid& g,
                        const MeanShiftConfig& cfg, double radius) {
  const double r2 = radius * radius;
  const double inv_h2 = 1.0 / (cfg.bandwidth * cfg.bandwidth);
  const int x0 = g.clampi(static_cast<int>(std::floor((x.x() - radius - g.origin.x()) / g.cell)), g.nx - 1);
  const int x1 = g.clampi(static_cast<int>(std::floor((x.x() + radius - g.origin.x()) / g.cell)), g.nx - 1);
  const int y0 = g.clampi(static_cast<int>(std::floor((x.y() - radius - g.origin.y()) / g.cell)), g.ny - 1);
  const int y1 = g.clampi(static_cast<int>(std::floor((x.y() + radius - g.origin.y()) / g.cell)), g.ny - 1);
  const int z0 = g.clampi(static_cast<int>(std::floor((x.z() - radius - g.origin.z()) / g.cell)), g.nz - 1);
  const int z1 = g.clampi(static_cast<int>(std::floor((x.z() + radius - g.origin.z()) / g.cell)), g.nz - 1);

  Vec3 num = Vec3::Zero();
  double den = 0.0;
  for (int ix = x0; ix <= x1; ++ix) {
    for (int iy = y0; iy <= y1; ++iy) {
      for (int iz = z0; iz <= z1; ++iz) {
        const int c = (ix * g.ny + iy) * g.nz + iz;
        const int begin = (*g.cell_start)[c];
        const int end = (*g.cell_start)[c + 1];
        for (int k = begin; k < end; ++k) {
          const int i = (*g.order)[k];
          const Vec3& p = (*g.pts)[i];
          const double d2 = (x - p).squaredNorm();
          if (d2 > r2) continue;
          const double w = (*g.wts)[i];
          if (w == 0.0) continue;
          const double kv = cfg.kernel == Kernel::gaussian
                                ? w * std::exp(-0.5 * d2 * inv_h2)
                                : w;
          num += kv * p;
          den += kv;
        }
      }
    }
  }
  KernelSum out;
  out.density = den;
  if (den > 0.0) out.weighted_mean = num / den;
  return out;
}

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

}  // namespace

MeanShiftConfig MeanShiftConfig::for_object_diameter(double diameter) {
  if (!(diameter > 0.0))
    throw InvalidInput("MeanShiftConfig: diameter must be > 0");
  MeanShiftConfig c;
  c.bandwidth = 0.05 * diameter;
  c.kernel = Kernel::gaussian;
  c.max_iterations = 100;
  c.shift_tolerance = 1e-5;
  c.merge_radius = c.bandwidth / 2.0;
  return c;
}

void MeanShiftConfig::validate() const {
  if (!(bandwidth > 0.0) || !(shift_tolerance > 0.0) || !(merge_radius > 0.0) ||
      max_iterations < 1)
    throw InvalidInput("MeanShiftConfig: all parameters must be positive");
  if (merge_radius > bandwidth)
    throw InvalidInput("MeanShiftConfig: merge_radius must be <= bandwidth");
}

void CandidateSet::validate() const {
  if (candidates.empty())
    throw DegenerateProblem("CandidateSet: no candidates");
  if (weights.size() != candidates.size())
    throw ShapeError("CandidateSet: weights length != candidate count");
  validate_cloud(candidates, "CandidateSet");
  bool any = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw InvalidInput("CandidateSet: weights must be finite and >= 0");
    any |= w > 0.0;
  }
  if (!any) throw DegenerateProblem("CandidateSet: all weights are zero");
}

ModeResult mean_shift_mode(const CandidateSet& candidates,
                           const MeanShiftConfig& config,
                           MeanShiftWorkspace* workspace) {
  config.validate();
  candidates.validate();

  MeanShiftWorkspace local;
  MeanShiftWorkspace& ws = workspace ? *workspace : local;

  const double radius = cutoff_radius(config);
  const Grid grid = build_grid(candidates, radius, ws);

  const std::size_t m = candidates.candidates.size();
  ws.seeds.clear();
  if (m <= kMaxSeeds) {
    ws.seeds.resize(m);
    for (std::size_t i = 0; i < m; ++i) ws.seeds[i] = i;
  } else {
    ws.seeds = fps_indices(candidates.candidates, kMaxSeeds, 0);
  }

  struct Converged {
    Vec3 pos;
    double support;
  };
  std::vector<Converged> ends;
  ends.reserve(ws.seeds.size());

  int iterations_used = 0;
  for (std::size_t s : ws.seeds) {
    Vec3 x = candidates.candidates[s];
    int iters = 0;
    while (iters < config.max_iterations) {
      ++iters;
      const KernelSum sum = kernel_sum_at(x, grid, config, radius);
      if (sum.density <= 0.0) break;  // stranded seed, keep position
      const double shift = (sum.weighted_mean - x).norm();
      x = sum.weighted_mean;
      if (shift < config.shift_tolerance) break;
    }
    iterations_used = std::max(iterations_used, iters);
    ends.push_back({x, kernel_sum_at(x, grid, config, radius).density});
  }

  // Merge trajectories that landed within merge_radius. Strongest first,
  // ties broken lexicographically, so the outcome is independent of seed
  // completion order.
  std::sort(ends.begin(), ends.end(), [](const Converged& a, const Converged& b) {
    if (a.support != b.support) return a.support > b.support;
    return lex_less(a.pos, b.pos);
  });
  std::vector<Converged> modes;
  for (const Converged& e : ends) {
    bool absorbed = false;
    for (const Converged& mo : modes) {
      if ((e.pos - mo.pos).norm() <= config.merge_radius) {
        absorbed = true;
        break;
      }
    }
    if (!absorbed) modes.push_back(e);
  }

  ModeResult out;
  out.mode = modes.front().pos;
  out.support = modes.front().support;
  out.iterations_used = iterations_used;
  return out;
}

CandidateSet make_candidates(const VectorVoteProblem& problem,
                             std::span<const Vec3> offsets, std::size_t j) {
  const std::size_t m = problem.point_count();
  if (offsets.size() != problem.keypoint_count * m)
    throw ShapeError("make_candidates: offsets must be K x M");
  if (j >= problem.keypoint_count)
    throw InvalidInput("make_candidates: keypoint index out of range");

  CandidateSet cs;
  cs.candidates.resize(m);
  cs.weights = problem.weights;
  for (std::size_t i = 0; i < m; ++i)
    cs.candidates[i] = problem.points[i] + offsets[j * m + i];
  return cs;
}

std::vector<Vec3> cluster_all_keypoints(const VectorVoteProblem& problem,
                                        std::span<const Vec3> offsets,
                                        const MeanShiftConfig& config) {
  problem.validate();
  if (offsets.size() != problem.keypoint_count * problem.point_count())
    throw ShapeError("cluster_all_keypoints: offsets must be K x M");

  MeanShiftWorkspace ws;
  std::vector<Vec3> modes;
  modes.reserve(problem.keypoint_count);
  for (std::size_t j = 0; j < problem.keypoint_count; ++j) {
    try {
      modes.push_back(
          mean_shift_mode(make_candidates(problem, offsets, j), config, &ws)
              .mode);
    } catch (const DegenerateProblem& e) {
      throw DegenerateProblem(
          "keypoint " + std::to_string(j) + ": " + e.what(),
          static_cast<std::ptrdiff_t>(j));
    }
  }
  return modes;
}

}  // namespace kpvote
