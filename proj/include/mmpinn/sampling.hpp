#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mmpinn/common.hpp"
#include "mmpinn/problems.hpp"

namespace mmpinn {

struct SampleCounts {
  int n_initial = 0;
  int n_boundary = 0;
  int n_residual = 0;
};

/// Partition of the domain along one axis into closed-right intervals
/// (lo,T1], (T1,T2], ..., (T_{k-1},hi]; the first interval includes lo.
struct GroupingSpec {
  int axis = 0;
  std::vector<double> cut_points;
};

template <class T>
struct TrainingSet {
  int dim = 0;
  std::uint64_t seed = 0;
  std::vector<T> supervised_points;       // [n_sup][dim]
  std::vector<int> supervised_condition;  // condition index per point
  std::vector<T> residual_points;         // [n_res][dim]
  std::vector<int> group_of;              // group id per residual point
  int group_count = 1;
  SampleCounts counts;

  std::size_t supervised_size() const { return supervised_condition.size(); }
  std::size_t residual_size() const { return group_of.size(); }
};

namespace detail {

/// Open-interval draw (lo, hi); boundary hits are redrawn.
inline double draw_interior(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double x;
  do {
    x = lo + (hi - lo) * uni(rng);
  } while (x <= lo || x >= hi);
  return x;
}

/// Half-open draw (lo, hi]: t = 0 points belong to the initial slice only.
inline double draw_half_open(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  return hi - (hi - lo) * uni(rng);
}

template <class T>
void draw_point(std::mt19937_64& rng, const PdeProblem& p, std::vector<T>& out) {
  for (int k = 0; k < p.dim; ++k) {
    double v = (p.has_time && k == p.time_axis) ? draw_half_open(rng, p.lo[k], p.hi[k])
                                                : draw_interior(rng, p.lo[k], p.hi[k]);
    out.push_back(static_cast<T>(v));
  }
}

}  // namespace detail

/// Uniform-random point sets, fully determined by seed. Boundary points are
/// split evenly across spatial faces (remainder to the first faces, in face
/// order: coordinate-major, low face before high face).
template <class T>
TrainingSet<T> sample_training_set(const PdeProblem& p, const SampleCounts& counts,
                                   std::uint64_t seed) {
  bool has_initial = false;
  for (const auto& c : p.conditions)
    if (c.kind != ConditionKind::DirichletBoundary) has_initial = true;
  if (counts.n_initial > 0 && !p.has_time)
    throw ConfigError("sampling: initial points requested for the time-independent benchmark " +
                      p.name);
  if (has_initial && counts.n_initial <= 0)
    throw ConfigError("sampling: " + p.name + " has initial conditions, n_initial must be > 0");
  if (counts.n_boundary <= 0) throw ConfigError("sampling: n_boundary must be > 0");
  if (counts.n_residual <= 0) throw ConfigError("sampling: n_residual must be > 0");

  TrainingSet<T> ts;
  ts.dim = p.dim;
  ts.seed = seed;
  ts.counts = counts;
  std::mt19937_64 rng(seed);

  for (std::size_t ci = 0; ci < p.conditions.size(); ++ci) {
    const Condition& cond = p.conditions[ci];
    if (cond.kind == ConditionKind::DirichletBoundary) {
      std::vector<std::pair<int, double>> faces;  // (coordinate, value)
      for (int k = 0; k < p.dim; ++k) {
        if (p.has_time && k == p.time_axis) continue;
        faces.push_back({k, p.lo[k]});
        faces.push_back({k, p.hi[k]});
      }
      int per_face = counts.n_boundary / static_cast<int>(faces.size());
      int rem = counts.n_boundary % static_cast<int>(faces.size());
      for (std::size_t fi = 0; fi < faces.size(); ++fi) {
        int nf = per_face + (static_cast<int>(fi) < rem ? 1 : 0);
        for (int i = 0; i < nf; ++i) {
          for (int k = 0; k < p.dim; ++k) {
            double v;
            if (k == faces[fi].first) v = faces[fi].second;
            else if (p.has_time && k == p.time_axis)
              v = detail::draw_half_open(rng, p.lo[k], p.hi[k]);
            else v = detail::draw_interior(rng, p.lo[k], p.hi[k]);
            ts.supervised_points.push_back(static_cast<T>(v));
          }
          ts.supervised_condition.push_back(static_cast<int>(ci));
        }
      }
    } else {
      // t = 0 slice, one set of points per initial-kind condition.
      for (int i = 0; i < counts.n_initial; ++i) {
        for (int k = 0; k < p.dim; ++k) {
          double v = (k == p.time_axis) ? p.lo[k] : detail::draw_interior(rng, p.lo[k], p.hi[k]);
          ts.supervised_points.push_back(static_cast<T>(v));
        }
        ts.supervised_condition.push_back(static_cast<int>(ci));
      }
    }
  }

  for (int i = 0; i < counts.n_residual; ++i) detail::draw_point(rng, p, ts.residual_points);
  ts.group_of.assign(counts.n_residual, 0);
  ts.group_count = 1;
  return ts;
}

/// Maps each residual point to its interval of the partition; a point exactly
/// at a cut belongs to the left interval. With equalize, each group is
/// resampled to n_residual / k fresh uniform points inside its sub-box.
template <class T>
TrainingSet<T> assign_groups(TrainingSet<T> ts, const GroupingSpec& g, const PdeProblem& p,
                             bool equalize) {
  if (g.axis < 0 || g.axis >= p.dim) throw ConfigError("grouping: axis out of range");
  for (std::size_t i = 0; i < g.cut_points.size(); ++i) {
    if (g.cut_points[i] <= p.lo[g.axis] || g.cut_points[i] >= p.hi[g.axis])
      throw ConfigError("grouping: cut point outside the domain interior");
    if (i > 0 && g.cut_points[i] <= g.cut_points[i - 1])
      throw ConfigError("grouping: cut points must be strictly ascending");
  }
  const int k = static_cast<int>(g.cut_points.size()) + 1;
  ts.group_count = k;
  if (k == 1) {
    std::fill(ts.group_of.begin(), ts.group_of.end(), 0);
    return ts;
  }
  auto group_index = [&](double v) {
    for (std::size_t c = 0; c < g.cut_points.size(); ++c)
      if (v <= g.cut_points[c]) return static_cast<int>(c);
    return k - 1;
  };

  if (equalize) {
    const int per_group = static_cast<int>(ts.residual_size()) / k;
    if (per_group < 1) throw ConfigError("grouping: too few residual points to equalize");
    std::uint64_t s = derive_seed(ts.seed, 0x67726f75ULL);  // independent resampling stream
    std::mt19937_64 rng(s);
    std::vector<T> pts;
    std::vector<int> groups;
    for (int h = 0; h < k; ++h) {
      double a = h == 0 ? p.lo[g.axis] : g.cut_points[h - 1];
      double b = h == k - 1 ? p.hi[g.axis] : g.cut_points[h];
      for (int i = 0; i < per_group; ++i) {
        for (int c = 0; c < p.dim; ++c) {
          double v;
          if (c == g.axis) {
            // Closed-right interval (a, b]; the first group also owns a.
            v = h == 0 ? detail::draw_interior(rng, a, b) : detail::draw_half_open(rng, a, b);
          } else if (p.has_time && c == p.time_axis) {
            v = detail::draw_half_open(rng, p.lo[c], p.hi[c]);
          } else {
            v = detail::draw_interior(rng, p.lo[c], p.hi[c]);
          }
          pts.push_back(static_cast<T>(v));
        }
        groups.push_back(h);
      }
    }
    ts.residual_points = std::move(pts);
    ts.group_of = std::move(groups);
    ts.counts.n_residual = per_group * k;
    return ts;
  }

  std::vector<int> sizes(k, 0);
  for (std::size_t i = 0; i < ts.residual_size(); ++i) {
    int h = group_index(static_cast<double>(ts.residual_points[i * p.dim + g.axis]));
    ts.group_of[i] = h;
    sizes[h]++;
  }
  for (int h = 0; h < k; ++h)
    if (sizes[h] == 0)
      throw ConfigError("grouping: group " + std::to_string(h) +
                        " received no residual points; enable equalize or move the cuts");
  return ts;
}

struct TestGrid {
  int dim = 0;
  std::vector<int> resolution;
  std::vector<double> points;  // [n][dim], last axis fastest
  std::vector<double> exact;
};

/// Uniform tensor grid over the domain closure paired with exact values.
inline TestGrid test_grid(const PdeProblem& p, const std::vector<int>& resolution) {
  if (static_cast<int>(resolution.size()) != p.dim)
    throw ConfigError("test_grid: resolution needs one entry per input coordinate");
  for (int r : resolution)
    if (r < 2) throw ConfigError("test_grid: resolution must be >= 2 per axis");
  TestGrid g;
  g.dim = p.dim;
  g.resolution = resolution;
  std::size_t total = 1;
  for (int r : resolution) total *= static_cast<std::size_t>(r);
  g.points.reserve(total * p.dim);
  g.exact.reserve(total);
  std::vector<int> idx(p.dim, 0);
  for (std::size_t i = 0; i < total; ++i) {
    double x[2];
    for (int k = 0; k < p.dim; ++k)
      x[k] = p.lo[k] + (p.hi[k] - p.lo[k]) * idx[k] / (resolution[k] - 1);
    for (int k = 0; k < p.dim; ++k) g.points.push_back(x[k]);
    g.exact.push_back(p.exact(x));
    for (int k = p.dim - 1; k >= 0; --k) {
      if (++idx[k] < resolution[k]) break;
      idx[k] = 0;
    }
  }
  return g;
}

}  // namespace mmpinn
