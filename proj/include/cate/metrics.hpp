#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "cate/geometry.hpp"

namespace cate {

enum class Termination { Converged, Timeout, SafetyBreach, SolverFailure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::Timeout: return "timeout";
    case Termination::SafetyBreach: return "safety-breach";
    case Termination::SolverFailure: return "solver-failure";
  }
  return "?";
}

inline const char* to_string(Controller c) {
  switch (c) {
    case Controller::CATE: return "CATE";
    case Controller::FOTE: return "FOTE";
    case Controller::CAPT_ASSIGN: return "CAPT_ASSIGN";
    case Controller::GREEDY: return "GREEDY";
  }
  return "?";
}

struct SimulationRecord {
  double dt = 0.02;
  int dimension = 2;
  std::vector<double> times;                       // step times, length T
  std::vector<std::vector<Vec>> positions;         // [robot][step]
  std::vector<std::vector<int>> allocations;       // [robot][step]
  std::vector<std::vector<Vec>> desired_points;    // [point][step]
  std::vector<std::vector<Vec>> obstacle_centers;  // [obstacle][step]
  std::vector<double> obstacle_radii;
  Controller controller = Controller::CATE;
  std::uint64_t seed = 0;
  Termination termination = Termination::Timeout;

  int robot_count() const { return static_cast<int>(positions.size()); }
  int step_count() const { return static_cast<int>(times.size()); }
};

namespace metrics_detail {

constexpr double kDedupRadius = 1e-6;

// Result of intersecting two segments: nothing, a point, or a collinear
// overlap interval.
struct SegEvent {
  enum Kind { None, Point, Interval } kind = None;
  Vec p;       // point
  Vec a, b;    // interval endpoints
};

inline double cross2(const Vec& u, const Vec& v) { return u[0] * v[1] - u[1] * v[0]; }

// Closest-approach classification, valid in 2D and 3D.
inline SegEvent intersect_segments(const Vec& p1, const Vec& p2, const Vec& q1,
                                   const Vec& q2) {
  SegEvent ev;
  const Vec d1 = p2 - p1, d2 = q2 - q1, w = p1 - q1;
  const double a = dot(d1, d1), e = dot(d2, d2);
  const double touch_tol = 1e-9;

  auto clamp01 = [](double x) { return std::min(1.0, std::max(0.0, x)); };

  if (a <= 1e-24 && e <= 1e-24) {  // both degenerate points
    if (distance(p1, q1) <= touch_tol) {
      ev.kind = SegEvent::Point;
      ev.p = p1;
    }
    return ev;
  }

  const double b = dot(d1, d2), c = dot(d1, w), f = dot(d2, w);
  const double denom = a * e - b * b;
  const double parallel_tol = 1e-12 * a * e;

  if (denom > parallel_tol) {
    double s = clamp01((b * f - c * e) / denom);
    double t = clamp01((b * s + f) / e);
    s = e > 1e-24 ? s : 0.0;
    // refine s for the clamped t
    if (a > 1e-24) s = clamp01((b * t - c) / a);
    if (e > 1e-24) t = clamp01((b * s + f) / e);
    Vec cp = p1 + s * d1, cq = q1 + t * d2;
    if (distance(cp, cq) <= touch_tol) {
      ev.kind = SegEvent::Point;
      ev.p = 0.5 * (cp + cq);
    }
    return ev;
  }

  // Parallel (or one side degenerate): check the line distance.
  Vec dir = a > e ? d1 : d2;
  double len2 = std::max(a, e);
  if (len2 <= 1e-24) return ev;
  Vec off = w - (dot(w, dir) / len2) * dir;
  if (norm(off) > touch_tol) return ev;  // distinct parallel lines

  // Collinear: overlap of parameter intervals along dir, measured from p1.
  double lo_p = 0.0, hi_p = dot(d1, dir) / std::sqrt(len2);
  if (lo_p > hi_p) std::swap(lo_p, hi_p);
  double tq1 = dot(q1 - p1, dir) / std::sqrt(len2);
  double tq2 = dot(q2 - p1, dir) / std::sqrt(len2);
  double lo_q = std::min(tq1, tq2), hi_q = std::max(tq1, tq2);
  double lo = std::max(lo_p, lo_q), hi = std::min(hi_p, hi_q);
  if (hi < lo - touch_tol) return ev;
  Vec unit = dir * (1.0 / std::sqrt(len2));
  if (hi - lo <= touch_tol) {
    ev.kind = SegEvent::Point;
    ev.p = p1 + (0.5 * (lo + hi)) * unit;
    return ev;
  }
  ev.kind = SegEvent::Interval;
  ev.a = p1 + lo * unit;
  ev.b = p1 + hi * unit;
  return ev;
}

struct RunList {
  std::vector<std::pair<Vec, Vec>> runs;

  static bool same_line(const std::pair<Vec, Vec>& r, const Vec& a, const Vec& b) {
    Vec dir = r.second - r.first;
    double len = norm(dir);
    if (len < 1e-12) return false;
    dir *= 1.0 / len;
    auto off_line = [&](const Vec& x) {
      Vec d = x - r.first;
      return norm(d - dot(d, dir) * dir);
    };
    return off_line(a) <= 10 * kDedupRadius && off_line(b) <= 10 * kDedupRadius;
  }

  void add(Vec a, Vec b) {
    // Merge with any run on the same line whose extent touches [a,b].
    bool merged = true;
    while (merged) {
      merged = false;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        if (!same_line(runs[i], a, b)) continue;
        Vec dir = runs[i].second - runs[i].first;
        double len = norm(dir);
        dir *= 1.0 / len;
        double lo_r = 0.0, hi_r = len;
        double ta = dot(a - runs[i].first, dir), tb = dot(b - runs[i].first, dir);
        double lo_n = std::min(ta, tb), hi_n = std::max(ta, tb);
        if (hi_n < lo_r - kDedupRadius || lo_n > hi_r + kDedupRadius) continue;
        double lo = std::min(lo_r, lo_n), hi = std::max(hi_r, hi_n);
        Vec base = runs[i].first;
        a = base + lo * dir;
        b = base + hi * dir;
        runs.erase(runs.begin() + static_cast<long>(i));
        merged = true;
        break;
      }
    }
    runs.push_back({a, b});
  }

  bool contains(const Vec& p) const {
    for (const auto& r : runs) {
      Vec dir = r.second - r.first;
      double len = norm(dir);
      if (len < 1e-12) continue;
      dir *= 1.0 / len;
      double t = dot(p - r.first, dir);
      if (t < -kDedupRadius || t > len + kDedupRadius) continue;
      Vec proj = r.first + t * dir;
      if (distance(proj, p) <= kDedupRadius) return true;
    }
    return false;
  }
};

// Shared counting convention: collinear overlaps merge into maximal runs
// (one crossing each); isolated points are deduplicated within 1e-6 and
// against the runs.
struct PairCounter {
  RunList runs;
  std::vector<Vec> points;

  void add_event(const SegEvent& ev) {
    if (ev.kind == SegEvent::Interval) runs.add(ev.a, ev.b);
    else if (ev.kind == SegEvent::Point) points.push_back(ev.p);
  }

  long count() const {
    std::vector<Vec> accepted;
    for (const auto& p : points) {
      if (runs.contains(p)) continue;
      bool dup = false;
      for (const auto& q : accepted)
        if (distance(p, q) <= kDedupRadius) {
          dup = true;
          break;
        }
      if (!dup) accepted.push_back(p);
    }
    return static_cast<long>(accepted.size() + runs.runs.size());
  }
};

struct GridKey {
  long x = 0, y = 0, z = 0;
  bool operator<(const GridKey& o) const {
    if (x != o.x) return x < o.x;
    if (y != o.y) return y < o.y;
    return z < o.z;
  }
};

}  // namespace metrics_detail

// Number of spatial crossing points between the piecewise-linear paths of
// distinct robots (times may differ). Grid broad phase, exact narrow phase.
// Steps after `horizon` (when given) are ignored.
inline long count_path_crossings(
    const SimulationRecord& record,
    std::optional<double> horizon = std::nullopt) {
  using namespace metrics_detail;
  const int N = record.robot_count();
  const int T = record.step_count();
  if (T < 2 || N < 1) return 0;

  int last = T - 1;
  if (horizon) {
    last = 0;
    while (last + 1 < T && record.times[static_cast<std::size_t>(last + 1)] <= *horizon + 1e-12)
      ++last;
  }
  if (last < 1) return 0;

  // Cell size from the longest segment so each segment touches few cells.
  double max_len = 1e-3;
  for (int i = 0; i < N; ++i)
    for (int s = 0; s < last; ++s)
      max_len = std::max(max_len, distance(record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)],
                                           record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s + 1)]));
  const double cell = max_len * 1.0001;

  std::map<GridKey, std::vector<std::pair<int, int>>> grid;
  auto key_of = [&](const Vec& p) {
    GridKey k;
    k.x = static_cast<long>(std::floor(p[0] / cell));
    k.y = static_cast<long>(std::floor(p[1] / cell));
    k.z = p.n == 3 ? static_cast<long>(std::floor(p[2] / cell)) : 0;
    return k;
  };
  auto cells_of = [&](const Vec& a, const Vec& b, auto&& fn) {
    GridKey ka = key_of(a), kb = key_of(b);
    for (long x = std::min(ka.x, kb.x); x <= std::max(ka.x, kb.x); ++x)
      for (long y = std::min(ka.y, kb.y); y <= std::max(ka.y, kb.y); ++y)
        for (long z = std::min(ka.z, kb.z); z <= std::max(ka.z, kb.z); ++z)
          fn(GridKey{x, y, z});
  };

  for (int i = 0; i < N; ++i)
    for (int s = 0; s < last; ++s)
      cells_of(record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)],
               record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s + 1)],
               [&](GridKey k) { grid[k].push_back({i, s}); });

  // Candidate segment pairs per robot pair, from shared and adjacent cells.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> candidates;
  for (int i = 0; i < N; ++i)
    for (int s = 0; s < last; ++s) {
      const Vec& a = record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
      const Vec& b = record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s + 1)];
      GridKey ka = key_of(a), kb = key_of(b);
      long zlo = std::min(ka.z, kb.z) - 1, zhi = std::max(ka.z, kb.z) + 1;
      if (record.dimension == 2) zlo = zhi = 0;
      for (long x = std::min(ka.x, kb.x) - 1; x <= std::max(ka.x, kb.x) + 1; ++x)
        for (long y = std::min(ka.y, kb.y) - 1; y <= std::max(ka.y, kb.y) + 1; ++y)
          for (long z = zlo; z <= zhi; ++z) {
            auto it = grid.find(GridKey{x, y, z});
            if (it == grid.end()) continue;
            for (const auto& [j, t] : it->second)
              if (j > i) candidates[{i, j}].push_back({s, t});
          }
    }

  long total = 0;
  for (auto& [pair_ids, segs] : candidates) {
    std::sort(segs.begin(), segs.end());
    segs.erase(std::unique(segs.begin(), segs.end()), segs.end());
    metrics_detail::PairCounter counter;
    const auto& pi = record.positions[static_cast<std::size_t>(pair_ids.first)];
    const auto& pj = record.positions[static_cast<std::size_t>(pair_ids.second)];
    for (const auto& [s, t] : segs) {
      auto ev = metrics_detail::intersect_segments(
          pi[static_cast<std::size_t>(s)], pi[static_cast<std::size_t>(s + 1)],
          pj[static_cast<std::size_t>(t)], pj[static_cast<std::size_t>(t + 1)]);
      counter.add_event(ev);
    }
    total += counter.count();
  }
  return total;
}

// Sum of piecewise-linear path lengths, truncated at the horizon (e.g. the
// convergence time) when given.
inline double trajectory_length(const SimulationRecord& record,
                                std::optional<double> horizon = std::nullopt) {
  double sum = 0.0;
  const int T = record.step_count();
  for (int i = 0; i < record.robot_count(); ++i)
    for (int s = 0; s + 1 < T; ++s) {
      if (horizon && record.times[static_cast<std::size_t>(s + 1)] > *horizon + 1e-12) break;
      sum += distance(record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)],
                      record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s + 1)]);
    }
  return sum;
}

// First instant when every robot is within rho of its currently allocated
// desired point.
inline std::optional<double> convergence_time(const SimulationRecord& record,
                                              double rho) {
  for (int s = 0; s < record.step_count(); ++s) {
    bool all_in = true;
    for (int i = 0; i < record.robot_count() && all_in; ++i) {
      int k = record.allocations[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
      double d = distance(record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)],
                          record.desired_points[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)]);
      if (d > rho) all_in = false;
    }
    if (all_in) return record.times[static_cast<std::size_t>(s)];
  }
  return std::nullopt;
}

struct SafetyMargins {
  double min_robot_robot = std::numeric_limits<double>::infinity();
  double min_obstacle_clearance = std::numeric_limits<double>::infinity();
};

// Global minima over all steps: raw inter-robot distance and obstacle
// clearance ||x - c|| - (r + r_o).
inline SafetyMargins safety_margins(const SimulationRecord& record,
                                    double safe_radius) {
  SafetyMargins m;
  const int N = record.robot_count();
  for (int s = 0; s < record.step_count(); ++s) {
    for (int i = 0; i < N; ++i) {
      const Vec& xi = record.positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
      for (int j = i + 1; j < N; ++j)
        m.min_robot_robot = std::min(
            m.min_robot_robot,
            distance(xi, record.positions[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)]));
      for (std::size_t l = 0; l < record.obstacle_centers.size(); ++l)
        m.min_obstacle_clearance = std::min(
            m.min_obstacle_clearance,
            distance(xi, record.obstacle_centers[l][static_cast<std::size_t>(s)]) -
                (safe_radius + record.obstacle_radii[l]));
    }
  }
  return m;
}

struct MetricsReport {
  long crossings = 0;
  double trajectory_length = 0.0;
  std::optional<double> convergence_time;
  bool success = false;
  double min_robot_robot = std::numeric_limits<double>::infinity();
  double min_obstacle_clearance = std::numeric_limits<double>::infinity();
  long allocation_changes_after_tr = 0;
};

struct MetricsOptions {
  double rho = 0.2;
  double safe_radius = 1.0;
  // Table-style reproduction truncates crossings at the convergence time;
  // the spatial definition counts the whole record.
  bool truncate_crossings_at_tr = false;
};

inline long allocation_changes_after(const SimulationRecord& record, double t0) {
  long changes = 0;
  for (int s = 1; s < record.step_count(); ++s) {
    if (record.times[static_cast<std::size_t>(s)] <= t0 + 1e-12) continue;
    for (int i = 0; i < record.robot_count(); ++i)
      if (record.allocations[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)] !=
          record.allocations[static_cast<std::size_t>(i)][static_cast<std::size_t>(s - 1)])
        ++changes;
  }
  return changes;
}

inline MetricsReport compute_metrics(const SimulationRecord& record,
                                     const MetricsOptions& opt) {
  MetricsReport r;
  r.convergence_time = convergence_time(record, opt.rho);
  r.success = record.termination == Termination::Converged;
  std::optional<double> horizon =
      r.convergence_time.has_value() ? r.convergence_time : std::nullopt;
  r.trajectory_length = trajectory_length(record, horizon);
  r.crossings = count_path_crossings(
      record, opt.truncate_crossings_at_tr ? horizon : std::nullopt);
  SafetyMargins m = safety_margins(record, opt.safe_radius);
  r.min_robot_robot = m.min_robot_robot;
  r.min_obstacle_clearance = m.min_obstacle_clearance;
  if (r.convergence_time)
    r.allocation_changes_after_tr = allocation_changes_after(record, *r.convergence_time);
  return r;
}

}  // namespace cate
