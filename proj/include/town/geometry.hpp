#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "town/rng.hpp"

namespace town {

using Vec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kGeomEps = 1e-12;

inline Vec unit(const Vec& v) {
  const double n = v.norm();
  if (n <= 0.0) throw std::invalid_argument("degenerate direction");
  return v / n;
}

inline Eigen::Vector2d perp(const Eigen::Vector2d& v) {
  return Eigen::Vector2d(-v.y(), v.x());
}

/// Deterministic unit vector orthogonal to v (any d >= 2).
inline Vec any_orthonormal(const Vec& v) {
  const Vec vh = unit(v);
  const int d = static_cast<int>(v.size());
  if (d == 2) return Vec(perp(Eigen::Vector2d(vh[0], vh[1])));
  int k = 0;
  for (int i = 1; i < d; ++i)
    if (std::abs(vh[i]) < std::abs(vh[k])) k = i;
  Vec e = Vec::Zero(d);
  e[k] = 1.0;
  Vec w = e - vh[k] * vh;
  return w / w.norm();
}

/// Uniform sample on the sphere of the given radius inside the hyperplane
/// orthogonal to v. For d = 2 that sphere is the two-point set {±r v̂⊥}.
inline Vec sample_orthogonal_sphere(const Vec& v, double radius, RngStream& rng) {
  const int d = static_cast<int>(v.size());
  if (d < 2) throw std::invalid_argument("dimension must be >= 2");
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  const double vn = v.norm();
  if (vn <= 0.0) throw std::invalid_argument("degenerate direction");
  if (d == 2) {
    Eigen::Vector2d p = perp(Eigen::Vector2d(v[0] / vn, v[1] / vn));
    return Vec((rng.coin() ? radius : -radius) * p);
  }
  // Isotropic Gaussian projected onto v⊥ is isotropic there; normalize.
  Vec g(d);
  for (;;) {
    for (int i = 0; i < d; ++i) g[i] = rng.normal();
    g -= (g.dot(v) / (vn * vn)) * v;
    const double n = g.norm();
    if (n > 1e-12) return (radius / n) * g;
  }
}

/// Rotation acting in the oriented plane span{e,f}; identity on the
/// orthogonal complement, so (S - I) has rank <= 2.
struct PlaneRotation {
  Vec e;
  Vec f;
  double angle = 0.0;

  Vec apply(const Vec& x) const { return apply_angle(x, angle); }
  Vec apply_inverse(const Vec& x) const { return apply_angle(x, -angle); }

  Vec apply_angle(const Vec& x, double theta) const {
    if (theta == 0.0) return x;
    const double a = e.dot(x);
    const double b = f.dot(x);
    const double c = std::cos(theta), s = std::sin(theta);
    return x + (a * (c - 1.0) - b * s) * e + (a * s + b * (c - 1.0)) * f;
  }
};

/// Minimal rotation taking span{from} to span{to} (lines, not rays), fixing
/// span{from,to}⊥. The angle lies in [0, π/2] by the line convention.
inline PlaneRotation plane_rotation_span_to_span(const Vec& from, const Vec& to) {
  Vec u = unit(from);
  Vec t = unit(to);
  if (u.dot(t) < 0.0) t = -t;  // same line, pick the nearer ray
  const double c = std::min(1.0, u.dot(t));
  PlaneRotation rot;
  rot.e = u;
  if (c >= 1.0 - 1e-15) {
    rot.f = any_orthonormal(u);
    rot.angle = 0.0;
    return rot;
  }
  Vec w = t - c * u;
  rot.f = w / w.norm();
  rot.angle = std::acos(c);
  return rot;
}

// ---------------------------------------------------------------------------
// Planar polylines: winding numbers, self-intersection, surrounding loops.
// ---------------------------------------------------------------------------

struct Polyline {
  std::vector<Eigen::Vector2d> vertices;
  bool closed = false;

  std::size_t segment_count() const {
    if (vertices.size() < 2) return 0;
    return closed ? vertices.size() : vertices.size() - 1;
  }
  Eigen::Vector2d seg_a(std::size_t i) const { return vertices[i]; }
  Eigen::Vector2d seg_b(std::size_t i) const {
    return vertices[(i + 1) % vertices.size()];
  }
};

inline double point_segment_distance(const Eigen::Vector2d& p,
                                     const Eigen::Vector2d& a,
                                     const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

/// Signed winding number of a closed polyline about `center`, by summed
/// signed angles. Throws if the center lies on the polyline.
inline int winding_number(const Polyline& poly, const Eigen::Vector2d& center) {
  if (!poly.closed) throw std::invalid_argument("winding number needs a closed polyline");
  if (poly.vertices.size() < 3) throw std::invalid_argument("degenerate polyline");
  double total = 0.0;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d a = poly.vertices[i] - center;
    const Eigen::Vector2d b = poly.vertices[(i + 1) % n] - center;
    if (point_segment_distance(center, poly.vertices[i], poly.vertices[(i + 1) % n]) <= kGeomEps)
      throw std::invalid_argument("degenerate query");
    total += std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

/// Segment-segment intersection with tolerance kGeomEps; near-tangency counts.
/// On hit returns a representative intersection point.
inline bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                               const Eigen::Vector2d& q1, const Eigen::Vector2d& q2,
                               Eigen::Vector2d& out) {
  const Eigen::Vector2d r = p2 - p1;
  const Eigen::Vector2d s = q2 - q1;
  const double rxs = r.x() * s.y() - r.y() * s.x();
  const Eigen::Vector2d qp = q1 - p1;
  const double scale = std::max({r.norm(), s.norm(), 1.0});
  if (std::abs(rxs) > kGeomEps * scale * scale) {
    const double t = (qp.x() * s.y() - qp.y() * s.x()) / rxs;
    const double u = (qp.x() * r.y() - qp.y() * r.x()) / rxs;
    const double tol = kGeomEps / scale;
    if (t >= -tol && t <= 1.0 + tol && u >= -tol && u <= 1.0 + tol) {
      out = p1 + std::clamp(t, 0.0, 1.0) * r;
      return true;
    }
    return false;
  }
  // Parallel: treat as intersecting when they overlap within tolerance.
  const double cross = qp.x() * r.y() - qp.y() * r.x();
  if (std::abs(cross) > kGeomEps * scale * scale) return false;
  const double rr = r.squaredNorm();
  if (rr <= 0.0) {
    if ((q1 - p1).norm() <= kGeomEps) { out = p1; return true; }
    return false;
  }
  double t0 = (q1 - p1).dot(r) / rr;
  double t1 = (q2 - p1).dot(r) / rr;
  if (t0 > t1) std::swap(t0, t1);
  const double lo = std::max(t0, 0.0), hi = std::min(t1, 1.0);
  if (lo <= hi + kGeomEps) {
    out = p1 + std::clamp(0.5 * (lo + hi), 0.0, 1.0) * r;
    return true;
  }
  return false;
}

namespace detail {

/// Range-minimum structure over per-segment distances to the origin.
class SegmentDistTable {
 public:
  explicit SegmentDistTable(const std::vector<double>& d) {
    const std::size_t n = d.size();
    log_.assign(n + 1, 0);
    for (std::size_t i = 2; i <= n; ++i) log_[i] = log_[i / 2] + 1;
    table_.push_back(d);
    for (std::size_t k = 1; (1u << k) <= n; ++k) {
      const std::size_t len = 1u << k;
      std::vector<double> row(n - len + 1);
      for (std::size_t i = 0; i + len <= n; ++i)
        row[i] = std::min(table_[k - 1][i], table_[k - 1][i + len / 2]);
      table_.push_back(std::move(row));
    }
  }
  // min over segment indices [lo, hi]; +inf when empty
  double min(std::size_t lo, std::size_t hi) const {
    if (lo > hi) return std::numeric_limits<double>::infinity();
    const std::size_t k = log_[hi - lo + 1];
    return std::min(table_[k][lo], table_[k][hi + 1 - (1u << k)]);
  }

 private:
  std::vector<std::size_t> log_;
  std::vector<std::vector<double>> table_;
};

inline double sweep_angle(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  if (a.norm() <= kGeomEps || b.norm() <= kGeomEps) return 0.0;
  return std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
}

}  // namespace detail

/// Scan an open trajectory for a closed sub-loop (cut at a self-intersection)
/// that stays at distance > r from the origin and winds at least once around
/// it. Returns the loop, or nullopt. Candidate pairs come from a uniform
/// spatial hash, so the scan is near-linear for game trajectories.
inline std::optional<Polyline> extract_surrounding_loop(const Polyline& traj, double r) {
  if (r <= 0.0) throw std::invalid_argument("r must be positive");
  const std::size_t nseg = traj.segment_count();
  if (traj.closed || nseg < 3) return std::nullopt;
  const auto& v = traj.vertices;

  std::vector<double> segdist(nseg);
  std::vector<double> prefix_angle(nseg + 1, 0.0);
  double cell = 0.0;
  for (std::size_t i = 0; i < nseg; ++i) {
    segdist[i] = point_segment_distance(Eigen::Vector2d::Zero(), v[i], v[i + 1]);
    prefix_angle[i + 1] = prefix_angle[i] + detail::sweep_angle(v[i], v[i + 1]);
    cell = std::max(cell, (v[i + 1] - v[i]).norm());
  }
  if (cell <= 0.0) return std::nullopt;
  detail::SegmentDistTable disttab(segdist);

  // Spatial hash of segment bounding boxes.
  const double inv = 1.0 / cell;
  auto cell_key = [&](int cx, int cy) {
    return (static_cast<std::int64_t>(cx) << 32) ^ (static_cast<std::uint32_t>(cy));
  };
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid;
  grid.reserve(2 * nseg);
  auto for_cells = [&](std::size_t i, auto&& fn) {
    const Eigen::Vector2d a = v[i], b = v[i + 1];
    const int x0 = static_cast<int>(std::floor(std::min(a.x(), b.x()) * inv));
    const int x1 = static_cast<int>(std::floor(std::max(a.x(), b.x()) * inv));
    const int y0 = static_cast<int>(std::floor(std::min(a.y(), b.y()) * inv));
    const int y1 = static_cast<int>(std::floor(std::max(a.y(), b.y()) * inv));
    for (int cx = x0; cx <= x1; ++cx)
      for (int cy = y0; cy <= y1; ++cy) fn(cell_key(cx, cy));
  };

  std::vector<std::uint32_t> cand;
  for (std::size_t j = 0; j < nseg; ++j) {
    cand.clear();
    for_cells(j, [&](std::int64_t key) {
      auto it = grid.find(key);
      if (it == grid.end()) return;
      for (std::uint32_t i : it->second) cand.push_back(i);
    });
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (std::uint32_t i : cand) {
      if (i + 1 >= j) continue;  // adjacent segments share a vertex
      Eigen::Vector2d q;
      if (!segments_intersect(v[i], v[i + 1], v[j], v[j + 1], q)) continue;
      // Loop: q -> v[i+1] -> ... -> v[j] -> q.
      if (q.norm() <= r) continue;
      if (disttab.min(i + 1, j - 1) <= r) continue;
      if (point_segment_distance(Eigen::Vector2d::Zero(), q, v[i + 1]) <= r) continue;
      if (point_segment_distance(Eigen::Vector2d::Zero(), v[j], q) <= r) continue;
      const double total = detail::sweep_angle(q, v[i + 1]) +
                           (prefix_angle[j] - prefix_angle[i + 1]) +
                           detail::sweep_angle(v[j], q);
      const int w = static_cast<int>(std::lround(total / (2.0 * kPi)));
      if (std::abs(w) < 1) continue;
      Polyline loop;
      loop.closed = true;
      loop.vertices.push_back(q);
      for (std::size_t k = i + 1; k <= j; ++k) {
        if ((v[k] - loop.vertices.back()).norm() > kGeomEps) loop.vertices.push_back(v[k]);
      }
      if ((loop.vertices.back() - q).norm() <= kGeomEps) loop.vertices.pop_back();
      if (loop.vertices.size() < 3) continue;
      if (std::abs(winding_number(loop, Eigen::Vector2d::Zero())) < 1) continue;
      return loop;
    }
    for_cells(j, [&](std::int64_t key) { grid[key].push_back(static_cast<std::uint32_t>(j)); });
  }
  return std::nullopt;
}

}  // namespace town
