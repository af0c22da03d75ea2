#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "town/geometry.hpp"
#include "town/rng.hpp"
#include "town/util.hpp"

namespace town {

using BoundaryData = std::function<double(const Vec&)>;

/// Tug-of-war with noise on the ball of radius `domain_radius`. The mover
/// picks |v| <= eps and the noise is uniform on the radius R*eps sphere
/// orthogonal to v, with R = sqrt((d-1)/(p-1)).
struct GameConfig {
  double p = 2.0;
  int d = 2;
  double eps = 0.1;
  double noise_radius = 1.0;  // R
  double domain_radius = 1.0;
  BoundaryData boundary;
  std::uint64_t seed = 0;
  long max_steps = 10'000'000;
  int n_arc = 64;  // quadrature points per terminal-arc dimension

  double terminal_margin() const { return (noise_radius + 1.0) * eps; }
};

inline double noise_radius_for(double p, int d) {
  return std::sqrt(static_cast<double>(d - 1) / (p - 1.0));
}

inline GameConfig make_config(double p, int d, double eps, BoundaryData boundary,
                              std::uint64_t seed = 0, double domain_radius = 1.0) {
  if (p <= 1.0) throw std::invalid_argument("p must exceed 1");
  if (d < 2) throw std::invalid_argument("d must be >= 2");
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  GameConfig cfg;
  cfg.p = p;
  cfg.d = d;
  cfg.eps = eps;
  cfg.noise_radius = noise_radius_for(p, d);
  cfg.domain_radius = domain_radius;
  cfg.boundary = std::move(boundary);
  cfg.seed = seed;
  const double r2 = cfg.noise_radius * cfg.noise_radius;
  if (std::abs(r2 * (p - 1.0) - (d - 1)) > 1e-12 * std::max(1.0, double(d - 1)))
    throw std::logic_error("noise radius inconsistent");
  if (cfg.terminal_margin() >= domain_radius)
    throw std::invalid_argument("(R+1)*eps must be smaller than the domain radius");
  return cfg;
}

struct GameState {
  Vec x;
  long n = 0;
  bool terminal = false;
  std::optional<double> payoff;
};

/// True iff B(x, (R+1)eps) meets the boundary sphere (open-ball convention).
inline bool is_terminal(const Vec& x, const GameConfig& cfg) {
  return x.norm() > cfg.domain_radius - cfg.terminal_margin();
}

/// Quadrature points of the spherical cap B(x,(R+1)eps) ∩ ∂B_radius.
/// d = 2 uses an inclusive arc grid, d = 3 a polar-azimuth product grid.
inline std::vector<Vec> terminal_cap_points(const Vec& x, const GameConfig& cfg) {
  if (!is_terminal(x, cfg)) throw std::invalid_argument("cap query at non-terminal state");
  const double rad = cfg.domain_radius;
  const double rho = cfg.terminal_margin();
  const double xn = x.norm();
  // cos(angle between x̂ and cap boundary direction)
  const double c = (rad * rad + xn * xn - rho * rho) / (2.0 * rad * xn);
  const double alpha = std::acos(std::clamp(c, -1.0, 1.0));
  std::vector<Vec> pts;
  if (cfg.d == 2) {
    const double phi0 = std::atan2(x[1], x[0]);
    const int n = std::max(cfg.n_arc, 2);
    pts.reserve(n + 1);
    for (int k = 0; k <= n; ++k) {
      const double phi = phi0 - alpha + 2.0 * alpha * k / n;
      Vec y(2);
      y << rad * std::cos(phi), rad * std::sin(phi);
      pts.push_back(std::move(y));
    }
    return pts;
  }
  if (cfg.d == 3) {
    const Vec xh = unit(x);
    const Vec u = any_orthonormal(xh);
    Vec w(3);
    w << xh[1] * u[2] - xh[2] * u[1], xh[2] * u[0] - xh[0] * u[2],
        xh[0] * u[1] - xh[1] * u[0];
    const int np = std::max(cfg.n_arc / 4, 4);
    const int na = std::max(cfg.n_arc / 2, 8);
    pts.push_back(rad * xh);
    for (int i = 1; i <= np; ++i) {
      const double s = alpha * i / np;
      for (int j = 0; j < na; ++j) {
        const double t = 2.0 * kPi * j / na;
        pts.push_back(rad * (std::cos(s) * xh +
                             std::sin(s) * (std::cos(t) * u + std::sin(t) * w)));
      }
    }
    return pts;
  }
  throw std::invalid_argument("terminal cap quadrature supports d = 2 or 3");
}

/// (inf, sup) of the boundary data over the terminal cap at x.
inline std::pair<double, double> terminal_arc_extremes(const Vec& x, const GameConfig& cfg) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec& y : terminal_cap_points(x, cfg)) {
    const double f = cfg.boundary(y);
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  return {lo, hi};
}

enum class Player { one, two };  // player one maximizes

struct Strategy {
  virtual ~Strategy() = default;
  /// Interior move with |move| <= eps.
  virtual Vec move(const GameState& st, const GameConfig& cfg, RngStream& rng) const = 0;
  /// Boundary choice at a terminal-adjacent state: cap argmax for the
  /// maximizer, argmin for the minimizer.
  virtual Vec pick_boundary(const GameState& st, const GameConfig& cfg, Player role) const {
    const auto pts = terminal_cap_points(st.x, cfg);
    std::size_t best = 0;
    double bestf = cfg.boundary(pts[0]);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double f = cfg.boundary(pts[i]);
      const bool better = (role == Player::one) ? f > bestf : f < bestf;
      if (better) {
        best = i;
        bestf = f;
      }
    }
    return pts[best];
  }
};

struct NullMove final : Strategy {
  Vec move(const GameState& st, const GameConfig&, RngStream&) const override {
    return Vec::Zero(st.x.size());
  }
};

struct PullToward final : Strategy {
  Vec target;
  explicit PullToward(Vec t) : target(std::move(t)) {}
  Vec move(const GameState& st, const GameConfig& cfg, RngStream&) const override {
    Vec dir = target - st.x;
    const double n = dir.norm();
    if (n <= 1e-15) return Vec::Zero(st.x.size());
    return (cfg.eps / n) * dir;
  }
};

struct PullOutward final : Strategy {
  Vec move(const GameState& st, const GameConfig& cfg, RngStream& rng) const override {
    const double n = st.x.norm();
    if (n <= 1e-15) {
      Vec g(st.x.size());
      for (int i = 0; i < g.size(); ++i) g[i] = rng.normal();
      return cfg.eps * unit(g);
    }
    return (cfg.eps / n) * st.x;
  }
};

struct RandomDirection final : Strategy {
  Vec move(const GameState& st, const GameConfig& cfg, RngStream& rng) const override {
    Vec g(st.x.size());
    for (;;) {
      for (int i = 0; i < g.size(); ++i) g[i] = rng.normal();
      const double n = g.norm();
      if (n > 1e-12) return (cfg.eps / n) * g;
    }
  }
};

/// One game step: x -> x + v + w with w uniform on the radius R*eps sphere
/// in v⊥. A zero move draws the noise orthogonal to a random direction.
inline GameState step(const GameState& st, const Vec& mover_move, const GameConfig& cfg,
                      RngStream& rng) {
  if (st.terminal) throw std::logic_error("step on terminal state");
  if (mover_move.norm() > cfg.eps * (1.0 + 1e-12)) throw std::invalid_argument("illegal move");
  Vec axis = mover_move;
  if (axis.norm() <= 0.0) {
    axis.resize(cfg.d);
    for (;;) {
      for (int i = 0; i < cfg.d; ++i) axis[i] = rng.normal();
      if (axis.norm() > 1e-12) break;
    }
  }
  const Vec w = sample_orthogonal_sphere(axis, cfg.noise_radius * cfg.eps, rng);
  GameState next;
  next.x = st.x + mover_move + w;
  next.n = st.n + 1;
  next.terminal = false;
  return next;
}

struct Trace {
  std::vector<Vec> positions;
  std::vector<int> coins;
  double payoff = 0.0;
  long steps = 0;
};

/// Play one full game. Each round tosses a fair coin; at a terminal-adjacent
/// state the winner picks the boundary point, otherwise the winner moves.
inline Trace run_game(const Strategy& s1, const Strategy& s2, const Vec& x0,
                      const GameConfig& cfg, RngStream& rng, bool record = true) {
  if (x0.norm() > cfg.domain_radius - cfg.terminal_margin() + 1e-12)
    throw std::invalid_argument("start must be interior to the terminal margin");
  GameState st;
  st.x = x0;
  Trace tr;
  if (record) tr.positions.push_back(st.x);
  while (st.n < cfg.max_steps) {
    const bool heads = rng.coin();
    if (record) tr.coins.push_back(heads ? 1 : 0);
    if (is_terminal(st.x, cfg)) {
      const Vec y = heads ? s1.pick_boundary(st, cfg, Player::one)
                          : s2.pick_boundary(st, cfg, Player::two);
      tr.payoff = cfg.boundary(y);
      tr.steps = st.n + 1;
      if (record) tr.positions.push_back(y);
      return tr;
    }
    const Vec v = heads ? s1.move(st, cfg, rng) : s2.move(st, cfg, rng);
    st = step(st, v, cfg, rng);
    if (record) tr.positions.push_back(st.x);
  }
  throw std::runtime_error("non-termination suspected");
}

/// Trace CSV: step, x_1..x_d, coin (coin = -1 marks rows without a toss).
inline void write_trace_csv(std::ostream& os, const Trace& tr, std::uint64_t config_hash,
                            int rollout_id = 0) {
  const int d = tr.positions.empty() ? 0 : static_cast<int>(tr.positions.front().size());
  os << "# " << kVersion << " config=" << hex64(config_hash) << "\n";
  os << "rollout,step";
  for (int i = 1; i <= d; ++i) os << ",x_" << i;
  os << ",coin\n";
  for (std::size_t k = 0; k < tr.positions.size(); ++k) {
    os << rollout_id << "," << k;
    for (int i = 0; i < d; ++i) os << "," << tr.positions[k][i];
    os << "," << (k < tr.coins.size() ? std::to_string(tr.coins[k]) : std::string("-1"));
    os << "\n";
  }
}

// Named boundary data for the CLI and experiment batteries (d = 2 unless
// the function depends only on coordinates present in higher d).
inline BoundaryData named_boundary(const std::string& name) {
  if (name == "const1") return [](const Vec&) { return 1.0; };
  if (name == "cos") return [](const Vec& y) { return y[0] / y.norm(); };
  if (name == "sin") return [](const Vec& y) { return y[1] / y.norm(); };
  if (name == "affine") return [](const Vec& y) { return 0.5 * y[0] + 0.25 * y[1] + 1.0; };
  if (name == "cos2")
    return [](const Vec& y) {
      const double n2 = y.squaredNorm();
      return (y[0] * y[0] - y[1] * y[1]) / n2;
    };
  if (name == "pos-cos") return [](const Vec& y) { return 2.0 + y[0] / y.norm(); };
  if (name == "exp-cos") return [](const Vec& y) { return std::exp(y[0] / y.norm()); };
  throw std::invalid_argument("unknown boundary name: " + name);
}

}  // namespace town
