#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "town/geometry.hpp"
#include "town/util.hpp"

namespace town {

/// Scalar field on the lattice h·Z^d restricted to the closed ball of the
/// given radius (d = 2 or 3). Storage is a dense row-major box with NaN at
/// points outside the ball; h is snapped so the box edge hits the radius.
class GridField {
 public:
  GridField() = default;

  GridField(int d, double radius, double h) : d_(d), radius_(radius) {
    if (d != 2 && d != 3) throw std::invalid_argument("grid supports d = 2 or 3");
    if (h <= 0.0 || radius <= 0.0) throw std::invalid_argument("bad grid geometry");
    m_ = static_cast<long>(std::lround(radius / h));
    if (m_ < 2) throw std::invalid_argument("grid too coarse");
    h_ = radius / static_cast<double>(m_);
    side_ = 2 * m_ + 1;
    std::size_t total = static_cast<std::size_t>(side_) * side_;
    if (d == 3) total *= side_;
    values_.assign(total, std::numeric_limits<double>::quiet_NaN());
    valid_.assign(total, 0);
    const double r2 = radius_ * radius_ * (1.0 + 1e-14);
    for_each_index([&](long i, long j, long k, std::size_t idx) {
      const double x = i * h_, y = j * h_, z = k * h_;
      if (x * x + y * y + z * z <= r2) {
        valid_[idx] = 1;
        values_[idx] = 0.0;
      }
    });
  }

  int dim() const { return d_; }
  double spacing() const { return h_; }
  double radius() const { return radius_; }
  long half_width() const { return m_; }
  long side() const { return side_; }

  std::size_t index(long i, long j, long k = 0) const {
    const std::size_t a = static_cast<std::size_t>(i + m_);
    const std::size_t b = static_cast<std::size_t>(j + m_);
    if (d_ == 2) return a * side_ + b;
    const std::size_t c = static_cast<std::size_t>(k + m_);
    return (a * side_ + b) * side_ + c;
  }

  bool valid(long i, long j, long k = 0) const {
    if (std::abs(i) > m_ || std::abs(j) > m_ || std::abs(k) > m_) return false;
    return valid_[index(i, j, k)] != 0;
  }

  double& at(long i, long j, long k = 0) { return values_[index(i, j, k)]; }
  double at(long i, long j, long k = 0) const { return values_[index(i, j, k)]; }

  Vec point(long i, long j, long k = 0) const {
    Vec x(d_);
    x[0] = i * h_;
    x[1] = j * h_;
    if (d_ == 3) x[2] = k * h_;
    return x;
  }

  template <class Fn>
  void for_each_index(Fn&& fn) const {
    if (d_ == 2) {
      for (long i = -m_; i <= m_; ++i)
        for (long j = -m_; j <= m_; ++j)
          fn(i, j, 0L, index(i, j));
    } else {
      for (long i = -m_; i <= m_; ++i)
        for (long j = -m_; j <= m_; ++j)
          for (long k = -m_; k <= m_; ++k) fn(i, j, k, index(i, j, k));
    }
  }

  template <class Fn>
  void for_each_valid(Fn&& fn) const {
    for_each_index([&](long i, long j, long k, std::size_t idx) {
      if (valid_[idx]) fn(i, j, k, idx);
    });
  }

  const std::vector<double>& raw() const { return values_; }
  std::vector<double>& raw() { return values_; }

  /// Multilinear interpolation; weights are renormalized over valid corners
  /// in boundary cells so any |x| <= radius evaluates to a finite value.
  double evaluate(const Vec& x) const {
    if (x.norm() > radius_ * (1.0 + 1e-12)) throw std::invalid_argument("query outside ball");
    long c[3] = {0, 0, 0};
    double f[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < d_; ++a) {
      double t = x[a] / h_;
      long ci = static_cast<long>(std::floor(t));
      ci = std::clamp(ci, -m_, m_ - 1);
      c[a] = ci;
      f[a] = std::clamp(t - ci, 0.0, 1.0);
    }
    double wsum = 0.0, vsum = 0.0;
    const int corners = 1 << d_;
    for (int mask = 0; mask < corners; ++mask) {
      double w = 1.0;
      long ii[3] = {c[0], c[1], c[2]};
      for (int a = 0; a < d_; ++a) {
        if (mask & (1 << a)) {
          w *= f[a];
          ii[a] += 1;
        } else {
          w *= 1.0 - f[a];
        }
      }
      if (w == 0.0) continue;
      if (!valid(ii[0], ii[1], d_ == 3 ? ii[2] : 0)) continue;
      wsum += w;
      vsum += w * at(ii[0], ii[1], d_ == 3 ? ii[2] : 0);
    }
    if (wsum <= 0.0) throw std::logic_error("no valid interpolation corner");
    return vsum / wsum;
  }

  // -- metadata ------------------------------------------------------------
  double p = 0.0;
  double eps = 0.0;
  long iterations = 0;
  double residual = 0.0;
  std::uint64_t boundary_hash = 0;
  std::uint64_t config_hash = 0;

  // -- I/O -------------------------------------------------------------------
  void write_csv(std::ostream& os) const {
    os << "# " << kVersion << " config=" << hex64(config_hash) << "\n";
    if (d_ == 2)
      os << "x_1,x_2,value\n";
    else
      os << "x_1,x_2,x_3,value\n";
    for_each_valid([&](long i, long j, long k, std::size_t idx) {
      os << i * h_ << "," << j * h_;
      if (d_ == 3) os << "," << k * h_;
      os << "," << values_[idx] << "\n";
    });
  }

  void write_binary(std::ostream& os) const {
    const std::uint8_t version = 1;
    const std::uint8_t dim8 = static_cast<std::uint8_t>(d_);
    auto put = [&os](const void* ptr, std::size_t n) {
      os.write(static_cast<const char*>(ptr), static_cast<std::streamsize>(n));
    };
    put(&version, 1);
    put(&dim8, 1);
    put(&h_, 8);
    put(&radius_, 8);
    const std::int64_t m = m_;
    put(&m, 8);
    put(&p, 8);
    put(&eps, 8);
    put(&boundary_hash, 8);
    put(&config_hash, 8);
    const std::int64_t iters = iterations;
    put(&iters, 8);
    put(&residual, 8);
    put(values_.data(), values_.size() * sizeof(double));
  }

  static GridField read_binary(std::istream& is) {
    auto get = [&is](void* ptr, std::size_t n) {
      is.read(static_cast<char*>(ptr), static_cast<std::streamsize>(n));
      if (!is) throw std::runtime_error("truncated field dump");
    };
    std::uint8_t version = 0, dim8 = 0;
    get(&version, 1);
    if (version != 1) throw std::runtime_error("unsupported field dump version");
    get(&dim8, 1);
    double h = 0, radius = 0;
    get(&h, 8);
    get(&radius, 8);
    std::int64_t m = 0;
    get(&m, 8);
    GridField g(dim8, radius, h);
    if (g.m_ != m) throw std::runtime_error("inconsistent field dump geometry");
    get(&g.p, 8);
    get(&g.eps, 8);
    get(&g.boundary_hash, 8);
    get(&g.config_hash, 8);
    std::int64_t iters = 0;
    get(&iters, 8);
    g.iterations = iters;
    get(&g.residual, 8);
    get(g.values_.data(), g.values_.size() * sizeof(double));
    return g;
  }

 private:
  int d_ = 2;
  double radius_ = 1.0;
  double h_ = 0.1;
  long m_ = 10;
  long side_ = 21;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

}  // namespace town
