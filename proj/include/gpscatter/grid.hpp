#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gpscatter/common.hpp"

namespace gpscatter {

// Uniform Cartesian grid on [-radius, radius]^d restricted to the ball
// |x| <= radius. Active points are stored packed; per-point neighbor tables
// carry the stencil (-1 marks a face leaving the ball, closed by the caller's
// boundary rule). Node i sits at (i - (n-1)/2) h, so even n has no point at
// the origin.
template <int D>
class BallGrid {
 public:
  BallGrid(int n, double radius)
      : n_(n), radius_(radius), h_(2.0 * radius / (n - 1)) {
    require(n >= 4, ErrorKind::precondition, "grid too coarse");
    std::size_t cube = 1;
    for (int k = 0; k < D; ++k) cube *= static_cast<std::size_t>(n);
    std::vector<std::int32_t> rank(cube, -1);  // transient
    const double r2max = radius * radius * (1.0 + 1e-12);
    int idx[D];
    std::int32_t count = 0;
    for (std::size_t flat = 0; flat < cube; ++flat) {
      double r2 = 0.0;
      std::size_t rem = flat;
      for (int k = D - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(rem % n);
        rem /= n;
        double c = axis_coord(idx[k]);
        r2 += c * c;
      }
      if (r2 <= r2max) {
        rank[flat] = count++;
        flat_.push_back(static_cast<std::int64_t>(flat));
      }
    }
    std::size_t stride[D];
    stride[D - 1] = 1;
    for (int k = D - 2; k >= 0; --k) stride[k] = stride[k + 1] * static_cast<std::size_t>(n);

    neighbors_.assign(flat_.size() * 2 * D, -1);
    for (std::size_t a = 0; a < flat_.size(); ++a) {
      std::size_t flat = static_cast<std::size_t>(flat_[a]);
      std::size_t rem = flat;
      for (int k = D - 1; k >= 0; --k) {
        idx[k] = static_cast<int>(rem % n);
        rem /= n;
      }
      for (int k = 0; k < D; ++k) {
        if (idx[k] > 0) neighbors_[a * 2 * D + 2 * k] = rank[flat - stride[k]];
        if (idx[k] + 1 < n) neighbors_[a * 2 * D + 2 * k + 1] = rank[flat + stride[k]];
      }
    }
  }

  int n() const { return n_; }
  double radius() const { return radius_; }
  double h() const { return h_; }
  std::size_t size() const { return flat_.size(); }
  double cell_volume() const { return std::pow(h_, D); }

  double axis_coord(int i) const { return (double(i) - (n_ - 1) / 2.0) * h_; }

  void coords(std::size_t a, double* x) const {
    std::size_t rem = static_cast<std::size_t>(flat_[a]);
    for (int k = D - 1; k >= 0; --k) {
      x[k] = axis_coord(static_cast<int>(rem % n_));
      rem /= n_;
    }
  }

  // neighbor rank along axis k in direction dir (0:-, 1:+), -1 if outside
  std::int32_t neighbor(std::size_t a, int k, int dir) const {
    return neighbors_[a * 2 * D + 2 * k + dir];
  }
  // ghost coordinate one step outside from point a along (k, dir)
  void ghost_coords(std::size_t a, int k, int dir, double* x) const {
    coords(a, x);
    x[k] += (dir == 1 ? h_ : -h_);
  }
 private:
  int n_;
  double radius_;
  double h_;
  std::vector<std::int64_t> flat_;
  std::vector<std::int32_t> neighbors_;
};

}  // namespace gpscatter
