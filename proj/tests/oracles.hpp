#pragma once

// Straight-line reference implementations used only by the tests. They work
// on raw index arithmetic with clamped reads and never call into the
// coarse-graining or complexity code they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "msc/volume.hpp"

namespace oracle {

using msc::Index;
using msc::Shape3;
using msc::Volume3D;

inline double clamped(const Volume3D& v, Index x, Index y, Index z) {
  x = std::min(x, v.dim(0) - 1);
  y = std::min(y, v.dim(1) - 1);
  z = std::min(z, v.dim(2) - 1);
  return v(x, y, z);
}

/// Pairwise (tree) summation mean.
inline long double pairwise_sum(const double* p, Index n) {
  if (n <= 8) {
    long double s = 0;
    for (Index i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const Index h = n / 2;
  return pairwise_sum(p, h) + pairwise_sum(p + h, n - h);
}

inline double mean(const Volume3D& v) {
  return static_cast<double>(pairwise_sum(v.array().data(), v.size()) / static_cast<long double>(v.size()));
}

/// Block means over an edge-replicated lattice, read directly from `v`.
inline Volume3D block_means(const Volume3D& v, Index f) {
  const Shape3 s{(v.dim(0) + f - 1) / f, (v.dim(1) + f - 1) / f, (v.dim(2) + f - 1) / f};
  Volume3D out(s);
  for (Index bx = 0; bx < s.x; ++bx)
    for (Index by = 0; by < s.y; ++by)
      for (Index bz = 0; bz < s.z; ++bz) {
        long double sum = 0;
        for (Index i = 0; i < f; ++i)
          for (Index j = 0; j < f; ++j)
            for (Index k = 0; k < f; ++k) sum += clamped(v, bx * f + i, by * f + j, bz * f + k);
        out(bx, by, bz) = static_cast<double>(sum / static_cast<long double>(f * f * f));
      }
  return out;
}

/// Windowed means by scanning every offset and testing bounds (seven loops
/// counting the implicit per-axis bound checks).
inline Volume3D windowed_means(const Volume3D& v, Index side) {
  const Index before = side / 2, after = side - 1 - side / 2;
  Volume3D out(v.shape());
  for (Index x = 0; x < v.dim(0); ++x)
    for (Index y = 0; y < v.dim(1); ++y)
      for (Index z = 0; z < v.dim(2); ++z) {
        long double sum = 0;
        long count = 0;
        for (Index dx = -before; dx <= after; ++dx)
          for (Index dy = -before; dy <= after; ++dy)
            for (Index dz = -before; dz <= after; ++dz) {
              const Index i = x + dx, j = y + dy, k = z + dz;
              if (i < 0 || j < 0 || k < 0 || i >= v.dim(0) || j >= v.dim(1) || k >= v.dim(2)) continue;
              sum += v(i, j, k);
              ++count;
            }
        out(x, y, z) = static_cast<double>(sum / count);
      }
  return out;
}

/// -½⟨(a - b)²⟩, the difference form of the overlap.
inline double overlap_difference_form(const Volume3D& a, const Volume3D& b) {
  long double s = 0;
  for (Index i = 0; i < a.size(); ++i) {
    const long double d = static_cast<long double>(a.array()[i]) - b.array()[i];
    s += d * d;
  }
  return static_cast<double>(-0.5L * s / a.size());
}

struct Shifts {
  double x, y, z;
};

/// -½ mean of squared forward differences on the window minus its last voxel
/// per axis, for the window of size w at offset o.
inline Shifts forward_difference_shifts(const Volume3D& u, Index ox, Index oy, Index oz, Shape3 w) {
  long double sx = 0, sy = 0, sz = 0;
  long n = 0;
  for (Index i = 0; i + 1 < w.x; ++i)
    for (Index j = 0; j + 1 < w.y; ++j)
      for (Index k = 0; k + 1 < w.z; ++k) {
        const long double b = u(ox + i, oy + j, oz + k);
        const long double dx = u(ox + i + 1, oy + j, oz + k) - b;
        const long double dy = u(ox + i, oy + j + 1, oz + k) - b;
        const long double dz = u(ox + i, oy + j, oz + k + 1) - b;
        sx += dx * dx;
        sy += dy * dy;
        sz += dz * dz;
        ++n;
      }
  return {static_cast<double>(-0.5L * sx / n), static_cast<double>(-0.5L * sy / n),
          static_cast<double>(-0.5L * sz / n)};
}

struct Algorithm1Scale {
  Index factor;
  Shape3 grid;
  std::vector<double> cells;
  double complexity;
};

/// Literal per-scale transcription: block means from the original volume,
/// window clipped to [2, coarse dim], stride clipped to [1, coarse dim],
/// forward-difference cells, mean over cells.
inline std::vector<Algorithm1Scale> algorithm1(const Volume3D& v, const std::vector<Index>& factors, Shape3 window,
                                               Shape3 stride) {
  std::vector<Algorithm1Scale> out;
  for (Index f : factors) {
    const Volume3D u = block_means(v, f);
    Shape3 w{}, s{}, grid{};
    for (int a = 0; a < 3; ++a) {
      w[a] = std::max<Index>(2, std::min(window[a], u.dim(a)));
      s[a] = std::max<Index>(1, std::min(stride[a], u.dim(a)));
      grid[a] = (u.dim(a) - w[a]) / s[a] + 1;
    }
    Algorithm1Scale scale{f, grid, {}, 0.0};
    long double total = 0;
    for (Index i = 0; i < grid.x; ++i)
      for (Index j = 0; j < grid.y; ++j)
        for (Index l = 0; l < grid.z; ++l) {
          const Shifts o = forward_difference_shifts(u, i * s.x, j * s.y, l * s.z, w);
          const double k = -(o.x + o.y + o.z) / 3.0;
          scale.cells.push_back(k);
          total += k;
        }
    scale.complexity = static_cast<double>(total / static_cast<long double>(scale.cells.size()));
    out.push_back(std::move(scale));
  }
  return out;
}

}  // namespace oracle
