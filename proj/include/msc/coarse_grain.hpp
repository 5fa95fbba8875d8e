#pragma once

#include <algorithm>
#include <vector>

#include "msc/volume.hpp"

namespace msc {

namespace detail {

/// Clipped window [lo, hi] of `side` voxels around `i` on an axis of length n.
/// Even sides place side/2 voxels before the center and side/2 - 1 after it.
struct WindowSpan {
  Index lo;
  Index hi;
};

constexpr WindowSpan window_span(Index i, Index side, Index n) {
  const Index before = side / 2;
  const Index after = side - 1 - before;
  return {std::max<Index>(0, i - before), std::min<Index>(n - 1, i + after)};
}

// Box means can step outside the input range by an ulp through rounding.
template <typename Scalar>
void clamp_to_range(Volume<Scalar>& out, Scalar lo, Scalar hi) {
  out.array() = out.array().max(lo).min(hi);
}

}  // namespace detail

/// Edge-pads `v` to a multiple of `factor`, then replaces each factor³ block
/// by its mean. Output shape is ceil(dim / factor) per axis.
template <typename Scalar>
Volume<Scalar> block_downsample(const Volume<Scalar>& v, Index factor) {
  if (factor < 1) throw Error(Errc::InvalidArgument, "block factor must be >= 1");
  if (factor == 1) return v;

  const Volume<Scalar> padded = pad_to_multiple(v, factor);
  const Shape3 out_shape{padded.dim(0) / factor, padded.dim(1) / factor, padded.dim(2) / factor};
  const Scalar inv_count = Scalar(1) / static_cast<Scalar>(factor * factor * factor);

  Volume<Scalar> out(out_shape);
  for (Index bx = 0; bx < out_shape.x; ++bx)
    for (Index by = 0; by < out_shape.y; ++by)
      for (Index bz = 0; bz < out_shape.z; ++bz) {
        Scalar sum(0);
        for (Index x = bx * factor; x < (bx + 1) * factor; ++x)
          for (Index y = by * factor; y < (by + 1) * factor; ++y) {
            const Scalar* row = padded.array().data() + padded.index(x, y, bz * factor);
            for (Index z = 0; z < factor; ++z) sum += row[z];
          }
        out(bx, by, bz) = sum * inv_count;
      }
  detail::clamp_to_range(out, v.array().minCoeff(), v.array().maxCoeff());
  return out;
}

/// Replicates every coarse voxel over a factor³ block and crops to `target`.
template <typename Scalar>
Volume<Scalar> block_upsample(const Volume<Scalar>& v, Index factor, Shape3 target) {
  if (factor < 1) throw Error(Errc::InvalidArgument, "block factor must be >= 1");
  if (!target.valid()) throw Error(Errc::ShapeMismatch, "target shape " + to_string(target) + " is empty");
  for (int a = 0; a < 3; ++a)
    if (target[a] > factor * v.dim(a))
      throw Error(Errc::ShapeMismatch, "target shape " + to_string(target) + " exceeds " +
                                           std::to_string(factor) + " x " + to_string(v.shape()));

  Volume<Scalar> out(target);
  for (Index x = 0; x < target.x; ++x)
    for (Index y = 0; y < target.y; ++y)
      for (Index z = 0; z < target.z; ++z) out(x, y, z) = v(x / factor, y / factor, z / factor);
  return out;
}

/// Sliding cubic mean by direct summation over each clipped window. Cost is
/// O(N * side³); use sliding_mean_integral for anything but small inputs.
template <typename Scalar>
Volume<Scalar> sliding_mean(const Volume<Scalar>& v, Index side) {
  if (side < 1) throw Error(Errc::InvalidArgument, "window side must be >= 1");
  if (side == 1) return v;

  const Shape3& s = v.shape();
  Volume<Scalar> out(s);
  for (Index x = 0; x < s.x; ++x) {
    const auto wx = detail::window_span(x, side, s.x);
    for (Index y = 0; y < s.y; ++y) {
      const auto wy = detail::window_span(y, side, s.y);
      for (Index z = 0; z < s.z; ++z) {
        const auto wz = detail::window_span(z, side, s.z);
        Scalar sum(0);
        for (Index i = wx.lo; i <= wx.hi; ++i)
          for (Index j = wy.lo; j <= wy.hi; ++j)
            for (Index k = wz.lo; k <= wz.hi; ++k) sum += v(i, j, k);
        const Index count = (wx.hi - wx.lo + 1) * (wy.hi - wy.lo + 1) * (wz.hi - wz.lo + 1);
        out(x, y, z) = sum / static_cast<Scalar>(count);
      }
    }
  }
  detail::clamp_to_range(out, v.array().minCoeff(), v.array().maxCoeff());
  return out;
}

/// 3D summed-area table with a one-voxel zero border: entry (i+1, j+1, k+1)
/// holds the sum of (v - reference) over [0,i]x[0,j]x[0,k]. Values are taken
/// relative to the first voxel so constant regions integrate to exact zeros.
///
/// Building with MSC_COMPENSATED_INTEGRAL switches the prefix passes to
/// Neumaier-compensated running sums, which bounds drift for volumes well
/// beyond 512³.
template <typename Scalar>
class IntegralVolume {
 public:
  explicit IntegralVolume(const Volume<Scalar>& v)
      : nx_(v.dim(0) + 1), ny_(v.dim(1) + 1), nz_(v.dim(2) + 1), reference_(v.array()[0]) {
    table_.assign(static_cast<std::size_t>(nx_ * ny_ * nz_), Scalar(0));
    for (Index x = 0; x < v.dim(0); ++x)
      for (Index y = 0; y < v.dim(1); ++y)
        for (Index z = 0; z < v.dim(2); ++z) at(x + 1, y + 1, z + 1) = v(x, y, z) - reference_;
    prefix_pass(0);
    prefix_pass(1);
    prefix_pass(2);
  }

  Scalar reference() const { return reference_; }

  /// Sum of (v - reference) over the inclusive box [lo, hi].
  Scalar box_sum(Index x0, Index y0, Index z0, Index x1, Index y1, Index z1) const {
    ++x1, ++y1, ++z1;
    return at(x1, y1, z1) - at(x0, y1, z1) - at(x1, y0, z1) - at(x1, y1, z0) + at(x0, y0, z1) +
           at(x0, y1, z0) + at(x1, y0, z0) - at(x0, y0, z0);
  }

 private:
  Scalar& at(Index x, Index y, Index z) { return table_[static_cast<std::size_t>((x * ny_ + y) * nz_ + z)]; }
  Scalar at(Index x, Index y, Index z) const { return table_[static_cast<std::size_t>((x * ny_ + y) * nz_ + z)]; }

  void prefix_pass(int axis) {
    const Index n[3] = {nx_, ny_, nz_};
    const int a = (axis + 1) % 3;
    const int b = (axis + 2) % 3;
    Index idx[3];
    for (Index i = 1; i < n[a]; ++i)
      for (Index j = 1; j < n[b]; ++j) {
        idx[a] = i;
        idx[b] = j;
        Scalar running(0);
#ifdef MSC_COMPENSATED_INTEGRAL
        Scalar carry(0);
#endif
        for (Index k = 1; k < n[axis]; ++k) {
          idx[axis] = k;
          Scalar& cell = at(idx[0], idx[1], idx[2]);
#ifdef MSC_COMPENSATED_INTEGRAL
          const Scalar t = running + cell;
          carry += std::abs(running) >= std::abs(cell) ? (running - t) + cell : (cell - t) + running;
          running = t;
          cell = running + carry;
#else
          running += cell;
          cell = running;
#endif
        }
      }
  }

  Index nx_, ny_, nz_;
  Scalar reference_;
  std::vector<Scalar> table_;
};

/// Same contract as sliding_mean, evaluated in O(N) through an integral volume.
template <typename Scalar>
Volume<Scalar> sliding_mean_integral(const Volume<Scalar>& v, Index side) {
  if (side < 1) throw Error(Errc::InvalidArgument, "window side must be >= 1");
  if (side == 1) return v;

  const IntegralVolume<Scalar> table(v);
  const Shape3& s = v.shape();
  Volume<Scalar> out(s);
  for (Index x = 0; x < s.x; ++x) {
    const auto wx = detail::window_span(x, side, s.x);
    for (Index y = 0; y < s.y; ++y) {
      const auto wy = detail::window_span(y, side, s.y);
      for (Index z = 0; z < s.z; ++z) {
        const auto wz = detail::window_span(z, side, s.z);
        const Index count = (wx.hi - wx.lo + 1) * (wy.hi - wy.lo + 1) * (wz.hi - wz.lo + 1);
        const Scalar sum = table.box_sum(wx.lo, wy.lo, wz.lo, wx.hi, wy.hi, wz.hi);
        out(x, y, z) = sum / static_cast<Scalar>(count) + table.reference();
      }
    }
  }
  detail::clamp_to_range(out, v.array().minCoeff(), v.array().maxCoeff());
  return out;
}

}  // namespace msc
