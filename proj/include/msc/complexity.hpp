#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "msc/coarse_grain.hpp"
#include "msc/volume.hpp"

namespace msc {

enum class Mode { Algorithm1, BlockCascade, SlidingCascade };

constexpr std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Algorithm1: return "algorithm1";
    case Mode::BlockCascade: return "block-cascade";
    case Mode::SlidingCascade: return "sliding-cascade";
  }
  return "unknown";
}

/// Accepts the CLI spellings (`block-cascade`) and the underscore forms.
Mode parse_mode(std::string_view text);

/// Coarse-graining factors plus the window sweep used by the algorithm1 mode.
struct ScaleSchedule {
  std::vector<Index> factors{1, 2, 4, 8, 16, 32};
  Mode mode = Mode::Algorithm1;
  Shape3 window{4, 4, 4};
  Shape3 stride{2, 2, 2};

  /// Throws InvalidSchedule unless factors are strictly increasing and >= 1,
  /// window dims >= 2 and stride dims >= 1. Cascade modes additionally need
  /// every factor to divide its successor.
  void validate() const;
};

/// Forward one-voxel shift overlaps (o_x, o_y, o_z) of a window; each <= 0.
struct ShiftOverlaps {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

template <typename Scalar>
struct ComplexityMap {
  Index scale_factor = 1;
  Volume<Scalar> values;

  Shape3 grid_shape() const { return values.shape(); }
};

struct ScaleEntry {
  int scale_index = 0;
  Index scale_factor = 1;
  double complexity = 0.0;
  double overlap = 0.0;
};

struct ComplexityProfile {
  std::string subject_id;
  std::vector<ScaleEntry> per_scale;
};

/// What was actually run at one scale, after padding and window clipping.
struct ScaleRun {
  Index scale_factor = 1;
  Index step_factor = 1;  // incremental factor in cascade modes
  Shape3 padded_shape{};
  Shape3 coarse_shape{};
  Shape3 window{};
  Shape3 stride{};
  Shape3 grid{};
  bool padded = false;
  bool degenerate = false;  // sweep collapsed to a single window
};

template <typename Scalar>
struct ProfileResult {
  ComplexityProfile profile;
  std::vector<ComplexityMap<Scalar>> maps;  // algorithm1 only
  std::vector<ScaleRun> runs;
};

namespace detail {

template <typename Scalar>
ShiftOverlaps shift_overlaps_at(const Volume<Scalar>& u, Index ox, Index oy, Index oz, const Shape3& w) {
  // B* spans the window minus its last voxel per axis; the shifted views are
  // cropped to the same extent so every product is taken on matching voxels.
  const Index ex = w.x - 1, ey = w.y - 1, ez = w.z - 1;
  Scalar s_bb(0), s_xx(0), s_yy(0), s_zz(0), s_bx(0), s_by(0), s_bz(0);
  for (Index i = 0; i < ex; ++i)
    for (Index j = 0; j < ey; ++j)
      for (Index k = 0; k < ez; ++k) {
        const Scalar b = u(ox + i, oy + j, oz + k);
        const Scalar bx = u(ox + i + 1, oy + j, oz + k);
        const Scalar by = u(ox + i, oy + j + 1, oz + k);
        const Scalar bz = u(ox + i, oy + j, oz + k + 1);
        s_bb += b * b;
        s_xx += bx * bx;
        s_yy += by * by;
        s_zz += bz * bz;
        s_bx += b * bx;
        s_by += b * by;
        s_bz += b * bz;
      }
  const double n = static_cast<double>(ex * ey * ez);
  const auto shifted = [&](Scalar cross, Scalar self) {
    const double o = static_cast<double>(cross - Scalar(0.5) * (s_bb + self)) / n;
    return std::min(o, 0.0);
  };
  return {shifted(s_bx, s_xx), shifted(s_by, s_yy), shifted(s_bz, s_zz)};
}

}  // namespace detail

/// O(a, b) = ⟨ab⟩ - ½(⟨a²⟩ + ⟨b²⟩); equals -½⟨(a-b)²⟩ and is never positive.
template <typename Scalar>
double overlap(const Volume<Scalar>& a, const Volume<Scalar>& b) {
  if (!(a.shape() == b.shape()))
    throw Error(Errc::ShapeMismatch, "overlap of " + to_string(a.shape()) + " and " + to_string(b.shape()));
  const Scalar cross = (a.array() * b.array()).sum();
  const Scalar self = a.array().square().sum() + b.array().square().sum();
  const double o = static_cast<double>(cross - Scalar(0.5) * self) / static_cast<double>(a.size());
  return std::min(o, 0.0);
}

template <typename Scalar>
ShiftOverlaps shift_overlap_axes(const Volume<Scalar>& block) {
  const Shape3& s = block.shape();
  if (s.x < 2 || s.y < 2 || s.z < 2)
    throw Error(Errc::BlockTooSmall, "shift overlaps need a block of at least 2 voxels per axis, got " + to_string(s));
  return detail::shift_overlaps_at(block, 0, 0, 0, s);
}

/// Number of window positions along one axis.
constexpr Index sweep_count(Index dim, Index window, Index stride) { return (dim - window) / stride + 1; }

/// Sweeps `window` over `u` at multiples of `stride`; each cell holds
/// -(o_x + o_y + o_z) / 3 for its window.
template <typename Scalar>
ComplexityMap<Scalar> complexity_map(const Volume<Scalar>& u, Shape3 window, Shape3 stride, Index scale_factor = 1) {
  for (int a = 0; a < 3; ++a) {
    if (window[a] < 2) throw Error(Errc::WindowTooSmall, "window " + to_string(window) + " must be >= 2 per axis");
    if (window[a] > u.dim(a))
      throw Error(Errc::WindowTooLarge, "window " + to_string(window) + " does not fit in " + to_string(u.shape()));
    if (stride[a] < 1) throw Error(Errc::InvalidArgument, "stride " + to_string(stride) + " must be >= 1 per axis");
  }
  const Shape3 grid{sweep_count(u.dim(0), window.x, stride.x), sweep_count(u.dim(1), window.y, stride.y),
                    sweep_count(u.dim(2), window.z, stride.z)};

  ComplexityMap<Scalar> map{scale_factor, Volume<Scalar>(grid)};
  for (Index i = 0; i < grid.x; ++i)
    for (Index j = 0; j < grid.y; ++j)
      for (Index l = 0; l < grid.z; ++l) {
        const ShiftOverlaps o = detail::shift_overlaps_at(u, i * stride.x, j * stride.y, l * stride.z, window);
        map.values(i, j, l) = static_cast<Scalar>(0.0 - (o.x + o.y + o.z) / 3.0);
      }
  return map;
}

/// Structural complexity C(λ) at every factor of `schedule`.
///
/// algorithm1 block-averages the original volume at each factor, sweeps the
/// clipped window over the coarse volume and averages the resulting map.
/// The cascade modes coarse-grain the previous step's field by the incremental
/// factor and take |O(previous, coarse)| on the previous lattice, with block
/// means (block-cascade) or sliding cubic means (sliding-cascade).
template <typename Scalar>
ProfileResult<Scalar> multiscale_profile(const Volume<Scalar>& v, const ScaleSchedule& schedule,
                                         std::string subject_id = {}) {
  schedule.validate();
  ProfileResult<Scalar> result;
  result.profile.subject_id = std::move(subject_id);

  // Work on v - v(0,0,0). Every statistic below ignores a constant offset, and
  // centering makes that hold bit for bit when v + c is exactly representable.
  const Volume<Scalar> centered(v.shape(), (v.array() - v.array()[0]).eval());

  // Zero overlaps are stored as +0.0 on both fields.
  const auto record = [&](int k, Index factor, double o) {
    if (o == 0.0) result.profile.per_scale.push_back({k, factor, 0.0, 0.0});
    else result.profile.per_scale.push_back({k, factor, -o, o});
  };

  if (schedule.mode == Mode::Algorithm1) {
    for (std::size_t k = 0; k < schedule.factors.size(); ++k) {
      const Index factor = schedule.factors[k];
      const Volume<Scalar> coarse = block_downsample(centered, factor);
      ScaleRun run;
      run.scale_factor = factor;
      run.step_factor = factor;
      run.padded_shape = {round_up(v.dim(0), factor), round_up(v.dim(1), factor), round_up(v.dim(2), factor)};
      run.coarse_shape = coarse.shape();
      run.padded = !(run.padded_shape == v.shape());
      for (int a = 0; a < 3; ++a) {
        if (coarse.dim(a) < 2)
          throw Error(Errc::ScheduleInfeasible, "factor " + std::to_string(factor) + " leaves " +
                                                    to_string(coarse.shape()) + " voxels from " +
                                                    to_string(v.shape()) + "; need >= 2 per axis");
        run.window[a] = std::max<Index>(2, std::min(schedule.window[a], coarse.dim(a)));
        run.stride[a] = std::max<Index>(1, std::min(schedule.stride[a], coarse.dim(a)));
      }
      ComplexityMap<Scalar> map = complexity_map(coarse, run.window, run.stride, factor);
      run.grid = map.grid_shape();
      run.degenerate = run.grid.count() == 1;
      const double c = static_cast<double>(map.values.array().mean());
      record(static_cast<int>(k), factor, -c);
      result.maps.push_back(std::move(map));
      result.runs.push_back(run);
    }
    return result;
  }

  Volume<Scalar> previous = centered;
  Index previous_factor = 1;
  for (std::size_t k = 0; k < schedule.factors.size(); ++k) {
    const Index factor = schedule.factors[k];
    const Index step = factor / previous_factor;
    ScaleRun run;
    run.scale_factor = factor;
    run.step_factor = step;
    run.padded_shape = previous.shape();
    run.coarse_shape = previous.shape();

    double o = 0.0;
    if (step > 1) {
      if (schedule.mode == Mode::BlockCascade) {
        Volume<Scalar> down = block_downsample(previous, step);
        run.padded_shape = {round_up(previous.dim(0), step), round_up(previous.dim(1), step),
                            round_up(previous.dim(2), step)};
        run.coarse_shape = down.shape();
        run.padded = !(run.padded_shape == previous.shape());
        o = overlap(previous, block_upsample(down, step, previous.shape()));
        previous = std::move(down);
      } else {
        Volume<Scalar> smooth = sliding_mean_integral(previous, step);
        o = overlap(previous, smooth);
        previous = std::move(smooth);
      }
    }
    record(static_cast<int>(k), factor, o);
    result.runs.push_back(run);
    previous_factor = factor;
  }
  return result;
}

}  // namespace msc
