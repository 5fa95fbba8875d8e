#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "msc/volume.hpp"

namespace msc {

enum class PhantomKind { Constant, WhiteNoise, AxisStripes, SmoothedNoise };

std::string_view to_string(PhantomKind kind);
PhantomKind parse_phantom_kind(std::string_view text);

/// Synthetic test volume.
///
/// `level` is the fill value (constant), the noise amplitude (white_noise),
/// the stripe amplitude (axis_stripes) or the smoothing radius
/// (smoothed_noise, integral, side 2*level+1 over unit-amplitude noise).
/// `period` is the stripe width along x in voxels.
///
/// Noise is drawn from std::mt19937_64 seeded with `rng_seed`, one 64-bit
/// draw per voxel in storage order (z fastest); a draw u maps to
/// level * (u >> 11) * 2^-53, which is independent of the standard library's
/// distribution implementations.
struct PhantomSpec {
  PhantomKind kind = PhantomKind::Constant;
  Shape3 shape{1, 1, 1};
  double level = 0.0;
  Index period = 1;
  std::uint64_t rng_seed = 0;

  /// Throws InvalidSpec on empty shapes, negative or non-finite level,
  /// period < 1, or a non-integral smoothing radius.
  void validate() const;
};

Volume3D generate_phantom(const PhantomSpec& spec);

std::string describe(const PhantomSpec& spec);

}  // namespace msc
