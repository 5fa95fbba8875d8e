#include "msc/phantom.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "msc/coarse_grain.hpp"

namespace msc {

std::string_view to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::Constant: return "constant";
    case PhantomKind::WhiteNoise: return "white_noise";
    case PhantomKind::AxisStripes: return "axis_stripes";
    case PhantomKind::SmoothedNoise: return "smoothed_noise";
  }
  return "unknown";
}

PhantomKind parse_phantom_kind(std::string_view text) {
  if (text == "constant") return PhantomKind::Constant;
  if (text == "white_noise" || text == "white-noise") return PhantomKind::WhiteNoise;
  if (text == "axis_stripes" || text == "axis-stripes" || text == "stripes") return PhantomKind::AxisStripes;
  if (text == "smoothed_noise" || text == "smoothed-noise") return PhantomKind::SmoothedNoise;
  throw Error(Errc::InvalidSpec, "unknown phantom kind '" + std::string(text) + "'");
}

void PhantomSpec::validate() const {
  if (!shape.valid()) throw Error(Errc::InvalidSpec, "phantom shape " + to_string(shape) + " has an empty dimension");
  if (!std::isfinite(level) || level < 0.0) throw Error(Errc::InvalidSpec, "phantom level must be finite and >= 0");
  if (period < 1) throw Error(Errc::InvalidSpec, "stripe period must be >= 1");
  if (kind == PhantomKind::SmoothedNoise && level != std::floor(level))
    throw Error(Errc::InvalidSpec, "smoothing radius must be a whole number of voxels");
}

namespace {

Volume3D uniform_noise(const Shape3& shape, double amplitude, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  Volume3D v(shape);
  for (Index i = 0; i < v.size(); ++i) {
    const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    v.array()[i] = amplitude * unit;
  }
  return v;
}

}  // namespace

Volume3D generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case PhantomKind::Constant:
      return Volume3D(spec.shape, spec.level);
    case PhantomKind::WhiteNoise:
      return uniform_noise(spec.shape, spec.level, spec.rng_seed);
    case PhantomKind::AxisStripes: {
      Volume3D v(spec.shape);
      for (Index x = 0; x < spec.shape.x; ++x) {
        const double value = (x / spec.period) % 2 == 1 ? spec.level : 0.0;
        for (Index y = 0; y < spec.shape.y; ++y)
          for (Index z = 0; z < spec.shape.z; ++z) v(x, y, z) = value;
      }
      return v;
    }
    case PhantomKind::SmoothedNoise: {
      const auto radius = static_cast<Index>(spec.level);
      return sliding_mean_integral(uniform_noise(spec.shape, 1.0, spec.rng_seed), 2 * radius + 1);
    }
  }
  throw Error(Errc::InvalidSpec, "unknown phantom kind");
}

std::string describe(const PhantomSpec& spec) {
  std::ostringstream os;
  os << "kind=" << to_string(spec.kind) << " shape=" << spec.shape.x << "," << spec.shape.y << "," << spec.shape.z
     << " level=" << spec.level << " period=" << spec.period << " seed=" << spec.rng_seed;
  return os.str();
}

}  // namespace msc
