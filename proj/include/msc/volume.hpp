#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <string>

#include "msc/error.hpp"

namespace msc {

using Index = Eigen::Index;

/// Voxel counts along (X, Y, Z).
struct Shape3 {
  Index x = 0;
  Index y = 0;
  Index z = 0;

  constexpr Index operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr Index& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr Index count() const { return x * y * z; }
  constexpr bool valid() const { return x >= 1 && y >= 1 && z >= 1; }
  friend constexpr bool operator==(const Shape3&, const Shape3&) = default;
};

inline std::string to_string(const Shape3& s) {
  return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + "," + std::to_string(s.z) + ")";
}

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Dense 3D scalar field stored row-major with z fastest, i.e. the layout of a
/// C-order array of shape (X, Y, Z).
template <typename Scalar_>
class Volume {
 public:
  using Scalar = Scalar_;
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Volume() = default;

  explicit Volume(Shape3 shape, Scalar fill = Scalar(0)) : shape_(shape) {
    check_shape(shape);
    data_ = Storage::Constant(shape.count(), fill);
    if (!std::isfinite(static_cast<double>(fill))) throw Error(Errc::NonFinite, "fill value is not finite");
  }

  /// Adopts `data` as the voxel payload; rejects length mismatches and non-finite values.
  Volume(Shape3 shape, Storage data) : shape_(shape), data_(std::move(data)) {
    check_shape(shape);
    if (data_.size() != shape.count())
      throw Error(Errc::ShapeMismatch, "payload length " + std::to_string(data_.size()) +
                                           " does not match shape " + to_string(shape));
    if (!data_.allFinite()) throw Error(Errc::NonFinite, "volume contains NaN or Inf");
  }

  const Shape3& shape() const { return shape_; }
  Index size() const { return data_.size(); }
  Index dim(int axis) const { return shape_[axis]; }

  Index index(Index x, Index y, Index z) const { return (x * shape_.y + y) * shape_.z + z; }

  Scalar operator()(Index x, Index y, Index z) const { return data_[index(x, y, z)]; }
  Scalar& operator()(Index x, Index y, Index z) { return data_[index(x, y, z)]; }

  const Storage& array() const { return data_; }
  Storage& array() { return data_; }

  template <typename NewScalar>
  Volume<NewScalar> cast() const {
    return Volume<NewScalar>(shape_, data_.template cast<NewScalar>().eval());
  }

  friend bool operator==(const Volume& a, const Volume& b) {
    return a.shape_ == b.shape_ && (a.data_ == b.data_).all();
  }

 private:
  static void check_shape(const Shape3& shape) {
    if (!shape.valid()) throw Error(Errc::BadShape, "shape " + to_string(shape) + " has a non-positive dimension");
  }

  Shape3 shape_{};
  Storage data_;
};

using Volume3D = Volume<double>;

/// ⟨X⟩ over the whole lattice.
template <typename Scalar>
Scalar spatial_mean(const Volume<Scalar>& v) {
  return v.array().mean();
}

template <typename Scalar>
Volume<Scalar> affine(const Volume<Scalar>& v, Scalar scale, Scalar offset) {
  return Volume<Scalar>(v.shape(), (scale * v.array() + offset).eval());
}

/// Smallest multiple of `factor` that is >= n.
constexpr Index round_up(Index n, Index factor) { return ((n + factor - 1) / factor) * factor; }

/// Edge-replicating pad so every dimension divides `factor`. The input region
/// occupies the low corner unchanged.
template <typename Scalar>
Volume<Scalar> pad_to_multiple(const Volume<Scalar>& v, Index factor) {
  if (factor < 1) throw Error(Errc::InvalidArgument, "pad factor must be >= 1");
  const Shape3& in = v.shape();
  const Shape3 out{round_up(in.x, factor), round_up(in.y, factor), round_up(in.z, factor)};
  if (out == in) return v;

  Volume<Scalar> padded(out);
  for (Index x = 0; x < out.x; ++x) {
    const Index sx = std::min(x, in.x - 1);
    for (Index y = 0; y < out.y; ++y) {
      const Index sy = std::min(y, in.y - 1);
      for (Index z = 0; z < out.z; ++z) padded(x, y, z) = v(sx, sy, std::min(z, in.z - 1));
    }
  }
  return padded;
}

/// Plane at floor(dim/2) along `axis`. Rows index the first remaining axis and
/// columns the second, so axis Z yields plane(x, y).
template <typename Scalar>
typename Volume<Scalar>::Plane mid_slice(const Volume<Scalar>& v, Axis axis) {
  const Shape3& s = v.shape();
  const int a = static_cast<int>(axis);
  const Index mid = s[a] / 2;
  const int r = a == 0 ? 1 : 0;
  const int c = a == 2 ? 1 : 2;

  typename Volume<Scalar>::Plane plane(s[r], s[c]);
  std::array<Index, 3> at{};
  at[a] = mid;
  for (Index i = 0; i < s[r]; ++i) {
    at[r] = i;
    for (Index j = 0; j < s[c]; ++j) {
      at[c] = j;
      plane(i, j) = v(at[0], at[1], at[2]);
    }
  }
  return plane;
}

}  // namespace msc
