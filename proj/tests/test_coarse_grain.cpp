#include <doctest.h>

#include "msc/coarse_grain.hpp"
#include "msc/phantom.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace msc;

namespace {

double max_abs_diff(const Volume3D& a, const Volume3D& b) {
  REQUIRE(a.shape() == b.shape());
  return (a.array() - b.array()).abs().maxCoeff();
}

Volume3D noise(Shape3 s, std::uint64_t seed) { return generate_phantom({PhantomKind::WhiteNoise, s, 1.0, 1, seed}); }

}  // namespace

TEST_CASE("block_downsample") {
  std::mt19937_64 rng(3);
  const Volume3D v = testing::random_volume({5, 6, 7}, rng);
  CHECK(block_downsample(v, 1) == v);

  Volume3D ramp({2, 2, 2});
  for (Index i = 0; i < 8; ++i) ramp.array()[i] = static_cast<double>(i);
  const Volume3D one = block_downsample(ramp, 2);
  CHECK(one.shape() == Shape3{1, 1, 1});
  CHECK(one(0, 0, 0) == 3.5);

  const Volume3D w = noise({16, 16, 16}, 4);
  const Volume3D fast = block_downsample(w, 4);
  CHECK(fast.shape() == Shape3{4, 4, 4});
  CHECK(max_abs_diff(fast, oracle::block_means(w, 4)) <= 1e-15);

  // Non-divisible shapes pad by replication before averaging.
  const Volume3D odd = block_downsample(v, 4);
  CHECK(odd.shape() == Shape3{2, 2, 2});
  CHECK(max_abs_diff(odd, oracle::block_means(v, 4)) <= 1e-15);

  CHECK_THROWS_AS(block_downsample(v, 0), Error);
}

TEST_CASE("block_upsample") {
  std::mt19937_64 rng(5);
  const Volume3D v = testing::random_volume({3, 4, 2}, rng);
  CHECK(block_upsample(v, 1, v.shape()) == v);

  const Volume3D up = block_upsample(Volume3D({1, 1, 1}, 3.5), 2, {2, 2, 2});
  CHECK(up == Volume3D({2, 2, 2}, 3.5));

  const Volume3D c({6, 5, 7}, -2.0);
  CHECK(block_upsample(block_downsample(c, 2), 2, c.shape()) == c);

  const Volume3D cropped = block_upsample(v, 3, {8, 10, 5});
  for (Index x = 0; x < 8; ++x)
    for (Index y = 0; y < 10; ++y)
      for (Index z = 0; z < 5; ++z) CHECK(cropped(x, y, z) == v(x / 3, y / 3, z / 3));

  try {
    block_upsample(v, 2, {7, 8, 4});
    FAIL("oversized target accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ShapeMismatch);
  }
}

TEST_CASE("block round trip is idempotent") {
  std::mt19937_64 rng(8);
  for (Index f : {2, 3, 4}) {
    const Volume3D v = testing::random_volume({9, 8, 7}, rng);
    const Volume3D once = block_upsample(block_downsample(v, f), f, v.shape());
    const Volume3D twice = block_upsample(block_downsample(once, f), f, v.shape());
    CHECK(max_abs_diff(once, twice) <= 1e-15);
  }
}

TEST_CASE("sliding_mean matches the naive windowed oracle") {
  const Volume3D w = noise({12, 12, 12}, 21);
  CHECK(sliding_mean(w, 1) == w);
  CHECK(max_abs_diff(sliding_mean(w, 3), oracle::windowed_means(w, 3)) <= 1e-10);
  for (Index side : {2, 4, 5, 13})
    CHECK(max_abs_diff(sliding_mean(w, side), oracle::windowed_means(w, side)) <= 1e-10);

  const Volume3D c({5, 4, 6}, 0.1);
  CHECK(sliding_mean(c, 4) == c);
}

TEST_CASE("even window centering") {
  // Side 4 covers two voxels before the center and one after.
  Volume3D line({6, 1, 1});
  for (Index x = 0; x < 6; ++x) line(x, 0, 0) = static_cast<double>(x);
  const Volume3D m = sliding_mean(line, 4);
  CHECK(m(0, 0, 0) == doctest::Approx((0 + 1) / 2.0));
  CHECK(m(2, 0, 0) == doctest::Approx((0 + 1 + 2 + 3) / 4.0));
  CHECK(m(5, 0, 0) == doctest::Approx((3 + 4 + 5) / 3.0));
}

TEST_CASE("sliding_mean_integral") {
  const Volume3D w = noise({12, 12, 12}, 33);
  CHECK(sliding_mean_integral(w, 1) == w);
  CHECK(max_abs_diff(sliding_mean_integral(w, 5), sliding_mean(w, 5)) <= 1e-8);
  for (Index side : {2, 3, 8, 30})
    CHECK(max_abs_diff(sliding_mean_integral(w, side), oracle::windowed_means(w, side)) <= 1e-10);

  for (double c : {0.1, 1.0 / 3.0, -7.25, 1e6})
    CHECK(sliding_mean_integral(Volume3D({7, 9, 5}, c), 4) == Volume3D({7, 9, 5}, c));

  const Volume3D aniso = noise({3, 17, 6}, 2);
  CHECK(max_abs_diff(sliding_mean_integral(aniso, 4), oracle::windowed_means(aniso, 4)) <= 1e-10);
}

TEST_CASE("coarse-graining properties") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<Index> dim(1, 11);
  for (int trial = 0; trial < 40; ++trial) {
    const Shape3 s{dim(rng), dim(rng), dim(rng)};
    const Volume3D v = testing::random_volume(s, rng, -5.0, 5.0);
    const Index f = 1 + trial % 4;
    const double a = 0.5 + trial * 0.1, c = -3.0 + trial * 0.2;
    const Volume3D av = affine(v, a, c);
    const double lo = v.array().minCoeff(), hi = v.array().maxCoeff();

    CAPTURE(trial);
    // Mean preservation against the padded lattice.
    CHECK(testing::rel_diff(spatial_mean(block_downsample(v, f)), spatial_mean(pad_to_multiple(v, f))) <= 1e-12);

    for (const auto& kernel : {+[](const Volume3D& x, Index k) { return block_downsample(x, k); },
                               +[](const Volume3D& x, Index k) { return sliding_mean(x, k); },
                               +[](const Volume3D& x, Index k) { return sliding_mean_integral(x, k); }}) {
      const Volume3D out = kernel(v, f + 1);
      CHECK(out.array().minCoeff() >= lo);
      CHECK(out.array().maxCoeff() <= hi);
      CHECK(max_abs_diff(kernel(av, f + 1), affine(out, a, c)) <= 1e-10);
    }
  }
}
