#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

using namespace compactseg;

namespace {

/// Two 10x10 squares offset horizontally by 5: |a| = |b| = 100, overlap 50.
std::pair<BinaryMask, BinaryMask> half_overlap() {
  return {rect_mask(40, 20, 5, 5, 10, 10), rect_mask(40, 20, 10, 5, 10, 10)};
}

}  // namespace

TEST(Dice, IdenticalIsOne) {
  const BinaryMask a = disk_mask(30, 30, 15, 15, 8);
  EXPECT_EQ(dice(a, a), 1.0);
}

TEST(Dice, DisjointIsZero) {
  EXPECT_EQ(dice(rect_mask(20, 20, 0, 0, 5, 5), rect_mask(20, 20, 10, 10, 5, 5)), 0.0);
}

TEST(Dice, HalfOverlap) {
  const auto [a, b] = half_overlap();
  ASSERT_EQ(count(a), 100u);
  ASSERT_EQ(count(b), 100u);
  EXPECT_DOUBLE_EQ(dice(a, b), 0.5);
}

TEST(Dice, BothEmptyIsOne) { EXPECT_EQ(dice(BinaryMask(4, 4), BinaryMask(4, 4)), 1.0); }

TEST(Dice, ShapeMismatchThrows) { EXPECT_THROW(dice(BinaryMask(4, 4), BinaryMask(4, 5)), DimensionMismatch); }

TEST(Iou, IdenticalIsOne) {
  const BinaryMask a = disk_mask(30, 30, 15, 15, 8);
  EXPECT_EQ(iou(a, a), 1.0);
}

TEST(Iou, HalfOverlap) {
  const auto [a, b] = half_overlap();
  EXPECT_DOUBLE_EQ(iou(a, b), 1.0 / 3.0);
}

TEST(Iou, DiceIdentity) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const BinaryMask a = testutil::random_nonempty_mask(9, 8, rng, 0.3);
    const BinaryMask b = testutil::random_nonempty_mask(9, 8, rng, 0.6);
    const double d = dice(a, b);
    EXPECT_NEAR(d / (2.0 - d), iou(a, b), 1e-12);
  }
}

TEST(DiscreteTv, ConstantFieldIsZero) {
  for (double c : {0.0, 0.4, 1.0}) {
    EXPECT_EQ(discrete_tv(ScalarField(6, 4, c), PerimeterScheme::Anisotropic), 0.0);
    EXPECT_EQ(discrete_tv(ScalarField(6, 4, c), PerimeterScheme::Isotropic), 0.0);
  }
}

TEST(DiscreteTv, SinglePixelAnisotropic) {
  BinaryMask m(7, 7);
  m(3, 3) = 1;
  EXPECT_DOUBLE_EQ(discrete_tv(m, PerimeterScheme::Anisotropic), 4.0);
}

TEST(DiscreteTv, RectangleCountsBoundaryEdges) {
  EXPECT_DOUBLE_EQ(discrete_tv(rect_mask(20, 20, 3, 4, 7, 5), PerimeterScheme::Anisotropic), 2.0 * (7 + 5));
  // edges along the image border are not counted
  EXPECT_DOUBLE_EQ(discrete_tv(rect_mask(20, 20, 0, 0, 7, 5), PerimeterScheme::Anisotropic), 7.0 + 5.0);
}

TEST(DiscreteTv, NormEquivalence) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 100; ++t) {
    const ScalarField u = testutil::random_field(8, 6, rng, -1, 1);
    const double iso = discrete_tv(u, PerimeterScheme::Isotropic);
    const double aniso = discrete_tv(u, PerimeterScheme::Anisotropic);
    EXPECT_LE(iso, aniso + 1e-12);
    EXPECT_LE(aniso, std::sqrt(2.0) * iso + 1e-12);
  }
}

TEST(DiscreteTv, GaussianSchemeRejected) {
  EXPECT_THROW(discrete_tv(ScalarField(3, 3), PerimeterScheme::CalibratedGaussian), ConfigError);
}

TEST(Compactness, AnisotropicSquare) {
  const BinaryMask sq = rect_mask(64, 64, 16, 16, 32, 32);
  EXPECT_DOUBLE_EQ(compactness(sq, PerimeterScheme::Anisotropic), 16.0);
}

TEST(Compactness, CalibratedDiskNearFourPi) {
  const double c = compactness(centered_disk(128, 20.0));
  EXPECT_LT(std::abs(c - 4.0 * std::numbers::pi) / (4.0 * std::numbers::pi), 0.10);
}

TEST(Compactness, TranslationInvariant) {
  const BinaryMask base = blob_with_protrusions(96, 96, 45, 47, 14, 3, 10, 2);
  const double c0 = compactness(base);
  for (auto [dx, dy] : {std::pair{4, -3}, {-6, 2}}) {
    for (PerimeterScheme s : {PerimeterScheme::CalibratedGaussian, PerimeterScheme::Anisotropic,
                              PerimeterScheme::Isotropic}) {
      EXPECT_LT(testutil::rel_diff(compactness(translate(base, dx, dy), s), compactness(base, s)), 1e-10);
    }
  }
  EXPECT_GT(c0, 4.0 * std::numbers::pi);
}

TEST(Compactness, DiskScaleTrend) {
  std::vector<double> values;
  for (double r : {10.0, 20.0, 40.0}) values.push_back(compactness(centered_disk(static_cast<int>(6.4 * r), r)));
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  EXPECT_LT((*hi - *lo) / *lo, 0.10);
}

TEST(Compactness, DiskBeatsSquareAndRectangleOfEqualArea) {
  // area 1600: 40x40 square, 57x28 rectangle (1596), disk radius sqrt(1600/pi)
  const BinaryMask sq = rect_mask(128, 128, 44, 44, 40, 40);
  const BinaryMask rect = rect_mask(128, 128, 36, 50, 57, 28);
  const BinaryMask disk = centered_disk(128, std::sqrt(1600.0 / std::numbers::pi));
  const double cd = compactness(disk);
  EXPECT_LT(cd, compactness(sq));
  EXPECT_LT(cd, compactness(rect));
  EXPECT_LT(compactness(sq), compactness(rect));
}

TEST(Compactness, EmptyMaskThrows) { EXPECT_THROW(compactness(BinaryMask(8, 8)), EmptyRegion); }

TEST(Compactness, CircularityIsReciprocal) {
  const BinaryMask d = centered_disk(128, 25);
  EXPECT_NEAR(circularity(d) * compactness(d), 4.0 * std::numbers::pi, 1e-12);
}

TEST(PerimeterScheme, NamesRoundTrip) {
  for (PerimeterScheme s :
       {PerimeterScheme::Anisotropic, PerimeterScheme::Isotropic, PerimeterScheme::CalibratedGaussian}) {
    EXPECT_EQ(parse_perimeter_scheme(to_string(s)), s);
  }
  EXPECT_THROW(parse_perimeter_scheme("hexagonal"), ConfigError);
}
