#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

using namespace compactseg;
using testutil::brute_boundary_measure;
using testutil::brute_convolve;

TEST(GaussianKernel, RejectsBadParameters) {
  EXPECT_THROW(GaussianKernel(0.0, 3), ConfigError);
  EXPECT_THROW(GaussianKernel(-1.0, 3), ConfigError);
  EXPECT_THROW(GaussianKernel(1.0, 0), ConfigError);
}

TEST(GaussianKernel, SigmaOneHalfWidthOneWeights) {
  const GaussianKernel k = make_gaussian_kernel(1.0, 1);
  // exp(-r^2/2) on the 3x3 grid, normalized
  const double e1 = std::exp(-0.5), e2 = std::exp(-1.0);
  const double total = 1.0 + 4.0 * e1 + 4.0 * e2;
  EXPECT_NEAR(k.weight(0, 0), 1.0 / total, 1e-15);
  EXPECT_NEAR(k.weight(1, 0), e1 / total, 1e-15);
  EXPECT_NEAR(k.weight(1, 1), e2 / total, 1e-15);
  // quoted 4-digit values; the edge weight is 0.12384
  EXPECT_NEAR(k.weight(0, 0), 0.2042, 1e-4);
  EXPECT_NEAR(k.weight(0, 1), 0.1239, 1e-4);
  EXPECT_NEAR(k.weight(-1, 1), 0.0751, 1e-4);
}

TEST(GaussianKernel, NormalizedPositiveSymmetric) {
  for (double sigma : {0.5, 1.0, 2.0, 3.7}) {
    for (int n : {1, 3, 6, 11}) {
      const GaussianKernel k(sigma, n);
      double total = 0.0;
      for (int j = -n; j <= n; ++j) {
        for (int i = -n; i <= n; ++i) {
          const double w = k.weight(i, j);
          total += w;
          EXPECT_GT(w, 0.0);
          EXPECT_EQ(w, k.weight(-i, j));
          EXPECT_EQ(w, k.weight(i, -j));
          EXPECT_EQ(w, k.weight(j, i));
        }
      }
      EXPECT_NEAR(total, 1.0, 1e-14);
    }
  }
}

TEST(GaussianKernel, FlatLimitIsUniform) {
  const GaussianKernel k(1e6, 2);
  for (int j = -2; j <= 2; ++j) {
    for (int i = -2; i <= 2; ++i) EXPECT_NEAR(k.weight(i, j), 1.0 / 25.0, 1e-12);
  }
}

TEST(GaussianKernel, DefaultHalfWidth) {
  EXPECT_EQ(default_half_width(2.0), 6);
  EXPECT_EQ(default_half_width(0.1), 1);
  EXPECT_EQ(make_gaussian_kernel(1.5).half_width(), 5);
}

TEST(Convolve, ZerosStayZero) {
  const ScalarField out = convolve_zero_pad(ScalarField(12, 9), make_gaussian_kernel(1.5));
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(Convolve, ImpulseReproducesKernel) {
  const GaussianKernel k(1.3, 3);
  ScalarField f(15, 15);
  f(7, 7) = 1.0;
  const ScalarField out = convolve_zero_pad(f, k);
  for (int y = 0; y < 15; ++y) {
    for (int x = 0; x < 15; ++x) {
      const int dx = x - 7, dy = y - 7;
      const double expect = std::abs(dx) <= 3 && std::abs(dy) <= 3 ? k.weight(dx, dy) : 0.0;
      EXPECT_NEAR(out(x, y), expect, 1e-15);
    }
  }
}

TEST(Convolve, OnesLoseMassOnlyAtBorder) {
  const GaussianKernel k(2.0, 6);
  const ScalarField out = convolve_zero_pad(ScalarField(40, 30, 1.0), k);
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 40; ++x) {
      const bool interior = x >= 6 && x < 34 && y >= 6 && y < 24;
      if (interior) {
        EXPECT_NEAR(out(x, y), 1.0, 1e-14);
      } else {
        EXPECT_LT(out(x, y), 1.0);
      }
    }
  }
}

TEST(Convolve, MatchesDirectTwoDimensionalSum) {
  std::mt19937_64 rng(11);
  for (auto [w, h, sigma, n] : {std::tuple{17, 13, 1.0, 3}, {9, 21, 2.0, 6}, {5, 4, 0.7, 4}}) {
    const ScalarField f = testutil::random_field(w, h, rng, -1, 1);
    const ScalarField fast = convolve_zero_pad(f, GaussianKernel(sigma, n));
    const ScalarField ref = brute_convolve(f, sigma, n);
    EXPECT_LT(max_abs_diff(fast, ref), 1e-13);
  }
}

TEST(Convolve, SelfAdjoint) {
  std::mt19937_64 rng(12);
  const GaussianKernel k(2.0, 6);
  for (int t = 0; t < 20; ++t) {
    const ScalarField a = testutil::random_field(31, 23, rng, -1, 1);
    const ScalarField b = testutil::random_field(31, 23, rng, -1, 1);
    const double ab = inner_product(a, convolve_zero_pad(b, k));
    const double ba = inner_product(b, convolve_zero_pad(a, k));
    EXPECT_LT(testutil::rel_diff(ab, ba), 1e-10);
  }
}

TEST(BoundaryMeasure, EmptyIsZero) {
  EXPECT_EQ(td_boundary_measure(ScalarField(20, 20), GaussianKernel(2.0, 6)), 0.0);
}

TEST(BoundaryMeasure, FullDomainCountsBorderLoss) {
  const GaussianKernel k(2.0, 6);
  const ScalarField ones(30, 25, 1.0);
  const ScalarField cover = brute_convolve(ones, 2.0, 6);
  double lost = 0.0;
  for (double c : cover) lost += 1.0 - c;
  EXPECT_GT(lost, 0.0);
  EXPECT_NEAR(td_boundary_measure(ones, k), lost, 1e-10);
}

TEST(BoundaryMeasure, MatchesDirectSumOnRandomFields) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 5; ++t) {
    const ScalarField u = testutil::random_field(14, 11, rng);
    EXPECT_NEAR(td_boundary_measure(u, GaussianKernel(1.5, 4)), brute_boundary_measure(u, 1.5, 4), 1e-10);
  }
}

TEST(BoundaryMeasure, DiskRatioMatchesCalibration) {
  const double q = brute_boundary_measure(to_field(centered_disk(128, 20.0)), 2.0, 6);
  const double ratio = q / (2.0 * std::numbers::pi * 20.0);
  const double c = calibrate_perimeter_constant(2.0, 6);
  EXPECT_LT(std::abs(ratio - c) / c, 0.05);
}

TEST(BoundaryMeasure, Concave) {
  std::mt19937_64 rng(14);
  const GaussianKernel k(2.0, 6);
  std::uniform_real_distribution<double> t01(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const ScalarField u = testutil::random_field(16, 16, rng);
    const ScalarField v = testutil::random_field(16, 16, rng);
    const double t = t01(rng);
    ScalarField mix(u.shape());
    for (std::size_t i = 0; i < u.size(); ++i) mix[i] = t * u[i] + (1 - t) * v[i];
    EXPECT_GE(td_boundary_measure(mix, k),
              t * td_boundary_measure(u, k) + (1 - t) * td_boundary_measure(v, k) - 1e-9);
  }
}

TEST(BoundaryMeasure, TranslationInvariantAwayFromBorder) {
  const GaussianKernel k(2.0, 6);
  const BinaryMask base = disk_mask(64, 64, 30.0, 31.0, 9.0);
  const double q0 = td_boundary_measure(to_field(base), k);
  for (auto [dx, dy] : {std::pair{3, -2}, {-7, 5}, {10, 10}}) {
    const double q = td_boundary_measure(to_field(translate(base, dx, dy)), k);
    EXPECT_LT(testutil::rel_diff(q, q0), 1e-10);
  }
}

TEST(Calibration, PositiveAndMeasuredValue) {
  const double c = calibrate_perimeter_constant(2.0, 6);
  EXPECT_GT(c, 0.0);
  // the oracle: boundary measure of the grid/4 disk over 2 pi r, by direct sum
  const double q = brute_boundary_measure(to_field(centered_disk(128, 32.0)), 2.0, 6);
  EXPECT_NEAR(c, q / (2.0 * std::numbers::pi * 32.0), 1e-10);
}

TEST(Calibration, ScaleInvariantWhenGridDoubles) {
  const GaussianKernel k(2.0, 6);
  const double c1 = calibrate_perimeter_constant(k, 128);
  const double c2 = calibrate_perimeter_constant(k, 256);
  EXPECT_LT(std::abs(c1 - c2) / c1, 0.03);
}

TEST(Calibration, RoughlyLinearInSigma) {
  // c / sigma stays within a narrow band for sigma in [1, 4] with n = 3 sigma
  std::vector<double> ratio;
  for (double sigma : {1.0, 2.0, 3.0, 4.0}) {
    ratio.push_back(calibrate_perimeter_constant(sigma, static_cast<int>(3 * sigma), 256) / sigma);
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  EXPECT_LT((*hi - *lo) / *lo, 0.05);
}

TEST(Calibration, RejectsTooSmallGrid) {
  EXPECT_THROW(calibrate_perimeter_constant(GaussianKernel(2.0, 6), 20), ConfigError);
}
