#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "compactseg/errors.hpp"
#include "compactseg/fields.hpp"

namespace compactseg {

/// Sampled, truncated and renormalized 2-D Gaussian of size (2n+1)x(2n+1).
/// The sampled Gaussian factors exactly, so only the normalized 1-D profile
/// is stored; weight(i, j) = taps[i+n] * taps[j+n].
class GaussianKernel {
 public:
  GaussianKernel(double sigma, int half_width) : sigma_(sigma), n_(half_width) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ConfigError("kernel sigma must be positive, got " + std::to_string(sigma));
    }
    if (half_width < 1) {
      throw ConfigError("kernel half width must be >= 1, got " + std::to_string(half_width));
    }
    taps_.resize(static_cast<std::size_t>(2 * n_ + 1));
    double total = 0.0;
    for (int i = -n_; i <= n_; ++i) {
      const double w = std::exp(-0.5 * i * i / (sigma_ * sigma_));
      taps_[static_cast<std::size_t>(i + n_)] = w;
      total += w;
    }
    for (double& w : taps_) w /= total;
  }

  [[nodiscard]] double sigma() const { return sigma_; }
  [[nodiscard]] int half_width() const { return n_; }
  [[nodiscard]] int size() const { return 2 * n_ + 1; }
  [[nodiscard]] const std::vector<double>& taps() const { return taps_; }

  /// 2-D weight at offset (i, j), |i|,|j| <= n.
  [[nodiscard]] double weight(int i, int j) const {
    return taps_[static_cast<std::size_t>(i + n_)] * taps_[static_cast<std::size_t>(j + n_)];
  }

 private:
  double sigma_;
  int n_;
  std::vector<double> taps_;
};

/// Truncation radius used when none is given.
inline int default_half_width(double sigma) {
  return std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
}

inline GaussianKernel make_gaussian_kernel(double sigma, int n) { return {sigma, n}; }
inline GaussianKernel make_gaussian_kernel(double sigma) {
  return {sigma, default_half_width(sigma)};
}

/// Convolution with zero extension outside the domain, as two separable
/// 1-D passes. Linear and self-adjoint for the symmetric kernel.
inline ScalarField convolve_zero_pad(const ScalarField& field, const GaussianKernel& k) {
  const int w = field.width();
  const int h = field.height();
  const int n = k.half_width();
  const auto& taps = k.taps();

  ScalarField tmp(field.shape());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int lo = std::max(-n, x - (w - 1));
      const int hi = std::min(n, x);
      double s = 0.0;
      for (int d = lo; d <= hi; ++d) s += taps[static_cast<std::size_t>(d + n)] * field(x - d, y);
      tmp(x, y) = s;
    }
  }

  ScalarField out(field.shape());
  std::vector<double> acc(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const int lo = std::max(-n, y - (h - 1));
    const int hi = std::min(n, y);
    for (int d = lo; d <= hi; ++d) {
      const double t = taps[static_cast<std::size_t>(d + n)];
      for (int x = 0; x < w; ++x) acc[static_cast<std::size_t>(x)] += t * tmp(x, y - d);
    }
    for (int x = 0; x < w; ++x) out(x, y) = acc[static_cast<std::size_t>(x)];
  }
  return out;
}

/// q = <u, G * (1 - u)>, the threshold-dynamics boundary measure. u is
/// extended by 0 outside the domain, so 1 - u is 1 there and G*(1-u) equals
/// 1 - G*u. A region touching the border pays for the kernel mass that
/// leaves the domain.
inline double td_boundary_measure(const ScalarField& u, const GaussianKernel& k) {
  const ScalarField smoothed = convolve_zero_pad(u, k);
  return pairwise_sum(0, u.size(), [&](std::size_t i) { return u[i] * (1.0 - smoothed[i]); });
}

/// Rasterized centered disk used for calibration.
inline BinaryMask centered_disk(int grid, double radius) {
  BinaryMask m(grid, grid);
  const double c = 0.5 * (grid - 1);
  for (int y = 0; y < grid; ++y) {
    for (int x = 0; x < grid; ++x) {
      const double dx = x - c;
      const double dy = y - c;
      m(x, y) = dx * dx + dy * dy <= radius * radius ? 1 : 0;
    }
  }
  return m;
}

/// Ratio between td_boundary_measure of a centered disk of radius grid/4 and
/// its continuum perimeter 2*pi*r. Divide a boundary measure by this to get
/// perimeter in pixels.
inline double calibrate_perimeter_constant(const GaussianKernel& k, int grid = 128) {
  if (grid < 4 * k.half_width() + 8) {
    throw ConfigError("calibration grid " + std::to_string(grid) + " too small for kernel half width " +
                      std::to_string(k.half_width()));
  }
  const double r = grid / 4.0;
  const double q = td_boundary_measure(to_field(centered_disk(grid, r)), k);
  return q / (2.0 * std::numbers::pi * r);
}

inline double calibrate_perimeter_constant(double sigma, int n, int grid = 128) {
  return calibrate_perimeter_constant(make_gaussian_kernel(sigma, n), grid);
}

}  // namespace compactseg
