#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "compactseg/errors.hpp"
#include "compactseg/fields.hpp"
#include "compactseg/kernel.hpp"

namespace compactseg {

/// Overlap ratio 2|A n B| / (|A| + |B|). Two empty masks agree perfectly.
inline double dice(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "dice");
  std::size_t inter = 0, total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    total += static_cast<std::size_t>(a[i] != 0) + static_cast<std::size_t>(b[i] != 0);
  }
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

/// |A n B| / |A u B|. Two empty masks agree perfectly.
inline double iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

enum class PerimeterScheme { Anisotropic, Isotropic, CalibratedGaussian };

inline std::string_view to_string(PerimeterScheme s) {
  switch (s) {
    case PerimeterScheme::Anisotropic: return "anisotropic";
    case PerimeterScheme::Isotropic: return "isotropic";
    case PerimeterScheme::CalibratedGaussian: return "calibrated-gaussian";
  }
  return "?";
}

inline PerimeterScheme parse_perimeter_scheme(std::string_view name) {
  if (name == "anisotropic") return PerimeterScheme::Anisotropic;
  if (name == "isotropic") return PerimeterScheme::Isotropic;
  if (name == "calibrated-gaussian" || name == "gaussian") return PerimeterScheme::CalibratedGaussian;
  throw ConfigError("unknown perimeter scheme '" + std::string(name) + "'");
}

/// Discrete total variation with forward differences. The last row and
/// column have no forward neighbour and contribute no difference there, so
/// constant fields score 0 and edges along the image border are not counted.
inline double discrete_tv(const ScalarField& u, PerimeterScheme scheme) {
  if (scheme == PerimeterScheme::CalibratedGaussian) {
    throw ConfigError("discrete_tv supports the anisotropic and isotropic schemes only");
  }
  const int w = u.width();
  const int h = u.height();
  return pairwise_sum(0, u.size(), [&](std::size_t i) {
    const int x = static_cast<int>(i % static_cast<std::size_t>(w));
    const int y = static_cast<int>(i / static_cast<std::size_t>(w));
    const double v = u[i];
    const double dx = x + 1 < w ? u(x + 1, y) - v : 0.0;
    const double dy = y + 1 < h ? u(x, y + 1) - v : 0.0;
    return scheme == PerimeterScheme::Anisotropic ? std::abs(dx) + std::abs(dy) : std::hypot(dx, dy);
  });
}

inline double discrete_tv(const BinaryMask& m, PerimeterScheme scheme) { return discrete_tv(to_field(m), scheme); }

/// Gaussian boundary measure together with the constant that converts it to
/// perimeter in pixels.
struct GaussianPerimeter {
  GaussianKernel kernel;
  double constant;

  static GaussianPerimeter make(double sigma = 2.0, int n = 6, int grid = 128) {
    GaussianKernel k(sigma, n);
    const double c = calibrate_perimeter_constant(k, grid);
    return {std::move(k), c};
  }

  [[nodiscard]] double perimeter(const ScalarField& u) const { return td_boundary_measure(u, kernel) / constant; }
};

inline const GaussianPerimeter& default_gaussian_perimeter() {
  static const GaussianPerimeter p = GaussianPerimeter::make();
  return p;
}

/// Perimeter^2 / area. The disk attains the minimum 4 pi in the continuum.
inline double compactness(const BinaryMask& mask, PerimeterScheme scheme = PerimeterScheme::CalibratedGaussian,
                          const GaussianPerimeter& gaussian = default_gaussian_perimeter()) {
  const auto area = static_cast<double>(count(mask));
  if (area <= 0.0) throw EmptyRegion("compactness of an empty mask");
  const ScalarField u = to_field(mask);
  const double per =
      scheme == PerimeterScheme::CalibratedGaussian ? gaussian.perimeter(u) : discrete_tv(u, scheme);
  return per * per / area;
}

/// 4 pi area / perimeter^2, equal to 1 for a continuum disk.
inline double circularity(const BinaryMask& mask, PerimeterScheme scheme = PerimeterScheme::CalibratedGaussian,
                          const GaussianPerimeter& gaussian = default_gaussian_perimeter()) {
  return 4.0 * std::numbers::pi / compactness(mask, scheme, gaussian);
}

}  // namespace compactseg
