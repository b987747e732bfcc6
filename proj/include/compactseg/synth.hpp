#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "compactseg/errors.hpp"
#include "compactseg/fields.hpp"

namespace compactseg {

/// Counter-based random numbers: every draw is a pure function of
/// (seed, stream, index), so results do not depend on iteration order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  [[nodiscard]] std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const {
    std::uint64_t z = mix(seed_ ^ mix(stream + 0x632be59bd9b4e019ULL)) + index * 0x9e3779b97f4a7c15ULL;
    return mix(z);
  }

  /// Uniform in (0, 1].
  [[nodiscard]] double uniform(std::uint64_t stream, std::uint64_t index) const {
    return (static_cast<double>(bits(stream, index) >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two independent streams.
  [[nodiscard]] double normal(std::uint64_t stream, std::uint64_t index) const {
    const double u1 = uniform(2 * stream, index);
    const double u2 = uniform(2 * stream + 1, index);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

inline BinaryMask disk_mask(int w, int h, double cx, double cy, double r) {
  if (!(r > 0.0)) throw ConfigError("disk radius must be > 0");
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      m(x, y) = dx * dx + dy * dy <= r * r ? 1 : 0;
    }
  }
  return m;
}

/// Axis-aligned rectangle [x0, x0+rw) x [y0, y0+rh), clipped to the grid.
inline BinaryMask rect_mask(int w, int h, int x0, int y0, int rw, int rh) {
  BinaryMask m(w, h);
  for (int y = std::max(0, y0); y < std::min(h, y0 + rh); ++y) {
    for (int x = std::max(0, x0); x < std::min(w, x0 + rw); ++x) m(x, y) = 1;
  }
  return m;
}

/// Thick line segment: pixels within half_width of the segment (x0,y0)-(x1,y1).
inline BinaryMask capsule_mask(int w, int h, double x0, double y0, double x1, double y1, double half_width) {
  BinaryMask m(w, h);
  const double vx = x1 - x0, vy = y1 - y0;
  const double len2 = vx * vx + vy * vy;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double t = len2 > 0.0 ? ((x - x0) * vx + (y - y0) * vy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double dx = x - (x0 + t * vx), dy = y - (y0 + t * vy);
      m(x, y) = dx * dx + dy * dy <= half_width * half_width ? 1 : 0;
    }
  }
  return m;
}

inline BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask_union");
  BinaryMask out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
  return out;
}

/// Shift by integer pixels; content moved off the grid is dropped.
inline BinaryMask translate(const BinaryMask& m, int dx, int dy) {
  BinaryMask out(m.shape());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m(x, y) && out.contains(x + dx, y + dy)) out(x + dx, y + dy) = 1;
    }
  }
  return out;
}

/// A disk with thin radial arms. `arms` arms of the given length and
/// half-width are spread evenly around the disk, starting at `phase`.
inline BinaryMask blob_with_protrusions(int w, int h, double cx, double cy, double r, int arms, double arm_length,
                                        double arm_half_width, double phase = 0.3) {
  BinaryMask m = disk_mask(w, h, cx, cy, r);
  for (int a = 0; a < arms; ++a) {
    const double theta = phase + 2.0 * std::numbers::pi * a / arms;
    const double ex = cx + (r + arm_length) * std::cos(theta);
    const double ey = cy + (r + arm_length) * std::sin(theta);
    m = mask_union(m, capsule_mask(w, h, cx, cy, ex, ey, arm_half_width));
  }
  return m;
}

/// The raw i.i.d. N(0, rho^2) perturbation, before any clamping.
inline ScalarField gaussian_noise_field(Shape shape, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0)) throw ConfigError("noise SD must be >= 0");
  const CounterRng rng(seed);
  ScalarField out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rho * rng.normal(0, i);
  return out;
}

/// image + N(0, rho^2) per pixel, clamped to [0,1].
inline ScalarField add_gaussian_noise(const ScalarField& image, double rho, std::uint64_t seed) {
  if (rho == 0.0) return image;
  const ScalarField noise = gaussian_noise_field(image.shape(), rho, seed);
  ScalarField out(image.shape());
  for (std::size_t i = 0; i < image.size(); ++i) out[i] = std::clamp(image[i] + noise[i], 0.0, 1.0);
  return out;
}

/// Each pixel independently replaced, with probability prob, by 0 or 1 at
/// equal odds.
inline ScalarField add_salt_pepper(const ScalarField& image, double prob, std::uint64_t seed) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("salt-and-pepper probability must lie in [0,1]");
  const CounterRng rng(seed);
  ScalarField out = image;
  for (std::size_t i = 0; i < out.size(); ++i) {
    // uniform() is in (0,1], so prob == 1 corrupts every pixel and prob == 0 none.
    if (1.0 - rng.uniform(16, i) < prob) out[i] = rng.uniform(17, i) <= 0.5 ? 0.0 : 1.0;
  }
  return out;
}

/// One ground truth plus its noisy observation.
struct SyntheticCase {
  ScalarField image;
  BinaryMask truth;
};

/// Seed of the bundled ten-image noisy-disk benchmark.
inline constexpr std::uint64_t kBundledCorpusSeed = 7;

/// Noisy disks of varying radius and position on a size x size grid.
/// Foreground intensity 0.7, background 0.3, Gaussian noise SD rho plus
/// salt-and-pepper with probability sp.
inline std::vector<SyntheticCase> noisy_disk_corpus(int count, std::uint64_t seed, int size = 96, double rho = 0.3,
                                                    double sp = 0.1) {
  const CounterRng rng(seed);
  std::vector<SyntheticCase> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    const auto idx = static_cast<std::uint64_t>(c);
    const double r = size * (0.18 + 0.10 * rng.uniform(100, idx));
    const double margin = r + 6.0;
    const double cx = margin + (size - 2.0 * margin) * rng.uniform(101, idx);
    const double cy = margin + (size - 2.0 * margin) * rng.uniform(102, idx);
    BinaryMask truth = disk_mask(size, size, cx, cy, r);
    ScalarField clean(truth.shape());
    for (std::size_t i = 0; i < clean.size(); ++i) clean[i] = truth[i] ? 0.7 : 0.3;
    const std::uint64_t case_seed = rng.bits(103, idx);
    ScalarField noisy = add_salt_pepper(add_gaussian_noise(clean, rho, case_seed), sp, case_seed + 1);
    out.push_back({std::move(noisy), std::move(truth)});
  }
  return out;
}

/// A blob with four thin arms on a size x size grid, drawn at intensity
/// 0.5 + contrast on a 0.5 - contrast background. With means c1 = 1, c2 = 0
/// the two-phase force is -2 contrast inside the blob and +2 contrast outside.
inline SyntheticCase protrusion_blob_case(int size = 128, double contrast = 0.06) {
  if (size < 32) throw ConfigError("blob grid must be at least 32 pixels");
  const double c = (size - 1) / 2.0;
  const double scale = size / 128.0;
  BinaryMask truth = blob_with_protrusions(size, size, c, c, 26.0 * scale, 4, 22.0 * scale, 2.0 * scale);
  ScalarField image(truth.shape());
  for (std::size_t i = 0; i < image.size(); ++i) image[i] = truth[i] ? 0.5 + contrast : 0.5 - contrast;
  return {std::move(image), std::move(truth)};
}

}  // namespace compactseg
