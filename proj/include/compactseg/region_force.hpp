#pragma once

#include <utility>

#include "compactseg/fields.hpp"

namespace compactseg {

/// Two-phase fidelity f = (I - c1)^2 - (I - c2)^2. Negative where the pixel
/// is closer to the foreground mean c1. Equal means give f == 0 everywhere;
/// see is_degenerate_force().
inline ScalarField two_phase_force(const ScalarField& image, double c1, double c2) {
  return map(image, [c1, c2](double v) { return (v - c1) * (v - c1) - (v - c2) * (v - c2); });
}

inline bool is_degenerate_force(double c1, double c2) { return c1 == c2; }

struct RegionMeans {
  double foreground = 0.5;
  double background = 0.5;
};

/// Mean intensity inside and outside the mask; 0.5 for an empty side.
inline RegionMeans update_means(const ScalarField& image, const BinaryMask& mask) {
  require_same_shape(image, mask, "update_means");
  double in = 0.0, out = 0.0;
  std::size_t n_in = 0, n_out = 0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (mask[i]) {
      in += image[i];
      ++n_in;
    } else {
      out += image[i];
      ++n_out;
    }
  }
  RegionMeans m;
  if (n_in > 0) m.foreground = in / static_cast<double>(n_in);
  if (n_out > 0) m.background = out / static_cast<double>(n_out);
  return m;
}

/// f = -o. Lambda is applied by the solver.
inline ScalarField force_from_logits(const ScalarField& logits) {
  return map(logits, [](double o) { return -o; });
}

}  // namespace compactseg
