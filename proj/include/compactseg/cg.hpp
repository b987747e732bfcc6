#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "compactseg/fields.hpp"

namespace compactseg {

struct CgResult {
  int iterations = 0;
  double residual = 0.0;  ///< final ||b - A x||_2 of the returned iterate
  bool converged = false;
};

/// Conjugate gradient for a symmetric positive-definite operator given as a
/// callable apply(in, out). Stops when ||r|| <= tol * ||b||. On failure to
/// converge, x holds the iterate with the smallest residual seen. The
/// optional observer sees every iterate.
template <typename ApplyOp>
CgResult conjugate_gradient(ApplyOp&& apply, const ScalarField& b, ScalarField& x, double tol, int max_iters,
                            const std::function<void(int, const ScalarField&)>& observe = {}) {
  require_same_shape(b, x, "conjugate_gradient");
  const std::size_t n = b.size();
  ScalarField ax(b.shape());
  apply(x, ax);
  ScalarField r(b.shape());
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];

  const double b_norm = std::sqrt(inner_product(b, b));
  const double target = tol * (b_norm > 0.0 ? b_norm : 1.0);
  double rr = inner_product(r, r);

  CgResult res;
  res.residual = std::sqrt(rr);
  if (res.residual <= target) {
    res.converged = true;
    return res;
  }

  ScalarField p = r;
  ScalarField ap(b.shape());
  ScalarField best = x;
  double best_rr = rr;
  for (int it = 1; it <= max_iters; ++it) {
    apply(p, ap);
    const double pap = inner_product(p, ap);
    if (!(pap > 0.0)) break;  // operator not positive definite along p
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_next = inner_product(r, r);
    res.iterations = it;
    if (observe) observe(it, x);
    if (rr_next < best_rr) {
      best_rr = rr_next;
      best = x;
    }
    if (std::sqrt(rr_next) <= target) {
      res.residual = std::sqrt(rr_next);
      res.converged = true;
      return res;
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  x = std::move(best);
  res.residual = std::sqrt(best_rr);
  return res;
}

}  // namespace compactseg
