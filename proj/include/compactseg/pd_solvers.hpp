#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "compactseg/errors.hpp"
#include "compactseg/fields.hpp"
#include "compactseg/kernel.hpp"
#include "compactseg/region_force.hpp"

namespace compactseg {

/// Parameters shared by PD-TD and PD-STD. Hard thresholding ignores epsilon
/// and tau.
struct SolverConfig {
  double lambda = 0.05;            ///< fidelity weight
  double epsilon = 0.02;           ///< entropy weight (PD-STD)
  double tau = 1.0;                ///< proximal step for p (PD-STD), may be +inf
  double sigma = 2.0;              ///< kernel standard deviation, pixels
  int kernel_half_width = 0;       ///< 0 selects ceil(3 sigma)
  int max_iters = 300;
  double stop_tol = 1e-4;          ///< PD-STD: max-norm change of u
  double final_threshold = 0.5;
  std::optional<double> initial_dual;  ///< overrides p0 = 2q/area of u0
  bool empty_fallback = true;      ///< PD-TD: keep previous iterate instead of throwing
  int calibration_grid = 128;

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && !std::isnan(v); };
    if (!positive(lambda)) throw ConfigError("lambda must be > 0");
    if (!positive(epsilon) || std::isinf(epsilon)) throw ConfigError("epsilon must be finite and > 0");
    if (!positive(tau)) throw ConfigError("tau must be > 0");
    if (!positive(sigma) || std::isinf(sigma)) throw ConfigError("sigma must be finite and > 0");
    if (kernel_half_width < 0) throw ConfigError("kernel half width must be >= 0");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (!(stop_tol >= 0.0)) throw ConfigError("stop_tol must be >= 0");
    if (!(final_threshold > 0.0 && final_threshold < 1.0)) {
      throw ConfigError("final_threshold must lie in (0,1)");
    }
    if (initial_dual && !std::isfinite(*initial_dual)) throw ConfigError("initial dual must be finite");
  }

  [[nodiscard]] GaussianKernel kernel() const {
    return {sigma, kernel_half_width > 0 ? kernel_half_width : default_half_width(sigma)};
  }
};

/// One row of the per-iteration trace. For PD solvers `dual` is p; ADMM
/// stores the area multiplier there.
struct TraceEntry {
  int iter = 0;
  double energy = 0.0;      ///< E_lambda(u^k) in estimator units
  double lagrangian = 0.0;  ///< L(u^k, p^k), or the augmented Lagrangian for ADMM
  double dual = 0.0;
};

struct SolveReport {
  std::string algorithm;
  BinaryMask mask;
  LabelField soft_u;
  double p_final = 0.0;
  int iters_used = 0;
  std::vector<TraceEntry> energy_trace;  ///< iters_used + 1 entries, initial state first
  double wall_time = 0.0;                ///< seconds
  bool converged = false;
  bool empty_region = false;             ///< PD-TD hit an empty iterate and kept the previous one
};

/// Passed to the optional per-iteration observer: the state before and after
/// one (u, p) update.
struct IterationView {
  int k;
  const ScalarField& u_prev;
  double p_prev;
  const ScalarField& u_next;
  double p_next;
};

using IterationObserver = std::function<void(const IterationView&)>;

// ---------------------------------------------------------------------------
// Single steps
// ---------------------------------------------------------------------------

/// phi = lambda f - p^2/4 + p G*(1 - 2u), with u extended by 0 outside the
/// domain so that G*(1 - 2u) = 1 - 2 G*u.
inline ScalarField phi_field(const ScalarField& f, const ScalarField& u, double p, double lambda,
                             const GaussianKernel& k) {
  require_same_shape(f, u, "phi_field");
  const ScalarField smoothed = convolve_zero_pad(u, k);
  ScalarField phi(f.shape());
  const double shift = p * p / 4.0;
  for (std::size_t i = 0; i < f.size(); ++i) phi[i] = lambda * f[i] - shift + p * (1.0 - 2.0 * smoothed[i]);
  return phi;
}

/// Hard threshold: 1 where phi < 0.
inline BinaryMask pdtd_u_update(const ScalarField& phi) {
  BinaryMask out(phi.shape());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = phi[i] < 0.0 ? 1 : 0;
  return out;
}

/// Exact maximizer of L(u, .): p = 2q / area.
inline double pdtd_p_update(const ScalarField& u, const GaussianKernel& k) {
  const double area = sum(u);
  if (!(area > 0.0)) throw EmptyRegion("dual update needs a nonempty region");
  return 2.0 * td_boundary_measure(u, k) / area;
}

inline double pdtd_p_update(const BinaryMask& u, const GaussianKernel& k) {
  return pdtd_p_update(to_field(u), k);
}

/// Logistic 1 / (1 + exp(t)) without overflow for large |t|.
inline double logistic_of_negative(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

/// Soft threshold: u = 1 / (1 + exp(phi / epsilon)).
inline LabelField pdstd_u_update(const ScalarField& phi, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  return map(phi, [epsilon](double v) { return logistic_of_negative(v / epsilon); });
}

/// Closed form of (p_prev + tau q) / (1 + tau area / 2) given q and area.
inline double proximal_dual_step(double q, double area, double p_prev, double tau) {
  if (std::isinf(tau)) return area > 0.0 ? 2.0 * q / area : p_prev;
  return (p_prev + tau * q) / (1.0 + tau * area / 2.0);
}

/// Proximal-point ascent on L(u, .) with step tau.
inline double pdstd_p_update(const ScalarField& u, double p_prev, double tau, const GaussianKernel& k) {
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  return proximal_dual_step(td_boundary_measure(u, k), sum(u), p_prev, tau);
}

/// L(u, p) = <lambda f - p^2/4, u> + p <u, G*(1-u)>
inline double lagrangian_value(const ScalarField& u, double p, const ScalarField& f, double lambda,
                               const GaussianKernel& k) {
  require_same_shape(u, f, "lagrangian_value");
  const double shift = p * p / 4.0;
  const double linear = pairwise_sum(0, u.size(), [&](std::size_t i) { return (lambda * f[i] - shift) * u[i]; });
  return linear + p * td_boundary_measure(u, k);
}

/// E(u) = lambda <f,u> + q^2 / area. The empty region scores the isoperimetric
/// floor 4 pi c^2 in the same estimator units.
inline double energy_value(const ScalarField& u, const ScalarField& f, double lambda, const GaussianKernel& k,
                           double perimeter_constant) {
  require_same_shape(u, f, "energy_value");
  const double area = sum(u);
  const double fidelity = lambda * inner_product(f, u);
  if (area <= 0.0) return fidelity + 4.0 * std::numbers::pi * perimeter_constant * perimeter_constant;
  const double q = td_boundary_measure(u, k);
  return fidelity + q * q / area;
}

inline double energy_value(const ScalarField& u, const ScalarField& f, double lambda, const GaussianKernel& k) {
  return energy_value(u, f, lambda, k, calibrate_perimeter_constant(k));
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

namespace detail {

/// Convolution bookkeeping for one solve: one convolution of u per
/// evaluation gives G*(1-u), G*(1-2u), q and the area.
class KernelProbe {
 public:
  explicit KernelProbe(const GaussianKernel& k) : kernel_(k) {}

  struct Eval {
    ScalarField smoothed;  ///< G*u
    double q = 0.0;
    double area = 0.0;
  };

  [[nodiscard]] Eval evaluate(const ScalarField& u) const {
    Eval e{convolve_zero_pad(u, kernel_), 0.0, sum(u)};
    e.q = pairwise_sum(0, u.size(), [&](std::size_t i) { return u[i] * (1.0 - e.smoothed[i]); });
    return e;
  }

  [[nodiscard]] ScalarField phi(const ScalarField& f, const Eval& e, double p, double lambda) const {
    ScalarField out(f.shape());
    const double shift = p * p / 4.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      out[i] = lambda * f[i] - shift + p * (1.0 - 2.0 * e.smoothed[i]);
    }
    return out;
  }

 private:
  const GaussianKernel& kernel_;
};

struct Objective {
  const ScalarField& f;
  double lambda;
  double floor;  ///< energy of the empty region

  [[nodiscard]] double fidelity(const ScalarField& u) const { return lambda * inner_product(f, u); }
  [[nodiscard]] double energy(const ScalarField& u, const KernelProbe::Eval& e) const {
    return fidelity(u) + (e.area > 0.0 ? e.q * e.q / e.area : floor);
  }
  [[nodiscard]] double lagrangian(const ScalarField& u, const KernelProbe::Eval& e, double p) const {
    return fidelity(u) - p * p * e.area / 4.0 + p * e.q;
  }
};

inline ScalarField default_initial_label(const ScalarField& f) {
  BinaryMask m(f.shape());
  for (std::size_t i = 0; i < f.size(); ++i) m[i] = f[i] < 0.0 ? 1 : 0;
  if (count(m) == 0) {
    const double cx = 0.5 * (f.width() - 1);
    const double cy = 0.5 * (f.height() - 1);
    const double r = std::min(f.width(), f.height()) / 4.0;
    for (int y = 0; y < f.height(); ++y) {
      for (int x = 0; x < f.width(); ++x) {
        m(x, y) = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r ? 1 : 0;
      }
    }
  }
  return to_field(m);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// PD-TD: alternate hard thresholding of phi and the exact dual update until
/// u stops changing or max_iters is reached.
inline SolveReport run_pdtd(const ScalarField& f, const SolverConfig& cfg,
                            const std::optional<BinaryMask>& u0 = std::nullopt,
                            const IterationObserver& observer = {}) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const GaussianKernel k = cfg.kernel();
  const double c = calibrate_perimeter_constant(k, cfg.calibration_grid);
  const detail::KernelProbe probe(k);
  const detail::Objective obj{f, cfg.lambda, 4.0 * std::numbers::pi * c * c};

  ScalarField u;
  if (u0) {
    require_same_shape(*u0, f, "run_pdtd initial mask");
    u = to_field(*u0);
  } else {
    u = detail::default_initial_label(f);
  }
  auto eval = probe.evaluate(u);
  double p = cfg.initial_dual ? *cfg.initial_dual : (eval.area > 0.0 ? 2.0 * eval.q / eval.area : 0.0);

  SolveReport rep;
  rep.algorithm = "pd-td";
  rep.energy_trace.push_back({0, obj.energy(u, eval), obj.lagrangian(u, eval, p), p});

  for (int it = 0; it < cfg.max_iters; ++it) {
    const ScalarField phi = probe.phi(f, eval, p, cfg.lambda);
    ScalarField next = to_field(pdtd_u_update(phi));
    auto next_eval = probe.evaluate(next);
    if (next_eval.area <= 0.0) {
      if (!cfg.empty_fallback) throw EmptyRegion("PD-TD iterate " + std::to_string(it + 1) + " is empty");
      rep.empty_region = true;
      break;
    }
    const double p_next = 2.0 * next_eval.q / next_eval.area;
    if (observer) observer({it, u, p, next, p_next});

    const bool fixed_point = next == u;
    u = std::move(next);
    eval = std::move(next_eval);
    p = p_next;
    rep.iters_used = it + 1;
    rep.energy_trace.push_back({it + 1, obj.energy(u, eval), obj.lagrangian(u, eval, p), p});
    if (fixed_point) {
      rep.converged = true;
      break;
    }
  }

  rep.soft_u = u;
  rep.mask = threshold(u, cfg.final_threshold);
  rep.p_final = p;
  rep.wall_time = detail::seconds_since(t0);
  return rep;
}

/// PD-STD: soft (entropic) thresholding of phi and a proximal dual step.
/// Stops once the max-norm change of u drops below stop_tol.
inline SolveReport run_pdstd(const ScalarField& f, const SolverConfig& cfg,
                             const std::optional<LabelField>& u0 = std::nullopt,
                             const IterationObserver& observer = {}) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const GaussianKernel k = cfg.kernel();
  const double c = calibrate_perimeter_constant(k, cfg.calibration_grid);
  const detail::KernelProbe probe(k);
  const detail::Objective obj{f, cfg.lambda, 4.0 * std::numbers::pi * c * c};

  ScalarField u;
  if (u0) {
    require_same_shape(*u0, f, "run_pdstd initial label");
    if (!is_label_field(*u0)) throw ConfigError("initial label field must lie in [0,1]");
    u = *u0;
  } else {
    u = detail::default_initial_label(f);
  }
  auto eval = probe.evaluate(u);
  double p = cfg.initial_dual ? *cfg.initial_dual : (eval.area > 0.0 ? 2.0 * eval.q / eval.area : 0.0);

  SolveReport rep;
  rep.algorithm = "pd-std";
  rep.energy_trace.push_back({0, obj.energy(u, eval), obj.lagrangian(u, eval, p), p});

  for (int it = 0; it < cfg.max_iters; ++it) {
    const ScalarField phi = probe.phi(f, eval, p, cfg.lambda);
    ScalarField next = pdstd_u_update(phi, cfg.epsilon);
    auto next_eval = probe.evaluate(next);
    const double p_next = proximal_dual_step(next_eval.q, next_eval.area, p, cfg.tau);
    if (observer) observer({it, u, p, next, p_next});

    const double change = max_abs_diff(next, u);
    u = std::move(next);
    eval = std::move(next_eval);
    p = p_next;
    rep.iters_used = it + 1;
    rep.energy_trace.push_back({it + 1, obj.energy(u, eval), obj.lagrangian(u, eval, p), p});
    if (change < cfg.stop_tol) {
      rep.converged = true;
      break;
    }
  }

  rep.soft_u = u;
  rep.mask = threshold(u, cfg.final_threshold);
  rep.p_final = p;
  rep.wall_time = detail::seconds_since(t0);
  return rep;
}

/// Forward pass of the unrolled PD-STD layer: the soft label, no binarization.
inline LabelField std_layer_forward(const ScalarField& logits, const SolverConfig& cfg) {
  return run_pdstd(force_from_logits(logits), cfg).soft_u;
}

}  // namespace compactseg
