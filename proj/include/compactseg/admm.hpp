#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "compactseg/cg.hpp"
#include "compactseg/errors.hpp"
#include "compactseg/fields.hpp"
#include "compactseg/kernel.hpp"
#include "compactseg/maxflow.hpp"
#include "compactseg/pd_solvers.hpp"

namespace compactseg {

/// ADMM baseline for lambda <f,u> + |u|_TV |z|_TV / s subject to z = u and
/// s = <z,1>, with anisotropic TV and scaled multipliers.
struct AdmmConfig {
  double lambda = 0.05;
  double mu1 = 0.1;             ///< penalty on u = z
  double mu2 = 1e-4;            ///< penalty on s = <z,1>; the area residual is in pixels
  int max_iters = 100;
  double tol = 1e-3;            ///< primal residual tolerance
  double inner_cg_tol = 1e-6;   ///< relative residual for the z system
  int inner_cg_max = 500;
  double tv_floor = 0.05;       ///< lower bound on |Dz| in the lagged TV weights
  double s_min = 1.0;           ///< area floor, pixels
  double sigma = 2.0;           ///< kernel for the reported energy trace
  int kernel_half_width = 0;
  int calibration_grid = 128;

  void validate() const {
    if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
    if (!(mu1 > 0.0) || !(mu2 > 0.0)) throw ConfigError("mu1 and mu2 must be > 0");
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (!(tol >= 0.0)) throw ConfigError("tol must be >= 0");
    if (!(inner_cg_tol > 0.0) || inner_cg_max < 1) throw ConfigError("bad CG settings");
    if (!(tv_floor > 0.0)) throw ConfigError("tv_floor must be > 0");
    if (!(s_min > 0.0)) throw ConfigError("s_min must be > 0");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  }

  [[nodiscard]] GaussianKernel kernel() const {
    return {sigma, kernel_half_width > 0 ? kernel_half_width : default_half_width(sigma)};
  }
};

struct AdmmState {
  BinaryMask u;
  ScalarField z;
  double s = 1.0;   ///< surrogate area
  ScalarField nu1;  ///< scaled multiplier for u = z
  double nu2 = 0.0; ///< scaled multiplier for s = <z,1>
};

// ---------------------------------------------------------------------------
// Anisotropic TV with zero extension on all four sides
// ---------------------------------------------------------------------------

/// Visits every difference term of the padded anisotropic TV: fn(i, j) for
/// interior neighbour pairs and fn(i, -1) once per border side of pixel i.
template <typename Fn>
void for_each_tv_term(Shape shape, Fn&& fn) {
  const int w = shape.width, h = shape.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      if (x + 1 < w) fn(i, i + 1);
      if (y + 1 < h) fn(i, i + w);
      const int border_sides = (x == 0) + (x == w - 1) + (y == 0) + (y == h - 1);
      for (int b = 0; b < border_sides; ++b) fn(i, -1);
    }
  }
}

/// sum over terms of |z_i - z_j|, with z_{-1} = 0.
inline double padded_anisotropic_tv(const ScalarField& z) {
  double total = 0.0;
  for_each_tv_term(z.shape(), [&](int i, int j) {
    total += std::abs(z[static_cast<std::size_t>(i)] - (j >= 0 ? z[static_cast<std::size_t>(j)] : 0.0));
  });
  return total;
}

inline double padded_anisotropic_tv(const BinaryMask& m) { return padded_anisotropic_tv(to_field(m)); }

// ---------------------------------------------------------------------------
// Sub-steps
// ---------------------------------------------------------------------------

/// Objective of the u-subproblem for a given binary labeling.
inline double admm_u_objective(const BinaryMask& u, const AdmmState& st, const ScalarField& f, double lambda,
                               double mu1, double tv_weight) {
  double e = tv_weight * padded_anisotropic_tv(u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - st.z[i] + st.nu1[i];
    e += lambda * f[i] * u[i] + 0.5 * mu1 * d * d;
  }
  return e;
}

/// Exact binary minimizer of
///   lambda <f,u> + tv_weight |u|_TV + mu1/2 ||u - z + nu1||^2
/// by a minimum cut on the 4-connected grid. Ties go to label 0.
inline BinaryMask admm_u_update(const AdmmState& st, const ScalarField& f, double lambda, double mu1,
                                double tv_weight) {
  require_same_shape(st.z, f, "admm_u_update");
  require_same_shape(st.nu1, f, "admm_u_update");
  if (tv_weight < 0.0) throw ConfigError("TV coefficient must be >= 0");
  const Shape shape = f.shape();
  const int n = static_cast<int>(shape.size());

  // cost(u_i = 1) - cost(u_i = 0) from the unary parts
  std::vector<double> delta(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double c = st.z[i] - st.nu1[i];
    delta[i] = lambda * f[i] + 0.5 * mu1 * ((1.0 - c) * (1.0 - c) - c * c);
  }

  MaxFlowGraph g(n, 2 * n);
  for_each_tv_term(shape, [&](int i, int j) {
    if (j >= 0) {
      if (tv_weight > 0.0) g.add_edge(i, j, tv_weight, tv_weight);
    } else {
      delta[static_cast<std::size_t>(i)] += tv_weight;
    }
  });
  // label 1 <=> source side: cutting i->sink costs label 1, source->i costs label 0
  for (int i = 0; i < n; ++i) {
    const double d = delta[static_cast<std::size_t>(i)];
    if (d > 0.0) {
      g.add_terminal_weights(i, 0.0, d);
    } else if (d < 0.0) {
      g.add_terminal_weights(i, -d, 0.0);
    }
  }
  g.maxflow();

  BinaryMask u(shape);
  for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = g.in_source_set(i) ? 1 : 0;
  return u;
}

inline BinaryMask admm_u_update(const AdmmState& st, const ScalarField& f, const AdmmConfig& cfg) {
  return admm_u_update(st, f, cfg.lambda, cfg.mu1, padded_anisotropic_tv(st.z) / st.s);
}

struct ZUpdate {
  ScalarField z;
  CgResult cg;
};

/// Solves the z-subproblem
///   tv_weight |z|_TV + mu1/2 ||u - z + nu1||^2 + mu2/2 (s - <z,1> + nu2)^2
/// with |z|_TV replaced by its quadratic majorizer at the current z (weights
/// 1 / max(|Dz|, tv_floor)). The resulting system
///   (mu1 I + mu2 11^T + tv_weight D^T W D) z = mu1 (u + nu1) + mu2 (s + nu2) 1
/// is symmetric positive definite and solved by CG, warm-started at z.
inline ZUpdate admm_z_update(const AdmmState& st, const AdmmConfig& cfg, double tv_weight) {
  require_same_shape(st.u, st.z, "admm_z_update");
  const Shape shape = st.z.shape();

  struct Term {
    int i, j;
    double w;
  };
  std::vector<Term> terms;
  if (tv_weight > 0.0) {
    terms.reserve(3 * shape.size());
    for_each_tv_term(shape, [&](int i, int j) {
      const double d = st.z[static_cast<std::size_t>(i)] - (j >= 0 ? st.z[static_cast<std::size_t>(j)] : 0.0);
      terms.push_back({i, j, tv_weight / std::max(std::abs(d), cfg.tv_floor)});
    });
  }

  auto apply = [&](const ScalarField& in, ScalarField& out) {
    const double total = sum(in);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = cfg.mu1 * in[i] + cfg.mu2 * total;
    for (const Term& t : terms) {
      const double zi = in[static_cast<std::size_t>(t.i)];
      const double d = zi - (t.j >= 0 ? in[static_cast<std::size_t>(t.j)] : 0.0);
      out[static_cast<std::size_t>(t.i)] += t.w * d;
      if (t.j >= 0) out[static_cast<std::size_t>(t.j)] -= t.w * d;
    }
  };

  ScalarField rhs(shape);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs[i] = cfg.mu1 * (st.u[i] + st.nu1[i]) + cfg.mu2 * (st.s + st.nu2);
  }
  ZUpdate res{st.z, {}};
  res.cg = conjugate_gradient(apply, rhs, res.z, cfg.inner_cg_tol, cfg.inner_cg_max);
  return res;
}

inline ZUpdate admm_z_update(const AdmmState& st, const AdmmConfig& cfg) {
  return admm_z_update(st, cfg, padded_anisotropic_tv(st.u) / st.s);
}

/// Positive root of mu2 s^3 - mu2 m s^2 - a = 0 (m = b - nu2), the stationary
/// point of a/s + mu2/2 (s - m)^2. For a = 0 the minimizer is m itself.
/// Result is floored at s_min.
inline double solve_area_cubic(double a, double m, double mu2, double s_min) {
  if (a < 0.0) throw ConfigError("cubic coefficient a must be >= 0");
  if (!(mu2 > 0.0)) throw ConfigError("mu2 must be > 0");
  if (a == 0.0) return std::max(m, s_min);

  const double k = a / mu2;
  auto g = [&](double s) { return s * s * (s - m) - k; };
  auto dg = [&](double s) { return s * (3.0 * s - 2.0 * m); };
  // g(lo) < 0 < g(hi) and the positive root is unique
  double lo = std::max(m, 0.0);
  double hi = lo + std::cbrt(k) + 1.0;
  double s = hi;
  for (int it = 0; it < 200; ++it) {
    const double gs = g(s);
    if (gs == 0.0) break;
    (gs < 0.0 ? lo : hi) = s;
    const double d = dg(s);
    double next = d > 0.0 ? s - gs / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(s)) {
      s = next;
      break;
    }
    s = next;
  }
  return std::max(s, s_min);
}

/// s-update with a = |u|_TV |z|_TV and b = <z,1>.
inline double admm_s_update(const AdmmState& st, const AdmmConfig& cfg) {
  const double a = padded_anisotropic_tv(st.u) * padded_anisotropic_tv(st.z);
  return solve_area_cubic(a, sum(st.z) - st.nu2, cfg.mu2, cfg.s_min);
}

/// Augmented Lagrangian in scaled form.
inline double admm_augmented_lagrangian(const AdmmState& st, const ScalarField& f, const AdmmConfig& cfg) {
  const ScalarField u = to_field(st.u);
  double quad = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - st.z[i] + st.nu1[i];
    quad += d * d;
  }
  const double area_res = st.s - sum(st.z) + st.nu2;
  return cfg.lambda * inner_product(f, u) + padded_anisotropic_tv(u) * padded_anisotropic_tv(st.z) / st.s +
         0.5 * cfg.mu1 * quad + 0.5 * cfg.mu2 * area_res * area_res;
}

/// Scaled multiplier ascent: nu1 += u - z, nu2 += s - <z,1>.
inline void admm_multiplier_update(AdmmState& st) {
  for (std::size_t i = 0; i < st.nu1.size(); ++i) st.nu1[i] += st.u[i] - st.z[i];
  st.nu2 += st.s - sum(st.z);
}

inline AdmmState admm_initial_state(const ScalarField& f, const AdmmConfig& cfg,
                                    const std::optional<BinaryMask>& u0 = std::nullopt) {
  AdmmState st;
  if (u0) {
    require_same_shape(*u0, f, "admm initial mask");
    st.u = *u0;
  } else {
    st.u = threshold(detail::default_initial_label(f), 0.5);
  }
  st.z = to_field(st.u);
  st.s = std::max(sum(st.z), cfg.s_min);
  st.nu1 = ScalarField(f.shape(), 0.0);
  st.nu2 = 0.0;
  return st;
}

/// Cycles the u, z and s updates followed by the multiplier step until both
/// primal residuals ||u - z||_inf and |s - <z,1>| / max(1, s) drop below tol.
inline SolveReport run_admm(const ScalarField& f, const AdmmConfig& cfg,
                            const std::optional<BinaryMask>& u0 = std::nullopt) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const GaussianKernel k = cfg.kernel();
  const double c = calibrate_perimeter_constant(k, cfg.calibration_grid);

  AdmmState st = admm_initial_state(f, cfg, u0);
  SolveReport rep;
  rep.algorithm = "admm";
  auto record = [&](int it) {
    rep.energy_trace.push_back(
        {it, energy_value(to_field(st.u), f, cfg.lambda, k, c), admm_augmented_lagrangian(st, f, cfg), st.nu2});
  };
  record(0);

  for (int it = 0; it < cfg.max_iters; ++it) {
    st.u = admm_u_update(st, f, cfg);
    st.z = admm_z_update(st, cfg).z;
    st.s = admm_s_update(st, cfg);
    admm_multiplier_update(st);
    rep.iters_used = it + 1;
    record(it + 1);

    double r1 = 0.0;
    for (std::size_t i = 0; i < st.z.size(); ++i) r1 = std::max(r1, std::abs(st.u[i] - st.z[i]));
    const double r2 = std::abs(st.s - sum(st.z)) / std::max(1.0, st.s);
    if (r1 < cfg.tol && r2 < cfg.tol) {
      rep.converged = true;
      break;
    }
  }

  rep.mask = st.u;
  rep.soft_u = map(st.z, [](double v) { return std::clamp(v, 0.0, 1.0); });
  rep.p_final = st.nu2;
  rep.wall_time = detail::seconds_since(t0);
  return rep;
}

}  // namespace compactseg
