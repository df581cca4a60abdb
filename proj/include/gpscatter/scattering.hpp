#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpscatter/common.hpp"
#include "gpscatter/grid.hpp"
#include "gpscatter/linalg.hpp"
#include "gpscatter/geometry.hpp"
#include "gpscatter/metric.hpp"
#include "gpscatter/potentials.hpp"

namespace gpscatter {

// ---------------------------------------------------------------------------
// Radial oracle (d = 3): shoot u(r) = r f(r) through -2u'' + v u = 0 with
// u(0) = 0, then read the scattering length from u(r) = c (r - a) outside the
// support. b = 8 pi a under the factor-2 kinetic convention.
// ---------------------------------------------------------------------------

struct RadialScattering {
  double scattering_length = 0.0;
  double b = 0.0;
  double f_min = 1.0;
  double r_matched = 0.0;
  int steps = 0;
};

inline RadialScattering solve_scattering_radial(const PotentialSpec& v, double r_max,
                                                double tol = 1e-10, int base_steps = 20000) {
  require(v.dim() == 3, ErrorKind::precondition, "radial oracle is d = 3 only");
  require(v.is_radial(), ErrorKind::precondition, "radial oracle needs a radial potential");
  double r0 = v.support_radius();
  require(r_max > r0, ErrorKind::precondition, "r_max must exceed the support radius");
  (void)tol;

  // piecewise RK4 with steps aligned to the jump radii
  std::vector<double> brk = {0.0};
  for (double j : v.jump_radii())
    if (j > 0.0 && j < r_max) brk.push_back(j);
  if (r0 > 0.0 && r0 < r_max) brk.push_back(r0);
  brk.push_back(r_max);
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-14; }),
            brk.end());

  auto rhs = [&](double r, double u) { return 0.5 * v.radial_value(r) * u; };  // u'' = v u / 2
  double u = 0.0, du = 1.0, r = 0.0;
  int total_steps = 0;
  double fmin_num = std::numeric_limits<double>::infinity();
  for (std::size_t seg = 0; seg + 1 < brk.size(); ++seg) {
    double len = brk[seg + 1] - brk[seg];
    if (len <= 0) continue;
    int m = std::max(16, static_cast<int>(std::ceil(len / (r_max / base_steps))));
    double hh = len / m;
    for (int i = 0; i < m; ++i) {
      r = brk[seg] + i * hh;
      // RK4 on (u, du)
      double k1u = du, k1d = rhs(r, u);
      double k2u = du + 0.5 * hh * k1d, k2d = rhs(r + 0.5 * hh, u + 0.5 * hh * k1u);
      double k3u = du + 0.5 * hh * k2d, k3d = rhs(r + 0.5 * hh, u + 0.5 * hh * k2u);
      double k4u = du + hh * k3d, k4d = rhs(r + hh, u + hh * k3u);
      u += hh / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
      du += hh / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
      ++total_steps;
      double rr = r + hh;
      if (rr > 1e-9) fmin_num = std::min(fmin_num, u / rr);
    }
    r = brk[seg + 1];
  }
  RadialScattering out;
  out.steps = total_steps;
  out.r_matched = r;
  // outside the support u is exactly linear: u = du (r - a)
  out.scattering_length = r - u / du;
  out.b = 8.0 * M_PI * out.scattering_length;
  // f normalized to 1 at infinity: f(r) = u(r) / (du * r)
  out.f_min = fmin_num / du;
  return out;
}

// ---------------------------------------------------------------------------
// Grid solver for d in {3, 6}
// ---------------------------------------------------------------------------

enum class KineticMetric { standard, modified };

struct ScatterOptions {
  int n = 0;                  // points per axis (0: default by dimension)
  bool extrapolate = true;    // Richardson in domain radius and spacing
  int max_iter = 0;           // 0: spec default 20 n
  KineticMetric metric = KineticMetric::standard;
  int cell_average_sub = 3;
  static int default_n(int dim) { return dim == 3 ? 96 : 14; }
};

// Standard metric: the classic 2(2D)/h^2 stencil with Robin ghosts folded
// into the diagonal. Modified metric: the kinetic form 2 int |M grad phi|^2
// assembled from per-point pair terms
//   T_j = d_j^2 + d_{j+3}^2 + d_j d_{j+3},   d_k = forward difference,
// (spectrum of [[1,1/2],[1/2,1]] is {1/2,3/2} >= 0), with missing forward
// neighbors substituted by the Robin profile ratio. Linear ghost substitution
// keeps the assembled form positive semidefinite. The modified apply scatters
// and therefore runs serially; grids where it is used stay small.
template <int D>
struct ScatteringOperator {
  const BallGrid<D>* grid = nullptr;
  std::vector<double> diag;   // standard: kinetic diagonal + Robin + potential
  std::vector<double> vpot;   // potential samples
  bool modified = false;
  double off_face = 0.0;      // -2/h^2
  double inv_h2 = 0.0;
  std::vector<float> fwd_ratio;  // modified: ghost ratio per (point, +axis)

  void operator()(const std::vector<double>& in, std::vector<double>& out) const {
    const BallGrid<D>& g = *grid;
    const std::size_t n = g.size();
    if (out.size() != n) out.assign(n, 0.0);
    if (!modified) {
      parallel_for_chunks(n, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t a = lo; a < hi; ++a) {
          double acc = diag[a] * in[a];
          for (int k = 0; k < D; ++k) {
            std::int32_t m = g.neighbor(a, k, 0);
            std::int32_t p = g.neighbor(a, k, 1);
            if (m >= 0) acc += off_face * in[static_cast<std::size_t>(m)];
            if (p >= 0) acc += off_face * in[static_cast<std::size_t>(p)];
          }
          out[a] = acc;
        }
      });
      return;
    }
    for (std::size_t a = 0; a < n; ++a) out[a] = vpot[a] * in[a];
    for (std::size_t a = 0; a < n; ++a) {
      const double ua = in[a];
      for (int j = 0; j < 3; ++j) {
        const int k = j + 3;
        std::int32_t bidx = g.neighbor(a, j, 1);
        std::int32_t cidx = g.neighbor(a, k, 1);
        double wa_j, wa_k, dj, dk;
        if (bidx >= 0) {
          dj = in[static_cast<std::size_t>(bidx)] - ua;
          wa_j = -1.0;
        } else {
          double r = fwd_ratio[a * D + j];
          dj = (r - 1.0) * ua;
          wa_j = r - 1.0;
        }
        if (cidx >= 0) {
          dk = in[static_cast<std::size_t>(cidx)] - ua;
          wa_k = -1.0;
        } else {
          double r = fwd_ratio[a * D + k];
          dk = (r - 1.0) * ua;
          wa_k = r - 1.0;
        }
        double gj = 2.0 * dj + dk;
        double gk = 2.0 * dk + dj;
        out[a] += inv_h2 * (gj * wa_j + gk * wa_k);
        if (bidx >= 0) out[static_cast<std::size_t>(bidx)] += inv_h2 * gj;
        if (cidx >= 0) out[static_cast<std::size_t>(cidx)] += inv_h2 * gk;
      }
    }
  }
};

struct ScatteringSolution {
  int dim = 3;
  double b = 0.0;              // extrapolated estimate
  double b_primary = 0.0;      // at (L, h)
  double b_secondary = 0.0;    // at (gamma L, gamma_h h), h-corrected
  double h_correction = 0.0;
  std::array<double, 2> domain_radii{0.0, 0.0};
  bool extrapolated = false;
  double residual = 0.0;
  int cg_iterations = 0;
  double f_min = 1.0;
  double integral_v = 0.0;     // discrete integral of v on the primary grid
  double functional_value = 0.0;
  int n = 0;
  double h = 0.0;
  std::size_t active = 0;
  std::vector<double> omega;   // packed values on the primary grid
  std::shared_ptr<void> grid_holder;
  // decay diagnostics, filled by check_pointwise_bounds
  double c_omega = 0.0;
  double c_grad_omega = 0.0;
  double decay_exponent = 0.0;
};

namespace detail {

// Robin profile: the leading far-field form of omega. Standard metric decays
// as |x|^{2-d}; the modified one as |M^{-1}x|^{-4}.
template <int D>
inline double robin_profile(const double* x, bool modified, const MetricGroup& mg) {
  if (!modified) {
    double r2 = 0.0;
    for (int k = 0; k < D; ++k) r2 += x[k] * x[k];
    return std::pow(r2, -0.5 * (D - 2));
  }
  double rho = mg.m_inv_norm(x);
  return std::pow(rho, -4.0);
}

}  // namespace detail

// The assembled discrete problem on one grid: operator, potential samples,
// and the quadratic functional int 2|grad w|^2 + v (1-w)^2 it minimizes.
template <int D>
struct DiscreteScatteringProblem {
  std::shared_ptr<BallGrid<D>> grid;
  ScatteringOperator<D> op;
  double integral_v = 0.0;

  double functional(const std::vector<double>& w) const {
    const double cell = grid->cell_volume();
    std::vector<double> aw(w.size());
    op(w, aw);
    double quad = cell * deterministic_sum(w.size(), [&](std::size_t i) { return w[i] * aw[i]; });
    double lin =
        cell * deterministic_sum(w.size(), [&](std::size_t i) { return op.vpot[i] * w[i]; });
    return quad - 2.0 * lin + integral_v;
  }
};

template <int D>
DiscreteScatteringProblem<D> build_scattering_problem(const PotentialSpec& v, double radius,
                                                      int n, KineticMetric metric, int sub) {
  const bool modified = metric == KineticMetric::modified;
  DiscreteScatteringProblem<D> prob;
  prob.grid = std::make_shared<BallGrid<D>>(n, radius);
  const BallGrid<D>& g = *prob.grid;
  const double h = g.h();
  const double inv_h2 = 1.0 / (h * h);
  const std::size_t npts = g.size();
  MetricGroup mg = metric_matrix();

  ScatteringOperator<D>& A = prob.op;
  A.grid = prob.grid.get();
  A.modified = modified;
  A.off_face = -2.0 * inv_h2;
  A.inv_h2 = inv_h2;
  A.vpot.resize(npts);
  A.diag.resize(npts);
  if (modified) A.fwd_ratio.assign(npts * D, 0.0f);

  parallel_for_chunks(npts, [&](std::size_t, std::size_t lo, std::size_t hi) {
    double x[D], xg[D];
    for (std::size_t a = lo; a < hi; ++a) {
      g.coords(a, x);
      double vv = v.cell_average(x, h, sub);
      A.vpot[a] = vv;
      double g0 = detail::robin_profile<D>(x, modified, mg);
      if (!modified) {
        double dg = 4.0 * D * inv_h2 + vv;
        for (int k = 0; k < D; ++k) {
          for (int dir = 0; dir < 2; ++dir) {
            if (g.neighbor(a, k, dir) < 0) {
              g.ghost_coords(a, k, dir, xg);
              double ratio = detail::robin_profile<D>(xg, modified, mg) / g0;
              dg += -2.0 * inv_h2 * ratio;  // ghost folded into the diagonal
            }
          }
        }
        A.diag[a] = dg;
      } else {
        A.diag[a] = vv;
        for (int k = 0; k < D; ++k) {
          if (g.neighbor(a, k, 1) < 0) {
            g.ghost_coords(a, k, 1, xg);
            A.fwd_ratio[a * D + k] =
                static_cast<float>(detail::robin_profile<D>(xg, modified, mg) / g0);
          }
        }
      }
    }
  });
  prob.integral_v = g.cell_volume() *
                    deterministic_sum(npts, [&](std::size_t i) { return A.vpot[i]; });
  return prob;
}

namespace detail {

template <int D>
struct SingleSolve {
  double b = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double f_min = 1.0;
  double integral_v = 0.0;
  double functional = 0.0;
  std::vector<double> omega;
  std::shared_ptr<BallGrid<D>> grid;
};

template <int D>
SingleSolve<D> solve_on_grid(const PotentialSpec& v, double radius, int n, double tol,
                             int max_iter, KineticMetric metric, int sub) {
  DiscreteScatteringProblem<D> prob = build_scattering_problem<D>(v, radius, n, metric, sub);
  const BallGrid<D>& g = *prob.grid;
  const std::size_t npts = g.size();
  const ScatteringOperator<D>& A = prob.op;

  std::vector<double> x(npts, 0.0);
  CgResult cg = conjugate_gradient(A, A.vpot, x, tol, max_iter);
  if (!cg.converged) {
    throw ToolkitError(ErrorKind::solver,
                       "scattering CG did not converge: residual " +
                           std::to_string(cg.rel_residual) + " after " +
                           std::to_string(cg.iterations) + " iterations");
  }

  SingleSolve<D> out;
  out.grid = prob.grid;
  out.residual = cg.rel_residual;
  out.iterations = cg.iterations;
  const double cell = g.cell_volume();
  out.b = cell * deterministic_sum(npts, [&](std::size_t i) { return A.vpot[i] * (1.0 - x[i]); });
  out.integral_v = prob.integral_v;
  double omega_max = 0.0;
  for (double w : x) omega_max = std::max(omega_max, w);
  out.f_min = 1.0 - omega_max;
  out.functional = prob.functional(x);
  out.omega = std::move(x);
  return out;
}

template <int D>
ScatteringSolution solve_impl(const PotentialSpec& v, double domain_radius, double tol,
                              const ScatterOptions& opts) {
  double r0 = v.support_radius();
  require(std::isfinite(r0), ErrorKind::precondition, "potential needs compact support");
  require(domain_radius >= 4.0 * r0, ErrorKind::precondition,
          "domain radius must be at least 4x the support radius");
  int n = opts.n > 0 ? opts.n : ScatterOptions::default_n(D);
  int max_iter = opts.max_iter > 0 ? opts.max_iter : 20 * n;

  ScatteringSolution sol;
  sol.dim = D;
  const double gamma = D == 3 ? 2.0 : 1.5;

  auto primary = solve_on_grid<D>(v, domain_radius, n, tol, max_iter, opts.metric,
                                  opts.cell_average_sub);
  sol.b_primary = primary.b;
  sol.residual = primary.residual;
  sol.cg_iterations = primary.iterations;
  sol.f_min = primary.f_min;
  sol.integral_v = primary.integral_v;
  sol.functional_value = primary.functional;
  sol.n = n;
  sol.h = primary.grid->h();
  sol.active = primary.grid->size();
  sol.domain_radii = {domain_radius, gamma * domain_radius};

  if (!opts.extrapolate) {
    sol.b = primary.b;
    sol.omega = std::move(primary.omega);
    sol.grid_holder = primary.grid;
    return sol;
  }

  // second radius at the same n (spacing grows by gamma), plus a coarse solve
  // at the primary radius to measure and remove the h^2 bias of the pair
  auto wide = solve_on_grid<D>(v, gamma * domain_radius, n, tol, max_iter, opts.metric,
                               opts.cell_average_sub);
  int n_coarse = std::max(6, static_cast<int>(std::lround((n - 1) / gamma)) + 1);
  auto coarse = solve_on_grid<D>(v, domain_radius, n_coarse, tol,
                                 std::max(max_iter, 20 * n), opts.metric,
                                 opts.cell_average_sub);
  double h1 = primary.grid->h();
  double h2 = wide.grid->h();
  double hc = coarse.grid->h();
  // q estimated from the same-radius pair
  double q = (coarse.b - primary.b) / (hc * hc - h1 * h1);
  double b_wide_corr = wide.b - q * (h2 * h2 - h1 * h1);
  sol.h_correction = -q * (h2 * h2 - h1 * h1);
  double gp = std::pow(gamma, D - 2);
  sol.b_secondary = b_wide_corr;
  sol.b = (gp * b_wide_corr - primary.b) / (gp - 1.0);
  sol.extrapolated = true;
  sol.omega = std::move(primary.omega);
  sol.grid_holder = primary.grid;
  return sol;
}

}  // namespace detail

inline ScatteringSolution solve_scattering(const PotentialSpec& v, double domain_radius,
                                           double tol, ScatterOptions opts = {}) {
  if (v.dim() == 3) return detail::solve_impl<3>(v, domain_radius, tol, opts);
  require(v.dim() == 6, ErrorKind::precondition, "d must be 3 or 6");
  return detail::solve_impl<6>(v, domain_radius, tol, opts);
}

// ---------------------------------------------------------------------------
// Born series: order 1 is int v; order 2 subtracts int v (-2 Delta)^{-1} v,
// evaluated by double lattice quadrature with the diagonal cell handled by
// the equal-volume ball integral of the kernel.
// ---------------------------------------------------------------------------

inline double born_series(const PotentialSpec& v, int order, int n_quad = 0) {
  require(order == 1 || order == 2, ErrorKind::precondition, "born order must be 1 or 2");
  const int d = v.dim();
  double r0 = v.support_radius();
  require(std::isfinite(r0) && r0 > 0.0, ErrorKind::precondition,
          "born series needs compact support");
  int n = n_quad > 0 ? n_quad : (d == 3 ? 32 : 10);
  BallGrid<3> g3(d == 3 ? n : 4, r0 * 1.02);
  BallGrid<6> g6(d == 6 ? n : 4, r0 * 1.02);
  std::size_t npts = d == 3 ? g3.size() : g6.size();
  double h = d == 3 ? g3.h() : g6.h();
  double cell = std::pow(h, d);

  std::vector<double> vals(npts);
  std::vector<std::array<double, 6>> pts(npts);
  for (std::size_t a = 0; a < npts; ++a) {
    double x[6] = {0, 0, 0, 0, 0, 0};
    if (d == 3)
      g3.coords(a, x);
    else
      g6.coords(a, x);
    vals[a] = v.cell_average(x, h, 3);
    for (int k = 0; k < 6; ++k) pts[a][k] = x[k];
  }
  double mass = cell * deterministic_sum(npts, [&](std::size_t i) { return vals[i]; });
  if (order == 1) return mass;

  // (-2 Delta)^{-1} kernel = G_d / 2; diagonal cell via the equal-volume ball
  double r_eq = std::pow(cell * d / sphere_area(d), 1.0 / d);
  double diag_int = r_eq * r_eq / (2.0 * (d - 2));  // int_{B_r} G_d = r^2/(2(d-2))
  double second = deterministic_sum(npts, [&](std::size_t i) {
    if (vals[i] == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < npts; ++j) {
      if (vals[j] == 0.0) continue;
      if (i == j) continue;
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) {
        double dxk = pts[i][k] - pts[j][k];
        r2 += dxk * dxk;
      }
      acc += vals[j] * laplace_green(d, std::sqrt(r2)) * cell;
    }
    acc += vals[i] * diag_int;
    return vals[i] * acc * cell;
  });
  return mass - 0.5 * second;
}

// ---------------------------------------------------------------------------
// Pointwise-bound diagnostics of Theorem-2.1 type: fitted constants for
// omega <= C/(|x|^{d-2}+1) and |grad omega| <= C/(|x|^{d-1}+1), far-field
// decay exponent by log-log regression on shell averages.
// ---------------------------------------------------------------------------

struct BoundsReport {
  double c_omega = 0.0;
  double c_grad_omega = 0.0;
  double decay_exponent = 0.0;
  double f_min = 1.0;
  bool pass = false;
};

template <int D>
inline BoundsReport check_pointwise_bounds_impl(ScatteringSolution& sol) {
  const auto grid = std::static_pointer_cast<BallGrid<D>>(sol.grid_holder);
  const BallGrid<D>& g = *grid;
  const std::size_t n = g.size();
  const double h = g.h();
  BoundsReport rep;
  rep.f_min = sol.f_min;

  double radius = g.radius();
  const int nsh = 24;
  std::vector<double> shell_sum(nsh, 0.0), shell_cnt(nsh, 0.0);
  double x[D];
  for (std::size_t a = 0; a < n; ++a) {
    g.coords(a, x);
    double r2 = 0.0;
    for (int k = 0; k < D; ++k) r2 += x[k] * x[k];
    double r = std::sqrt(r2);
    double w = sol.omega[a];
    rep.c_omega = std::max(rep.c_omega, w * (std::pow(r, D - 2) + 1.0));
    // centered gradient where both neighbors exist
    double g2 = 0.0;
    bool full = true;
    for (int k = 0; k < D; ++k) {
      std::int32_t m = g.neighbor(a, k, 0), p = g.neighbor(a, k, 1);
      if (m < 0 || p < 0) {
        full = false;
        break;
      }
      double d1 = (sol.omega[static_cast<std::size_t>(p)] -
                   sol.omega[static_cast<std::size_t>(m)]) /
                  (2.0 * h);
      g2 += d1 * d1;
    }
    if (full)
      rep.c_grad_omega = std::max(rep.c_grad_omega, std::sqrt(g2) * (std::pow(r, D - 1) + 1.0));
    int sh = static_cast<int>(r / radius * nsh);
    if (sh >= 0 && sh < nsh && w > 0.0) {
      shell_sum[sh] += w;
      shell_cnt[sh] += 1.0;
    }
  }
  // log-log fit over shells in [0.5, 0.9] radius
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int s = nsh / 2; s < nsh * 9 / 10; ++s) {
    if (shell_cnt[s] == 0) continue;
    double r = (s + 0.5) * radius / nsh;
    double wbar = shell_sum[s] / shell_cnt[s];
    if (wbar <= 0) continue;
    double lx = std::log(r), ly = std::log(wbar);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt >= 2) rep.decay_exponent = -(cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  rep.pass = rep.f_min > 0.0 && std::isfinite(rep.c_omega) && std::isfinite(rep.c_grad_omega);
  sol.c_omega = rep.c_omega;
  sol.c_grad_omega = rep.c_grad_omega;
  sol.decay_exponent = rep.decay_exponent;
  return rep;
}

inline BoundsReport check_pointwise_bounds(ScatteringSolution& sol) {
  if (sol.dim == 3) return check_pointwise_bounds_impl<3>(sol);
  return check_pointwise_bounds_impl<6>(sol);
}

// ---------------------------------------------------------------------------
// Modified scattering energy: change-of-variables path b(V(M .)) det M, with
// the direct anisotropic-stencil discretization as cross check.
// ---------------------------------------------------------------------------

struct ModifiedScattering {
  double b_m = 0.0;         // change-of-variables path
  double cross_check = 0.0; // direct Delta_M path
  double rel_gap = 0.0;
  ScatteringSolution mapped;   // solve of V(M .)
  ScatteringSolution direct;   // anisotropic solve of V
};

// V(M x) as a potential descriptor
inline PotentialSpec mapped_through_metric(const PotentialSpec& v6) {
  return PotentialSpec::mapped6d(std::make_shared<PotentialSpec>(v6));
}

struct SymmetryFailure : ToolkitError {
  explicit SymmetryFailure(const std::string& msg) : ToolkitError(ErrorKind::precondition, msg) {}
};

inline ModifiedScattering scattering_energy_modified(const PotentialSpec& v6,
                                                     double domain_radius, double tol,
                                                     ScatterOptions opts = {},
                                                     double symmetry_tol = 1e-8) {
  require(v6.dim() == 6, ErrorKind::precondition, "modified scattering needs d = 6");
  auto rep = check_three_body_symmetry(v6, symmetry_tol);
  if (!rep.pass) {
    std::string msg = "potential violates the three-body symmetry:";
    for (const auto& pe : rep.per_element)
      msg += " " + pe.name + "=" + std::to_string(pe.max_deviation);
    throw SymmetryFailure(msg);
  }
  MetricGroup mg = metric_matrix();

  ModifiedScattering out;
  PotentialSpec mapped = mapped_through_metric(v6);
  ScatterOptions oa = opts;
  oa.metric = KineticMetric::standard;
  // the mapped support is wider by up to sqrt 2
  out.mapped = solve_scattering(mapped, domain_radius * std::sqrt(2.0), tol, oa);
  out.b_m = out.mapped.b * mg.det_m;

  ScatterOptions ob = opts;
  ob.metric = KineticMetric::modified;
  out.direct = solve_scattering(v6, domain_radius * std::sqrt(2.0), tol, ob);
  out.cross_check = out.direct.b;
  out.rel_gap = std::abs(out.b_m - out.cross_check) / std::max(1e-300, std::abs(out.b_m));
  return out;
}

}  // namespace gpscatter
