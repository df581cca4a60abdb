#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gpscatter/potentials.hpp"
#include "gpscatter/scattering.hpp"

using namespace gpscatter;

namespace {
// closed form for the square well under the factor-2 kinetic convention:
// a = R - tanh(kappa R)/kappa, kappa = sqrt(V0/2)
double well_scattering_length(double v0, double r) {
  double kappa = std::sqrt(v0 / 2.0);
  return r - std::tanh(kappa * r) / kappa;
}
}  // namespace

TEST_CASE("radial oracle: zero potential") {
  PotentialSpec v = PotentialSpec::zero(3);
  auto s = solve_scattering_radial(v, 2.0);
  CHECK(std::abs(s.scattering_length) < 1e-12);
  CHECK(std::abs(s.b) < 1e-11);
}

TEST_CASE("radial oracle: square well closed form") {
  PotentialSpec v = PotentialSpec::square_well(3, 50.0, 1.0);
  auto s = solve_scattering_radial(v, 2.0);
  double a_exact = well_scattering_length(50.0, 1.0);  // 1 - tanh(5)/5
  CHECK(a_exact == Catch::Approx(0.800018159147).epsilon(1e-9));
  CHECK(s.scattering_length == Catch::Approx(a_exact).epsilon(1e-9));
  CHECK(s.b == Catch::Approx(8.0 * M_PI * a_exact).epsilon(1e-9));
  CHECK(s.f_min > 0.0);
  CHECK(s.f_min < 1.0);
}

TEST_CASE("radial oracle: hard-sphere limit from below") {
  double prev = 0.0;
  for (double v0 : {1e2, 1e3, 1e4}) {
    PotentialSpec v = PotentialSpec::square_well(3, v0, 1.0);
    auto s = solve_scattering_radial(v, 2.0);
    CHECK(s.b > prev);
    CHECK(s.b < 8.0 * M_PI);
    CHECK(s.scattering_length == Catch::Approx(well_scattering_length(v0, 1.0)).epsilon(1e-8));
    prev = s.b;
  }
}

TEST_CASE("radial oracle: rejects bad domain") {
  PotentialSpec v = PotentialSpec::square_well(3, 50.0, 1.0);
  CHECK_THROWS_AS(solve_scattering_radial(v, 0.8), ToolkitError);
}

TEST_CASE("two-body scaling law via the radial oracle") {
  PotentialSpec w = PotentialSpec::square_well(3, 12.0, 1.0);
  double b_ref = solve_scattering_radial(w, 3.0).b;
  for (long n : {2L, 4L, 8L}) {
    PotentialSpec wn = scale_potential(w, n, 0.5);
    auto s = solve_scattering_radial(wn, 3.0 / double(n));
    CHECK(s.b * double(n) / b_ref == Catch::Approx(1.0).margin(5e-3));
  }
}

TEST_CASE("radial oracle: monotone in the potential") {
  double b1 = solve_scattering_radial(PotentialSpec::square_well(3, 10.0, 1.0), 2.5).b;
  double b2 = solve_scattering_radial(PotentialSpec::square_well(3, 20.0, 1.0), 2.5).b;
  CHECK(b1 <= b2);
}

TEST_CASE("3D solver: zero potential") {
  PotentialSpec v = PotentialSpec::zero(3);
  ScatterOptions o;
  o.n = 24;
  o.extrapolate = false;
  // zero support: give an explicit radius
  auto s = detail::solve_impl<3>(v, 2.0, 1e-8, o);
  CHECK(std::abs(s.b) < 1e-12);
  for (double w : s.omega) CHECK(std::abs(w) < 1e-12);
}

TEST_CASE("3D solver vs radial oracle on the square well") {
  PotentialSpec v = PotentialSpec::square_well(3, 50.0, 1.0);
  auto oracle = solve_scattering_radial(v, 2.0);
  ScatterOptions o;
  o.n = 64;
  auto s = solve_scattering(v, 4.0, 1e-8, o);
  INFO("b grid " << s.b << " oracle " << oracle.b << " primary " << s.b_primary);
  CHECK(std::abs(s.b - oracle.b) / oracle.b < 2e-2);
  CHECK(s.f_min > 0.0);
  for (double w : s.omega) {
    CHECK(w >= -1e-10);
    CHECK(w < 1.0);
  }
  // first Born domination, discrete
  CHECK(s.b <= s.integral_v);
  // energy consistency between quadrature and the discrete functional
  CHECK(std::abs(s.b_primary - s.functional_value) <=
        10.0 * 1e-8 * std::max(1.0, std::abs(s.b_primary)));

  SECTION("pointwise bounds and far-field decay") {
    auto rep = check_pointwise_bounds(s);
    CHECK(rep.pass);
    CHECK(rep.f_min > 0.0);
    CHECK(rep.c_omega > 0.0);
    // omega ~ a/r in the far field: exponent within 10% of d-2 = 1
    CHECK(std::abs(rep.decay_exponent - 1.0) < 0.1);
  }
}

TEST_CASE("3D solver: domain precondition") {
  PotentialSpec v = PotentialSpec::square_well(3, 50.0, 1.0);
  CHECK_THROWS_AS(solve_scattering(v, 2.0, 1e-8), ToolkitError);
}

TEST_CASE("discrete minimizer characterization") {
  // perturbing omega along random compactly supported directions cannot
  // lower the discrete scattering functional beyond the residual allowance
  PotentialSpec v = PotentialSpec::square_well(3, 30.0, 1.0);
  const int n = 32;
  auto prob = build_scattering_problem<3>(v, 4.0, n, KineticMetric::standard, 3);
  std::vector<double> omega(prob.grid->size(), 0.0);
  auto cg = conjugate_gradient(prob.op, prob.op.vpot, omega, 1e-10, 20 * n);
  REQUIRE(cg.converged);
  const double e0 = prob.functional(omega);
  CHECK(std::abs(e0 - prob.grid->cell_volume() *
                          deterministic_sum(omega.size(), [&](std::size_t i) {
                            return prob.op.vpot[i] * (1.0 - omega[i]);
                          })) < 1e-6 * std::abs(e0));

  auto rng = rng_stream(42, 0);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<std::size_t> pick(0, prob.grid->size() - 1);
  const double t = 1e-4;
  std::vector<double> pert(omega.size());
  for (int trial = 0; trial < 100; ++trial) {
    pert = omega;
    // a compactly supported bump: a handful of random grid points
    double pnorm2 = 0.0;
    for (int k = 0; k < 8; ++k) {
      double amp = nd(rng);
      pert[pick(rng)] += t * amp;
      pnorm2 += amp * amp;
    }
    double e1 = prob.functional(pert);
    // allowed decrease: 2 t ||r|| ||phi|| with ||r|| <= cg tol scale
    double allowance = 10.0 * t * std::sqrt(pnorm2) * 1e-6 + 1e-12;
    CHECK(e1 >= e0 - allowance);
  }
}

TEST_CASE("born series basics") {
  SECTION("zero potential") {
    PotentialSpec z3 = PotentialSpec::square_well(3, 0.0, 1.0);
    CHECK(born_series(z3, 1) == Catch::Approx(0.0).margin(1e-14));
    CHECK(born_series(z3, 2) == Catch::Approx(0.0).margin(1e-14));
  }
  SECTION("order bound") {
    PotentialSpec v = PotentialSpec::square_well(3, 5.0, 1.0);
    CHECK_THROWS_AS(born_series(v, 3), ToolkitError);
  }
  SECTION("sandwich for the default well") {
    PotentialSpec v = PotentialSpec::square_well(3, 50.0, 1.0);
    double b = solve_scattering_radial(v, 2.0).b;
    double b1 = born_series(v, 1, 40);
    double b2 = born_series(v, 2, 40);
    INFO("born1 " << b1 << " born2 " << b2 << " b " << b);
    CHECK(b1 > b);
    CHECK(b2 <= b);
    CHECK(b1 == Catch::Approx(50.0 * 4.0 * M_PI / 3.0).epsilon(2e-2));
  }
}

TEST_CASE("6D modified scattering") {
  PotentialSpec v = PotentialSpec::gaussian6d(4.0, 1.0, 2.5);

  SECTION("zero potential gives zero") {
    PotentialSpec z = PotentialSpec::gaussian6d(0.0, 1.0, 2.5);
    ScatterOptions o;
    o.n = 8;
    o.extrapolate = false;
    auto m = scattering_energy_modified(z, 4.0 * z.support_radius(), 1e-8, o);
    CHECK(std::abs(m.b_m) < 1e-12);
    CHECK(std::abs(m.cross_check) < 1e-12);
  }

  SECTION("two-path agreement at coarse resolution") {
    ScatterOptions o;
    o.n = 10;
    auto m = scattering_energy_modified(v, 4.0 * v.support_radius(), 1e-8, o);
    INFO("b_m " << m.b_m << " cross " << m.cross_check << " gap " << m.rel_gap);
    CHECK(m.b_m > 0.0);
    CHECK(m.cross_check > 0.0);
    CHECK(m.rel_gap < 5e-2);
  }

  SECTION("born sandwich") {
    ScatterOptions o;
    o.n = 12;
    auto m = scattering_energy_modified(v, 4.0 * v.support_radius(), 1e-8, o);
    double b1 = born_series(v, 1, 10);
    double b2 = born_series(v, 2, 10);
    double rhs = b1 - b2;  // (1/2) int V (-Delta)^{-1} V
    INFO("int V " << b1 << " b_m " << m.b_m << " rhs " << rhs);
    CHECK(b1 - m.b_m >= 0.0);
    CHECK(b1 - m.b_m <= rhs);
  }

  SECTION("asymmetric potential rejected with per-element report") {
    Gps1Field f;
    f.dim = 6;
    f.n = 7;
    f.spacing = 0.3;
    f.data.assign(std::size_t(std::pow(7, 6)), 0.0);
    for (std::size_t idx = 0; idx < f.data.size(); ++idx) {
      std::size_t rem = idx;
      double x[6];
      for (int k = 5; k >= 0; --k) {
        x[k] = (double(rem % 7) - 3.0) * f.spacing;
        rem /= 7;
      }
      double r2 = 0;
      for (double c : x) r2 += c * c;
      f.data[idx] = r2 <= 0.81 ? x[0] * x[0] : 0.0;
    }
    PotentialSpec bad = PotentialSpec::from_grid(std::move(f));
    ScatterOptions o;
    o.n = 8;
    CHECK_THROWS_AS(scattering_energy_modified(bad, 4.0 * bad.support_radius(), 1e-8, o),
                    ToolkitError);
  }
}

TEST_CASE("three-body scaling in rescaled units") {
  PotentialSpec v = PotentialSpec::gaussian6d(4.0, 1.0, 2.5);
  ScatterOptions o;
  o.n = 10;
  double base_domain = 4.0 * v.support_radius();
  auto m1 = scattering_energy_modified(v, base_domain, 1e-8, o);
  for (long n : {4L}) {
    PotentialSpec vn = scale_potential(v, n, 0.5);
    auto mn = scattering_energy_modified(vn, base_domain / std::sqrt(double(n)), 1e-8, o);
    double ratio = mn.b_m * double(n) * double(n) / m1.b_m;
    INFO("N " << n << " ratio " << ratio);
    CHECK(ratio == Catch::Approx(1.0).margin(2e-2));
  }
}
