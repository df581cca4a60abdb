#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "gpscatter/geometry.hpp"
#include "gpscatter/metric.hpp"
#include "gpscatter/potentials.hpp"

using namespace gpscatter;

TEST_CASE("metric matrix constants") {
  MetricGroup g = metric_matrix();

  // det M = 3 sqrt(3) / 8 on R^6
  CHECK(std::abs(g.det_m - 3.0 * std::sqrt(3.0) / 8.0) < 1e-12);

  // M^2 = (1/2) [[2,1],[1,2]] per block entry
  Block2 m2 = g.m * g.m;
  CHECK(std::abs(m2.a() - 1.0) < 1e-14);
  CHECK(std::abs(m2.b() - 0.5) < 1e-14);
  CHECK(std::abs(m2.c() - 0.5) < 1e-14);
  CHECK(std::abs(m2.d() - 1.0) < 1e-14);

  // M M^{-1} = I
  Block2 id = g.m * g.m_inverse;
  CHECK(std::abs(id.a() - 1.0) < 1e-14);
  CHECK(std::abs(id.b()) < 1e-14);
  CHECK(std::abs(id.c()) < 1e-14);
  CHECK(std::abs(id.d() - 1.0) < 1e-14);

  // eigenvalues {sqrt(1/2), sqrt(3/2)} along (1,-1) and (1,1)
  double lo = g.m.a() - g.m.b();
  double hi = g.m.a() + g.m.b();
  CHECK(std::abs(lo - std::sqrt(0.5)) < 1e-14);
  CHECK(std::abs(hi - std::sqrt(1.5)) < 1e-14);
}

TEST_CASE("symmetry group structure") {
  auto g = symmetry_group();
  REQUIRE(g.size() == 6);

  // distinct elements, |det| = 1
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(g[i].det2()) == 1);
    for (std::size_t j = i + 1; j < g.size(); ++j) CHECK_FALSE(g[i].same_matrix(g[j]));
  }

  // exact closure in integer arithmetic
  for (const auto& a : g)
    for (const auto& b : g) {
      GroupElement p = a * b;
      bool found = false;
      for (const auto& c : g) found = found || c.same_matrix(p);
      CHECK(found);
    }

  const auto& S = g[1];
  const auto& A = g[2];
  CHECK((S * S).same_matrix(g[0]));
  CHECK((A * A).same_matrix(g[0]));
  CHECK((S * A * S).same_matrix(A * S * A));
}

TEST_CASE("metric invariance g m^2 g^T = m^2") {
  MetricGroup mg = metric_matrix();
  Block2 m2 = mg.m * mg.m;
  for (const auto& g : mg.elements) {
    Block2 gb = g.as_block();
    Block2 t = gb * m2 * gb.transpose();
    double defect = 0.0;
    for (int k = 0; k < 4; ++k) defect = std::max(defect, std::abs(t.m[k] - m2.m[k]));
    CHECK(defect < 1e-14);
  }
}

TEST_CASE("three-body symmetry check") {
  // v(x,y) = exp(-(|x|^2 + |y|^2 - x.y)) is the G-invariant Gaussian: the
  // exponent is the quadratic form of (3/4) M^{-2}, the relabeling-invariant
  // metric. (Flipping the sign of the cross term breaks invariance under the
  // A-action; see the analytic check below.)
  PotentialSpec v = PotentialSpec::gaussian6d(1.0, 1.0);
  auto rep = check_three_body_symmetry(v, 1e-12, 2048);
  CHECK(rep.pass);
  CHECK(rep.max_deviation <= 1e-12);

  // the closed form matches the descriptor, and the invariance holds
  // analytically: with u = x-y, v = -y the exponent |u|^2+|v|^2-u.v is fixed
  auto rng = rng_stream(7, 0);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    std::array<double, 6> x;
    for (auto& c : x) c = 0.5 * nd(rng);
    double xx = 0, yy = 0, xy = 0;
    for (int j = 0; j < 3; ++j) {
      xx += x[j] * x[j];
      yy += x[3 + j] * x[3 + j];
      xy += x[j] * x[3 + j];
    }
    CHECK(v(x.data()) == Catch::Approx(std::exp(-xx - yy + xy)).margin(1e-14));
    double au = xx - 2 * xy + yy, av = yy, auv = -(xy - yy);
    CHECK(std::exp(-(au + av - auv)) == Catch::Approx(std::exp(-xx - yy + xy)).margin(1e-13));
  }

  SECTION("asymmetric potential fails under S") {
    // v(x,y) = |x|^2 on a ball
    Gps1Field f;
    f.dim = 6;
    f.n = 9;
    f.spacing = 0.25;
    f.data.resize(std::size_t(std::pow(9, 6)));
    for (std::size_t idx = 0; idx < f.data.size(); ++idx) {
      std::size_t rem = idx;
      double x[6];
      for (int k = 5; k >= 0; --k) {
        x[k] = (double(rem % 9) - 4.0) * f.spacing;
        rem /= 9;
      }
      double r2 = 0;
      for (double c : x) r2 += c * c;
      double x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      f.data[idx] = r2 <= 1.0 ? x2 : 0.0;
    }
    PotentialSpec vg = PotentialSpec::from_grid(std::move(f));
    auto bad = check_three_body_symmetry(vg, 1e-6, 2048);
    CHECK_FALSE(bad.pass);
  }

  SECTION("zero potential passes with zero deviation") {
    auto z = check_three_body_symmetry(PotentialSpec::zero(6), 0.0, 512);
    CHECK(z.pass);
    CHECK(z.max_deviation == 0.0);
  }

  SECTION("3-dimensional potential rejected") {
    CHECK_THROWS_AS(check_three_body_symmetry(PotentialSpec::square_well(3, 1.0, 1.0), 1e-12),
                    ToolkitError);
  }
}

TEST_CASE("symmetrized Dyson potential") {
  const double r1 = 0.125, r2 = 0.25;
  PotentialSpec u_tilde = PotentialSpec::radial_annulus_indicator(6, r1, r2);
  PotentialSpec u = symmetrize_dyson_potential(u_tilde, 1.0);
  MetricGroup mg = metric_matrix();

  SECTION("unit integral") {
    CHECK(u.integral() == Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("G-invariance is exact by construction") {
    auto rep = check_three_body_symmetry(u, 1e-12, 4096);
    CHECK(rep.pass);
  }

  SECTION("support is the metric image of the annulus") {
    // U(x) != 0 iff r1 <= |M^{-1} x| <= r2, i.e. |x| ranges over
    // [sqrt(1/2) r1, sqrt(3/2) r2] with the extremes reached along the
    // metric eigendirections.
    auto rng = rng_stream(11, 0);
    std::normal_distribution<double> nd;
    double lo_seen = 1e9, hi_seen = 0.0;
    for (int t = 0; t < 20000; ++t) {
      std::array<double, 6> x;
      double nrm = 0;
      for (auto& c : x) {
        c = nd(rng);
        nrm += c * c;
      }
      double rr = 0.05 + 0.35 * (t / 20000.0);
      for (auto& c : x) c *= rr / std::sqrt(nrm);
      double val = u(x.data());
      double rho = mg.m_inv_norm(x.data());
      if (val > 0.0) {
        CHECK(rho >= r1 - 1e-12);
        CHECK(rho <= r2 + 1e-12);
        lo_seen = std::min(lo_seen, rr);
        hi_seen = std::max(hi_seen, rr);
      } else if (rho > r1 + 1e-12 && rho < r2 - 1e-12) {
        FAIL("zero sample strictly inside the metric annulus");
      }
    }
    CHECK(lo_seen >= std::sqrt(0.5) * r1 - 1e-12);
    CHECK(hi_seen <= std::sqrt(1.5) * r2 + 1e-12);
    // the support genuinely reaches below sqrt(2/3) r1 along the squeezed
    // eigendirection (1,-1)/sqrt(2)
    std::array<double, 6> edge{};
    double t_edge = std::sqrt(0.5) * (r1 * 1.02);
    edge[0] = t_edge / std::sqrt(2.0);
    edge[3] = -t_edge / std::sqrt(2.0);
    CHECK(u(edge.data()) > 0.0);
    double edge_norm = std::sqrt(edge[0] * edge[0] + edge[3] * edge[3]);
    CHECK(edge_norm < std::sqrt(2.0 / 3.0) * r1);
  }

  SECTION("r_scale rescales support and keeps the integral") {
    PotentialSpec us = symmetrize_dyson_potential(u_tilde, 0.5);
    CHECK(us.integral() == Catch::Approx(1.0).margin(1e-9));
    std::array<double, 6> x{};
    x[0] = 0.5 * (r1 + r2) / std::sqrt(2.0) * 0.5;
    x[3] = x[0];
    // |M^{-1}x| = sqrt(2/3)|x| along (1,1); scaled by 1/r_scale
    double rho = mg.m_inv_norm(x.data()) / 0.5;
    if (rho >= r1 && rho <= r2) CHECK(us(x.data()) > 0.0);
  }

  SECTION("group averaging is idempotent on the symmetric output") {
    auto rng = rng_stream(13, 0);
    std::normal_distribution<double> nd;
    auto group = symmetry_group();
    for (int t = 0; t < 200; ++t) {
      std::array<double, 6> x;
      for (auto& c : x) c = 0.2 * nd(rng);
      double avg = group_averaged_value(u, x, group);
      CHECK(avg == Catch::Approx(u(x.data())).margin(1e-13));
    }
  }

  SECTION("rejects non-radial input") {
    PotentialSpec g6 = PotentialSpec::gaussian6d(1.0, 1.0, 1.0);
    CHECK_THROWS_AS(symmetrize_dyson_potential(g6, 1.0), ToolkitError);
  }

  SECTION("rejects integral far from one") {
    PotentialSpec bad = PotentialSpec::radial_annulus_indicator(6, r1, r2, 99.0);
    CHECK_THROWS_AS(symmetrize_dyson_potential(bad, 1.0), ToolkitError);
  }
}

TEST_CASE("center-of-mass reduction") {
  const int l = 6;
  const double h = 0.7;
  const double k1 = 2.0 * M_PI / (l * h);  // smallest dual momentum

  SECTION("rejects non-periodic lattice") {
    ThreeParticleLattice lat;
    lat.periodic = false;
    CHECK_THROWS_AS(remove_center_of_mass(lat), ToolkitError);
  }

  SECTION("symmetric momenta (k,k,k): relative part vanishes") {
    ThreeParticleLattice lat{l, h, true, nullptr};
    std::array<double, 3> kvec{k1, k1, k1};
    std::array<double, 3> bigk{3 * k1, 3 * k1, 3 * k1};
    auto rel = remove_center_of_mass(lat, bigk);
    // particle momenta (k,k,k) <-> q2 = q3 = -k
    std::array<double, 3> q2{-k1, -k1, -k1}, q3{-k1, -k1, -k1};
    // paper relative momenta K/3 + q = 0, so the continuum form is pure
    // center of mass: (1/3)|3k|^2 = 3|k|^2
    double cont = rel.continuum_symbol(q2, q3);
    double k2 = 3.0 * k1 * k1;
    CHECK(cont == Catch::Approx(3.0 * k2).epsilon(1e-12));
    // exact lattice identity: block symbol equals the three-particle symbol
    double lat_sym = rel.lattice_symbol(q2, q3);
    double d1 = 4.0 * std::pow(std::sin(k1 * h / 2), 2) / (h * h);
    CHECK(lat_sym == Catch::Approx(9.0 * d1).epsilon(1e-12));
    CHECK(std::abs(lat_sym - cont) / cont < 0.15);  // discretization error
    (void)kvec;
  }

  SECTION("momenta (k,-k,0): exact lattice symbol agreement") {
    ThreeParticleLattice lat{l, h, true, nullptr};
    std::array<double, 3> zero{0, 0, 0};
    auto rel = remove_center_of_mass(lat, zero);
    // particle momenta k1=(k,0,0), k2=(-k,0,0), k3=0 <-> q2=(k,0,0), q3=0
    std::array<double, 3> q2{k1, 0, 0}, q3{0, 0, 0};
    double d1 = 4.0 * std::pow(std::sin(k1 * h / 2), 2) / (h * h);
    double lhs = 2.0 * d1;  // sum of the three particle symbols
    CHECK(rel.lattice_symbol(q2, q3) == Catch::Approx(lhs).epsilon(1e-12));
  }

  SECTION("generic interaction, random vector: forms agree") {
    PotentialSpec v = PotentialSpec::gaussian6d(2.0, 0.8, 1.2);
    ThreeParticleLattice lat{4, 0.7, true, &v};
    std::array<double, 3> bigk{2.0 * M_PI / (4 * 0.7), 0.0, 2.0 * 2.0 * M_PI / (4 * 0.7)};
    auto rel = remove_center_of_mass(lat, bigk);
    ThreeParticleForm full(lat);
    auto rng = rng_stream(42, 3);
    std::normal_distribution<double> nd;
    std::vector<std::complex<double>> chi(rel.size());
    for (auto& c : chi) c = {nd(rng), nd(rng)};
    double q_rel = rel.quadratic_form(chi);
    auto psi = full.embed(rel, chi);
    double q_full = full.quadratic_form(psi);
    CHECK(std::abs(q_rel - q_full) / std::abs(q_full) < 1e-10);
  }
}
