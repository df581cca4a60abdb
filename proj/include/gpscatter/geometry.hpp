#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "gpscatter/common.hpp"
#include "gpscatter/metric.hpp"
#include "gpscatter/potentials.hpp"

namespace gpscatter {

struct SymmetryReport {
  struct PerElement {
    std::string name;
    double max_deviation;
  };
  std::vector<PerElement> per_element;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// (1/6) sum_g v(g x)
inline double group_averaged_value(const PotentialSpec& v, const std::array<double, 6>& x,
                                   const std::vector<GroupElement>& g) {
  double s = 0.0;
  for (const auto& e : g) s += v(e.apply(x).data());
  return s / double(g.size());
}

// Samples |v(x) - v(g x)| over the support for each group element.
inline SymmetryReport check_three_body_symmetry(const PotentialSpec& v, double tolerance,
                                                int n_samples = 4096,
                                                std::uint64_t seed = 42) {
  require(v.dim() == 6, ErrorKind::precondition,
          "three-body symmetry check needs a 6-dimensional potential");
  auto group = symmetry_group();
  double r0 = v.support_radius();
  if (!std::isfinite(r0) || r0 <= 0.0) r0 = 1.0;
  auto rng = rng_stream(seed, 0);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  SymmetryReport rep;
  rep.tolerance = tolerance;
  std::vector<std::array<double, 6>> pts(static_cast<std::size_t>(n_samples));
  for (auto& x : pts) {
    double nrm = 0.0;
    for (auto& c : x) {
      c = nd(rng);
      nrm += c * c;
    }
    // uniform in the ball of radius 1.1 r0 (samples just outside the support
    // also probe the support geometry)
    double r = 1.1 * r0 * std::pow(ud(rng), 1.0 / 6.0) / std::sqrt(nrm);
    for (auto& c : x) c *= r;
  }
  for (const auto& g : group) {
    double dev = 0.0;
    for (const auto& x : pts) {
      double gx[6];
      g.apply(x.data(), gx);
      dev = std::max(dev, std::abs(v(x.data()) - v(gx)));
    }
    rep.per_element.push_back({g.name, dev});
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  rep.pass = rep.max_deviation <= tolerance;
  return rep;
}

// U := (1/6) sum_g  Utilde(M^{-1} g .) det(M^{-1}), then U_R = R^{-6} U(R^{-1} .).
// For radial Utilde all six terms coincide (|M^{-1} g x| = |M^{-1} x|), so the
// returned descriptor stores the collapsed form; G-invariance is exact.
inline PotentialSpec symmetrize_dyson_potential(const PotentialSpec& u_tilde, double r_scale,
                                                double integral_tol = 1e-6) {
  require(u_tilde.dim() == 6, ErrorKind::precondition, "u_tilde must be 6-dimensional");
  require(u_tilde.is_radial(), ErrorKind::precondition, "u_tilde must be radial");
  require(r_scale > 0.0, ErrorKind::precondition, "r_scale must be positive");
  double integral = u_tilde.integral();
  require(std::abs(integral - 1.0) <= integral_tol, ErrorKind::precondition,
          "u_tilde integral deviates from 1 beyond tolerance");
  auto base = std::make_shared<PotentialSpec>(u_tilde);
  PotentialSpec u = PotentialSpec::metric_radial(base);
  double r6 = std::pow(r_scale, 6);
  return u.scaled(1.0 / r6, 1.0 / r_scale);
}

// ---------------------------------------------------------------------------
// Center-of-mass reduction of the three-particle lattice operator
//   -lap_1 - lap_2 - lap_3 + V(x1-x2, x1-x3)
// on a periodic lattice. For each total momentum K the operator is exactly
// unitarily equivalent to a block acting on the relative wave function
// chi(r2, r3), r2 = x1-x2, r3 = x1-x3:
//   per axis j:  FD laplacian in r2  +  FD laplacian in r3
//              + (2 - e^{i K_j h} S^{++}_j - e^{-i K_j h} S^{--}_j)/h^2
// where S^{++}_j shifts r2 and r3 together; plus the diagonal V(r2, r3).
// Expanding the blocks reproduces (1/3) p_{com}^2 + 2(p2^2 + p3^2 + p2.p3) + V.
// ---------------------------------------------------------------------------

struct ThreeParticleLattice {
  int l = 4;          // sites per axis
  double h = 1.0;     // spacing
  bool periodic = true;
  const PotentialSpec* interaction = nullptr;  // 6D, may be null
};

class RelativeOperator {
 public:
  using cplx = std::complex<double>;

  RelativeOperator(const ThreeParticleLattice& lat, const std::array<double, 3>& total_k)
      : l_(lat.l), h_(lat.h), k_(total_k) {
    n_ = 1;
    for (int i = 0; i < 6; ++i) n_ *= static_cast<std::size_t>(l_);
    vdiag_.assign(n_, 0.0);
    if (lat.interaction) {
      std::vector<double> x(6);
      for (std::size_t idx = 0; idx < n_; ++idx) {
        auto r = decode(idx);
        for (int c = 0; c < 3; ++c) {
          x[c] = signed_disp(r[c]) * h_;
          x[3 + c] = signed_disp(r[3 + c]) * h_;
        }
        vdiag_[idx] = (*lat.interaction)(x.data());
      }
    }
    for (int j = 0; j < 3; ++j) phase_[j] = std::polar(1.0, k_[j] * h_);
  }

  std::size_t size() const { return n_; }
  const std::vector<double>& diagonal_potential() const { return vdiag_; }

  void apply(const std::vector<cplx>& in, std::vector<cplx>& out) const {
    out.assign(n_, cplx(0.0));
    const double inv_h2 = 1.0 / (h_ * h_);
    for (std::size_t idx = 0; idx < n_; ++idx) {
      auto r = decode(idx);
      cplx acc = (12.0 * inv_h2 + vdiag_[idx] + 6.0 * inv_h2) * in[idx];
      // laplacians in r2 and r3 (6 axes), periodic
      for (int ax = 0; ax < 6; ++ax) {
        acc -= inv_h2 * (in[shift(idx, ax, +1)] + in[shift(idx, ax, -1)]);
      }
      // joint-shift block carrying the first particle's kinetic term
      for (int j = 0; j < 3; ++j) {
        std::size_t up = shift(shift(idx, j, +1), 3 + j, +1);
        std::size_t dn = shift(shift(idx, j, -1), 3 + j, -1);
        acc -= inv_h2 * (phase_[j] * in[up] + std::conj(phase_[j]) * in[dn]);
      }
      out[idx] = acc;
      (void)r;
    }
  }

  double quadratic_form(const std::vector<cplx>& chi) const {
    std::vector<cplx> hchi;
    apply(chi, hchi);
    cplx s = 0.0;
    double nrm = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      s += std::conj(chi[i]) * hchi[i];
      nrm += std::norm(chi[i]);
    }
    return s.real() / nrm;
  }

  // Exact lattice symbol on the relative plane wave e^{i(q2.r2 + q3.r3)}.
  double lattice_symbol(const std::array<double, 3>& q2, const std::array<double, 3>& q3) const {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
      s += fd_symbol(q2[j]) + fd_symbol(q3[j]) + fd_symbol(k_[j] + q2[j] + q3[j]);
    }
    return s;
  }

  // Continuum kinetic form (1/3)|K|^2 + 2(|p2|^2 + |p3|^2 + p2.p3) at the
  // paper's relative momenta p2 = K/3 + q2, p3 = K/3 + q3.
  double continuum_symbol(const std::array<double, 3>& q2, const std::array<double, 3>& q3) const {
    double k2 = 0.0, c = 0.0;
    for (int j = 0; j < 3; ++j) {
      double p2 = k_[j] / 3.0 + q2[j];
      double p3 = k_[j] / 3.0 + q3[j];
      k2 += k_[j] * k_[j];
      c += 2.0 * (p2 * p2 + p3 * p3 + p2 * p3);
    }
    return k2 / 3.0 + c;
  }

  int l() const { return l_; }
  double h() const { return h_; }
  const std::array<double, 3>& total_k() const { return k_; }

 private:
  double fd_symbol(double q) const {
    double s = std::sin(q * h_ / 2.0);
    return 4.0 * s * s / (h_ * h_);
  }
  std::array<int, 6> decode(std::size_t idx) const {
    std::array<int, 6> r;
    for (int a = 5; a >= 0; --a) {
      r[a] = static_cast<int>(idx % static_cast<std::size_t>(l_));
      idx /= static_cast<std::size_t>(l_);
    }
    return r;
  }
  std::size_t shift(std::size_t idx, int axis, int dir) const {
    // stride of axis (row-major, axis 0 slowest)
    std::size_t stride = 1;
    for (int a = 5; a > axis; --a) stride *= static_cast<std::size_t>(l_);
    std::size_t coord = (idx / stride) % static_cast<std::size_t>(l_);
    std::size_t next = (coord + static_cast<std::size_t>(l_ + dir)) % static_cast<std::size_t>(l_);
    return idx + (next - coord) * stride;
  }
  int signed_disp(int c) const {
    // minimal-image signed displacement
    return c >= l_ / 2 ? c - l_ : c;
  }

  int l_;
  double h_;
  std::array<double, 3> k_;
  std::size_t n_ = 0;
  std::vector<double> vdiag_;
  std::array<std::complex<double>, 3> phase_;
};

inline RelativeOperator remove_center_of_mass(const ThreeParticleLattice& lat,
                                              const std::array<double, 3>& total_k = {0, 0, 0}) {
  require(lat.periodic, ErrorKind::precondition,
          "center-of-mass reduction requires a periodic lattice");
  require(lat.l >= 2, ErrorKind::precondition, "lattice too small");
  return RelativeOperator(lat, total_k);
}

// Reference quadratic form of the untransformed three-particle operator on a
// full 9D lattice vector, used to validate the reduction.
class ThreeParticleForm {
 public:
  using cplx = std::complex<double>;
  explicit ThreeParticleForm(const ThreeParticleLattice& lat) : lat_(lat) {
    n1_ = 1;
    for (int i = 0; i < 3; ++i) n1_ *= static_cast<std::size_t>(lat.l);
    n_ = n1_ * n1_ * n1_;
  }

  std::size_t size() const { return n_; }

  // psi(x1,x2,x3) = e^{i K.x1} chi(x1-x2, x1-x3)
  std::vector<cplx> embed(const RelativeOperator& rel, const std::vector<cplx>& chi) const {
    std::vector<cplx> psi(n_);
    const int l = lat_.l;
    for (std::size_t i1 = 0; i1 < n1_; ++i1) {
      auto a = site_coords(i1);
      double kx = 0.0;
      for (int j = 0; j < 3; ++j) kx += rel.total_k()[j] * a[j] * lat_.h;
      cplx ph = std::polar(1.0, kx);
      for (std::size_t i2 = 0; i2 < n1_; ++i2) {
        auto b = site_coords(i2);
        for (std::size_t i3 = 0; i3 < n1_; ++i3) {
          auto c = site_coords(i3);
          std::size_t ridx = 0;
          for (int j = 0; j < 3; ++j) ridx = ridx * l + ((a[j] - b[j] + l) % l);
          for (int j = 0; j < 3; ++j) ridx = ridx * l + ((a[j] - c[j] + l) % l);
          psi[(i1 * n1_ + i2) * n1_ + i3] = ph * chi[ridx];
        }
      }
    }
    return psi;
  }

  double quadratic_form(const std::vector<cplx>& psi) const {
    const int l = lat_.l;
    const double inv_h2 = 1.0 / (lat_.h * lat_.h);
    cplx acc = 0.0;
    double nrm = 0.0;
    std::vector<double> x(6);
    for (std::size_t idx = 0; idx < n_; ++idx) {
      std::size_t i3 = idx % n1_, i2 = (idx / n1_) % n1_, i1 = idx / (n1_ * n1_);
      auto a = site_coords(i1);
      auto b = site_coords(i2);
      auto c = site_coords(i3);
      cplx kin = 18.0 * inv_h2 * psi[idx];
      for (int p = 0; p < 3; ++p) {
        for (int j = 0; j < 3; ++j) {
          for (int dir : {-1, +1}) {
            std::array<int, 3> aa = a, bb = b, cc = c;
            if (p == 0) aa[j] = (aa[j] + dir + l) % l;
            if (p == 1) bb[j] = (bb[j] + dir + l) % l;
            if (p == 2) cc[j] = (cc[j] + dir + l) % l;
            std::size_t nidx = (site_index(aa) * n1_ + site_index(bb)) * n1_ + site_index(cc);
            kin -= inv_h2 * psi[nidx];
          }
        }
      }
      double vv = 0.0;
      if (lat_.interaction) {
        for (int j = 0; j < 3; ++j) {
          x[j] = signed_disp(a[j] - b[j]) * lat_.h;
          x[3 + j] = signed_disp(a[j] - c[j]) * lat_.h;
        }
        vv = (*lat_.interaction)(x.data());
      }
      acc += std::conj(psi[idx]) * (kin + vv * psi[idx]);
      nrm += std::norm(psi[idx]);
    }
    return acc.real() / nrm;
  }

 private:
  std::array<int, 3> site_coords(std::size_t i) const {
    const int l = lat_.l;
    return {static_cast<int>(i / (l * l)), static_cast<int>((i / l) % l),
            static_cast<int>(i % l)};
  }
  std::size_t site_index(const std::array<int, 3>& a) const {
    const int l = lat_.l;
    return (static_cast<std::size_t>(a[0]) * l + a[1]) * l + a[2];
  }
  int signed_disp(int c) const {
    int l = lat_.l;
    c = ((c % l) + l) % l;
    return c >= l / 2 ? c - l : c;
  }

  ThreeParticleLattice lat_;
  std::size_t n1_ = 0, n_ = 0;
};

}  // namespace gpscatter
