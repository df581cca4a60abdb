#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "gpscatter/common.hpp"
#include "gpscatter/io.hpp"
#include "gpscatter/metric.hpp"

namespace gpscatter {

enum class PotentialKind {
  zero,
  square_well,
  radial_annulus_indicator,
  gaussian6d,
  grid,
  metric_radial,  // radial profile in |M^{-1} x|, the shape of symmetrized Dyson potentials
  mapped6d,       // V(M x), the change-of-variables image of a 6D potential
};

// Uniform radial samples with Catmull-Rom cubic interpolation, clamped at 0
// so interpolation wiggle near jumps cannot produce negative values.
struct RadialProfile {
  double r_max = 0.0;
  std::vector<double> samples;

  double operator()(double r) const {
    if (samples.empty() || r < 0.0 || r > r_max) return 0.0;
    const std::size_t m = samples.size();
    if (m == 1) return std::max(0.0, samples[0]);
    const double dr = r_max / double(m - 1);
    double t = r / dr;
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(t), m - 2);
    double u = t - double(i);
    auto at = [&](long k) {
      k = std::clamp<long>(k, 0, long(m) - 1);
      return samples[static_cast<std::size_t>(k)];
    };
    double p0 = at(long(i) - 1), p1 = at(long(i)), p2 = at(long(i) + 1), p3 = at(long(i) + 2);
    double v = p1 + 0.5 * u * (p2 - p0 +
               u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
               u * (3.0 * (p1 - p2) + p3 - p0)));
    return std::max(0.0, v);
  }
};

// A nonnegative compactly supported potential in R^d, d in {3,6}. Every kind
// carries (prefactor, arg_scale): V(x) = prefactor * base(arg_scale * x),
// which keeps the interaction scalings analytic.
class PotentialSpec {
 public:
  PotentialSpec() = default;

  static PotentialSpec zero(int dim) {
    PotentialSpec p;
    p.dim_ = dim;
    p.kind_ = PotentialKind::zero;
    return p;
  }

  static PotentialSpec square_well(int dim, double v0, double r) {
    require(v0 >= 0.0 && r > 0.0, ErrorKind::precondition, "square_well needs v0 >= 0, r > 0");
    PotentialSpec p;
    p.dim_ = dim;
    p.kind_ = PotentialKind::square_well;
    p.v0_ = v0;
    p.r_ = r;
    return p;
  }

  // Indicator of {r1 <= |x| <= r2}; value defaults to the unit-integral
  // normalization 1/vol(annulus).
  static PotentialSpec radial_annulus_indicator(int dim, double r1, double r2,
                                                double value = -1.0) {
    require(0.0 <= r1 && r1 < r2, ErrorKind::precondition, "annulus needs 0 <= r1 < r2");
    PotentialSpec p;
    p.dim_ = dim;
    p.kind_ = PotentialKind::radial_annulus_indicator;
    p.r1_ = r1;
    p.r2_ = r2;
    p.value_ = value > 0.0 ? value : 1.0 / (ball_volume(dim, r2) - ball_volume(dim, r1));
    return p;
  }

  // amp * exp(-(|x|^2 + |y|^2 - x.y)/sigma^2) truncated at |M^{-1}(x,y)| <=
  // cutoff. The exponent is (3/4)|M^{-1}(x,y)|^2, so both the profile and the
  // cutoff are invariant under the three-body symmetry group.
  static PotentialSpec gaussian6d(double amplitude, double sigma,
                                  double cutoff = std::numeric_limits<double>::infinity()) {
    require(amplitude >= 0.0 && sigma > 0.0, ErrorKind::precondition,
            "gaussian6d needs amplitude >= 0, sigma > 0");
    PotentialSpec p;
    p.dim_ = 6;
    p.kind_ = PotentialKind::gaussian6d;
    p.amp_ = amplitude;
    p.sigma_ = sigma;
    p.cutoff_ = cutoff;
    p.metric_ = metric_matrix();
    return p;
  }

  static PotentialSpec from_grid(Gps1Field field, bool radial = false) {
    PotentialSpec p;
    p.dim_ = field.dim;
    p.kind_ = PotentialKind::grid;
    p.grid_ = std::make_shared<Gps1Field>(std::move(field));
    p.grid_radial_ = radial;
    for (double v : p.grid_->data)
      require(v >= 0.0, ErrorKind::precondition, "grid potential has a negative sample");
    return p;
  }

  // V(M x): support shrinks to |x| <= sqrt(2) R0 at worst.
  static PotentialSpec mapped6d(std::shared_ptr<const PotentialSpec> base) {
    require(base && base->dim() == 6, ErrorKind::precondition, "mapped6d needs a 6D base");
    PotentialSpec p;
    p.dim_ = 6;
    p.kind_ = PotentialKind::mapped6d;
    p.base_ = std::move(base);
    p.metric_ = metric_matrix();
    return p;
  }

  // Profile in rho = |M^{-1} x| around a radial base potential.
  static PotentialSpec metric_radial(std::shared_ptr<const PotentialSpec> base) {
    require(base && base->dim() == 6 && base->is_radial(), ErrorKind::precondition,
            "metric_radial needs a radial 6D base");
    PotentialSpec p;
    p.dim_ = 6;
    p.kind_ = PotentialKind::metric_radial;
    p.base_ = std::move(base);
    p.metric_ = metric_matrix();
    p.prefactor_ = 1.0 / p.metric_.det_m;
    return p;
  }

  int dim() const { return dim_; }
  PotentialKind kind() const { return kind_; }
  double prefactor() const { return prefactor_; }
  double arg_scale() const { return arg_scale_; }

  bool is_radial() const {
    switch (kind_) {
      case PotentialKind::zero:
      case PotentialKind::square_well:
      case PotentialKind::radial_annulus_indicator:
        return true;
      case PotentialKind::grid:
        return grid_radial_;
      default:
        return false;
    }
  }

  double support_radius() const {
    double base = 0.0;
    switch (kind_) {
      case PotentialKind::zero: base = 0.0; break;
      case PotentialKind::square_well: base = r_; break;
      case PotentialKind::radial_annulus_indicator: base = r2_; break;
      case PotentialKind::gaussian6d:
        // cutoff bounds |M^{-1} x|, so |x| <= sqrt(3/2) cutoff
        base = std::sqrt(1.5) * cutoff_;
        break;
      case PotentialKind::grid: {
        double l = grid_->spacing * (grid_->n - 1) / 2.0;
        base = l * std::sqrt(double(dim_));
        break;
      }
      case PotentialKind::metric_radial:
        // |M^{-1} x| <= rho_max implies |x| <= sqrt(3/2) rho_max
        base = std::sqrt(1.5) * base_->support_radius();
        break;
      case PotentialKind::mapped6d:
        // |M x| <= R0 implies |x| <= sqrt(2) R0
        base = std::sqrt(2.0) * base_->support_radius();
        break;
    }
    return base / arg_scale_;
  }

  double sup_norm() const {
    double base = 0.0;
    switch (kind_) {
      case PotentialKind::zero: base = 0.0; break;
      case PotentialKind::square_well: base = v0_; break;
      case PotentialKind::radial_annulus_indicator: base = value_; break;
      case PotentialKind::gaussian6d: base = amp_; break;
      case PotentialKind::grid:
        for (double v : grid_->data) base = std::max(base, v);
        break;
      case PotentialKind::metric_radial: base = base_->sup_norm(); break;
      case PotentialKind::mapped6d: base = base_->sup_norm(); break;
    }
    return prefactor_ * base;
  }

  // Point evaluation.
  double operator()(const double* x) const {
    double y[6];
    for (int k = 0; k < dim_; ++k) y[k] = arg_scale_ * x[k];
    return prefactor_ * base_eval(y);
  }
  double operator()(const std::vector<double>& x) const { return (*this)(x.data()); }

  // Value for radial kinds at radius r.
  double radial_value(double r) const {
    require(is_radial(), ErrorKind::precondition, "potential is not radial");
    double rr = arg_scale_ * r;
    switch (kind_) {
      case PotentialKind::zero: return 0.0;
      case PotentialKind::square_well: return rr <= r_ ? prefactor_ * v0_ : 0.0;
      case PotentialKind::radial_annulus_indicator:
        return (rr >= r1_ && rr <= r2_) ? prefactor_ * value_ : 0.0;
      case PotentialKind::grid: {
        double x[6] = {rr, 0, 0, 0, 0, 0};
        return prefactor_ * base_eval(x);
      }
      default: return 0.0;
    }
  }

  // Average over the grid cell centered at x, subsampled only where the
  // descriptor has a jump sphere crossing the cell.
  double cell_average(const double* x, double h, int sub = 3) const {
    if (!straddles_jump(x, h)) return (*this)(x);
    double sum = 0.0;
    int count = 1;
    for (int k = 0; k < dim_; ++k) count *= sub;
    std::vector<double> y(dim_);
    for (int c = 0; c < count; ++c) {
      int rem = c;
      for (int k = 0; k < dim_; ++k) {
        int idx = rem % sub;
        rem /= sub;
        y[k] = x[k] + h * (double(idx) + 0.5) / double(sub) - h / 2.0;
      }
      sum += (*this)(y.data());
    }
    return sum / double(count);
  }

  // Integral over R^d; radial kinds by 1D quadrature, metric_radial by the
  // |det M| change of variables.
  double integral() const {
    double scale = prefactor_ / std::pow(arg_scale_, dim_);
    switch (kind_) {
      case PotentialKind::zero: return 0.0;
      case PotentialKind::square_well: return scale * v0_ * ball_volume(dim_, r_);
      case PotentialKind::radial_annulus_indicator:
        return scale * value_ * (ball_volume(dim_, r2_) - ball_volume(dim_, r1_));
      case PotentialKind::grid: {
        double cell = std::pow(grid_->spacing, dim_);
        double s = 0.0;
        for (double v : grid_->data) s += v;
        return scale * s * cell;
      }
      case PotentialKind::metric_radial:
        return scale * metric_.det_m * base_->integral();
      case PotentialKind::mapped6d:
        return scale / metric_.det_m * base_->integral();
      case PotentialKind::gaussian6d: {
        // radial in rho = |M^{-1} x|: det M times the 6D radial integral
        double rmax = std::isfinite(cutoff_) ? cutoff_ : 8.0 * sigma_;
        const int nq = 20000;
        double dr = rmax / nq, s = 0.0;
        for (int q = 0; q < nq; ++q) {
          double rho = (q + 0.5) * dr;
          s += amp_ * std::exp(-0.75 * rho * rho / (sigma_ * sigma_)) * std::pow(rho, 5) * dr;
        }
        return scale * metric_.det_m * sphere_area(6) * s;
      }
    }
    return 0.0;
  }

  PotentialSpec scaled(double extra_prefactor, double extra_arg_scale) const {
    require(extra_prefactor >= 0.0 && extra_arg_scale > 0.0, ErrorKind::precondition,
            "scaling needs nonnegative prefactor and positive arg scale");
    PotentialSpec p = *this;
    p.prefactor_ *= extra_prefactor;
    p.arg_scale_ *= extra_arg_scale;
    return p;
  }

  std::shared_ptr<const PotentialSpec> metric_radial_base() const { return base_; }

  // radii where the descriptor jumps (square well edge, annulus edges)
  std::vector<double> jump_radii() const {
    switch (kind_) {
      case PotentialKind::square_well: return {r_ / arg_scale_};
      case PotentialKind::radial_annulus_indicator: return {r1_ / arg_scale_, r2_ / arg_scale_};
      default:
        return {};
    }
  }


  json to_json() const {
    json j;
    j["dim"] = dim_;
    switch (kind_) {
      case PotentialKind::zero: j["kind"] = "zero"; break;
      case PotentialKind::square_well:
        j["kind"] = "square_well";
        j["v0"] = v0_;
        j["r"] = r_;
        break;
      case PotentialKind::radial_annulus_indicator:
        j["kind"] = "radial_annulus_indicator";
        j["r1"] = r1_;
        j["r2"] = r2_;
        j["value"] = value_;
        break;
      case PotentialKind::gaussian6d:
        j["kind"] = "gaussian6d";
        j["amplitude"] = amp_;
        j["sigma"] = sigma_;
        if (std::isfinite(cutoff_)) j["cutoff"] = cutoff_;
        break;
      case PotentialKind::grid:
        j["kind"] = "grid";
        j["n"] = grid_->n;
        j["spacing"] = grid_->spacing;
        j["radial"] = grid_radial_;
        j["data_file"] = grid_file_;
        break;
      case PotentialKind::metric_radial:
        j["kind"] = "metric_radial";
        j["base"] = base_->to_json();
        break;
      case PotentialKind::mapped6d:
        j["kind"] = "mapped6d";
        j["base"] = base_->to_json();
        break;
    }
    if (prefactor_ != 1.0) j["prefactor"] = prefactor_;
    if (arg_scale_ != 1.0) j["arg_scale"] = arg_scale_;
    return j;
  }

  static PotentialSpec from_json(const json& j);

 private:
  double base_eval(const double* y) const {
    double r2 = 0.0;
    for (int k = 0; k < dim_; ++k) r2 += y[k] * y[k];
    switch (kind_) {
      case PotentialKind::zero:
        return 0.0;
      case PotentialKind::square_well:
        return r2 <= r_ * r_ ? v0_ : 0.0;
      case PotentialKind::radial_annulus_indicator:
        return (r2 >= r1_ * r1_ && r2 <= r2_ * r2_) ? value_ : 0.0;
      case PotentialKind::gaussian6d: {
        double my[6];
        metric_.m_inverse.apply(y, my);
        double rho2 = 0.0;
        for (double v : my) rho2 += v * v;
        if (rho2 > cutoff_ * cutoff_) return 0.0;
        return amp_ * std::exp(-0.75 * rho2 / (sigma_ * sigma_));
      }
      case PotentialKind::grid:
        return grid_interp(y);
      case PotentialKind::metric_radial:
        return base_->radial_value(metric_.m_inv_norm(y));
      case PotentialKind::mapped6d: {
        double my[6];
        metric_.m.apply(y, my);
        return (*base_)(my);
      }
    }
    return 0.0;
  }

  double grid_interp(const double* y) const {
    const int n = grid_->n;
    const double h = grid_->spacing;
    const double off = (n - 1) / 2.0;
    double t[6];
    long i0[6];
    double w[6];
    for (int k = 0; k < dim_; ++k) {
      t[k] = y[k] / h + off;
      if (t[k] < 0.0 || t[k] > n - 1) return 0.0;
      i0[k] = std::min<long>(static_cast<long>(t[k]), n - 2 >= 0 ? n - 2 : 0);
      w[k] = t[k] - double(i0[k]);
    }
    double acc = 0.0;
    const int corners = 1 << dim_;
    for (int c = 0; c < corners; ++c) {
      double weight = 1.0;
      std::size_t idx = 0;
      for (int k = 0; k < dim_; ++k) {  // axis 0 slowest, row-major
        int bit = (c >> k) & 1;
        weight *= bit ? w[k] : 1.0 - w[k];
        idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(i0[k] + bit);
      }
      acc += weight * grid_->data[idx];
    }
    return acc;
  }

  // jumps in rho = |M^{-1} x| for metric-radial shapes
  std::vector<double> metric_jump_radii() const {
    if (kind_ == PotentialKind::gaussian6d && std::isfinite(cutoff_))
      return {cutoff_ / arg_scale_};
    if (kind_ == PotentialKind::metric_radial) {
      std::vector<double> out;
      for (double jr : base_->jump_radii()) out.push_back(jr / arg_scale_);
      return out;
    }
    return {};
  }

  bool straddles_jump(const double* x, double h) const {
    double reach = h * std::sqrt(double(dim_));
    if (kind_ == PotentialKind::mapped6d) {
      double my[6], y[6];
      for (int k = 0; k < 6; ++k) y[k] = arg_scale_ * x[k];
      metric_.m.apply(y, my);
      // |M| <= sqrt(3/2) inflates the cell reach
      return base_->straddles_jump(my, std::sqrt(1.5) * arg_scale_ * h);
    }
    if (kind_ == PotentialKind::metric_radial || kind_ == PotentialKind::gaussian6d) {
      // |grad rho| <= sqrt(2)
      double rho = metric_.m_inv_norm(x);
      for (double jr : metric_jump_radii())
        if (std::abs(rho - jr) < std::sqrt(2.0) * reach) return true;
      return false;
    }
    std::vector<double> jumps = jump_radii();
    if (jumps.empty()) return false;
    double r = 0.0;
    for (int k = 0; k < dim_; ++k) r += x[k] * x[k];
    r = std::sqrt(r);
    for (double jr : jumps)
      if (std::abs(r - jr) < reach) return true;
    return false;
  }


  int dim_ = 3;
  PotentialKind kind_ = PotentialKind::zero;
  double prefactor_ = 1.0;
  double arg_scale_ = 1.0;
  double v0_ = 0.0, r_ = 0.0;
  double r1_ = 0.0, r2_ = 0.0, value_ = 0.0;
  double amp_ = 0.0, sigma_ = 1.0, cutoff_ = std::numeric_limits<double>::infinity();
  std::shared_ptr<Gps1Field> grid_;
  bool grid_radial_ = false;
  std::string grid_file_;
  std::shared_ptr<const PotentialSpec> base_;
  MetricGroup metric_;

  friend PotentialSpec parse_potential(const json&, const std::string&);
};

inline PotentialSpec parse_potential(const json& j, const std::string& where) {
  require(j.contains("kind"), ErrorKind::config, "potential missing 'kind' in " + where);
  std::string kind = j.at("kind").get<std::string>();
  PotentialSpec p;
  auto common = [&](std::vector<std::string> allowed) {
    allowed.push_back("kind");
    allowed.push_back("prefactor");
    allowed.push_back("arg_scale");
    reject_unknown_keys(j, allowed, where);
  };
  if (kind == "zero") {
    common({"dim"});
    p = PotentialSpec::zero(j.value("dim", 3));
  } else if (kind == "square_well") {
    common({"dim", "v0", "r"});
    p = PotentialSpec::square_well(j.value("dim", 3), j.at("v0").get<double>(),
                                   j.at("r").get<double>());
  } else if (kind == "radial_annulus_indicator") {
    common({"dim", "r1", "r2", "value"});
    require(j.contains("dim"), ErrorKind::config, "radial_annulus_indicator needs 'dim'");
    p = PotentialSpec::radial_annulus_indicator(j.at("dim").get<int>(), j.at("r1").get<double>(),
                                                j.at("r2").get<double>(), j.value("value", -1.0));
  } else if (kind == "gaussian6d") {
    common({"amplitude", "sigma", "cutoff"});
    p = PotentialSpec::gaussian6d(j.at("amplitude").get<double>(), j.at("sigma").get<double>(),
                                  j.value("cutoff", std::numeric_limits<double>::infinity()));
  } else if (kind == "grid") {
    common({"dim", "n", "spacing", "data_file", "radial"});
    Gps1Field f = gps1_read(j.at("data_file").get<std::string>());
    require(f.dim == j.at("dim").get<int>() && f.n == j.at("n").get<int>(), ErrorKind::config,
            "grid header mismatch vs JSON in " + where);
    double sp = j.at("spacing").get<double>();
    require(std::abs(sp - f.spacing) <= 1e-12 * std::max(1.0, std::abs(sp)), ErrorKind::config,
            "grid spacing mismatch vs JSON in " + where);
    p = PotentialSpec::from_grid(std::move(f), j.value("radial", false));
    p.grid_file_ = j.at("data_file").get<std::string>();
  } else if (kind == "metric_radial") {
    common({"base"});
    auto base = std::make_shared<PotentialSpec>(parse_potential(j.at("base"), where + ".base"));
    p = PotentialSpec::metric_radial(base);
  } else if (kind == "mapped6d") {
    common({"base"});
    auto base = std::make_shared<PotentialSpec>(parse_potential(j.at("base"), where + ".base"));
    p = PotentialSpec::mapped6d(base);
  } else {
    throw ToolkitError(ErrorKind::config, "unknown potential kind '" + kind + "' in " + where);
  }
  double pf = j.value("prefactor", 1.0);
  double as = j.value("arg_scale", 1.0);
  if (pf != 1.0 || as != 1.0) p = p.scaled(pf, as);
  return p;
}

inline PotentialSpec PotentialSpec::from_json(const json& j) {
  return parse_potential(j, "potential");
}

// Interaction scalings: d=6 uses N^{6*beta-2} V(N^beta .), the critical case
// beta = 1/2 giving N V(N^{1/2} .); d=3 uses the two-body convention
// N^2 W(N .).
inline PotentialSpec scale_potential(const PotentialSpec& v, long n, double beta) {
  require(n >= 1, ErrorKind::precondition, "scale_potential needs n >= 1");
  if (v.dim() == 6) {
    require(beta > 0.0 && beta <= 0.5, ErrorKind::precondition,
            "scale_potential d=6 needs beta in (0, 1/2]");
    double pf = std::pow(double(n), 6.0 * beta - 2.0);
    double as = std::pow(double(n), beta);
    return v.scaled(pf, as);
  }
  require(v.dim() == 3, ErrorKind::precondition, "scale_potential supports d in {3,6}");
  return v.scaled(double(n) * double(n), double(n));
}

}  // namespace gpscatter
