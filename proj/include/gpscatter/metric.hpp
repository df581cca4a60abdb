#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "gpscatter/common.hpp"

namespace gpscatter {

// 2x2 block matrices acting on R^3 (+) R^3: each scalar entry multiplies the
// 3x3 identity, so a 6-vector (x,y) maps to (a*x + b*y, c*x + d*y).

struct Block2 {
  // row-major [ [a, b], [c, d] ]
  std::array<double, 4> m{1.0, 0.0, 0.0, 1.0};

  double a() const { return m[0]; }
  double b() const { return m[1]; }
  double c() const { return m[2]; }
  double d() const { return m[3]; }

  double det2() const { return m[0] * m[3] - m[1] * m[2]; }
  // determinant as a map on R^6
  double det6() const {
    double d2 = det2();
    return d2 * d2 * d2;
  }

  Block2 operator*(const Block2& o) const {
    return Block2{{m[0] * o.m[0] + m[1] * o.m[2], m[0] * o.m[1] + m[1] * o.m[3],
                   m[2] * o.m[0] + m[3] * o.m[2], m[2] * o.m[1] + m[3] * o.m[3]}};
  }
  Block2 transpose() const { return Block2{{m[0], m[2], m[1], m[3]}}; }
  Block2 inverse() const {
    double d2 = det2();
    return Block2{{m[3] / d2, -m[1] / d2, -m[2] / d2, m[0] / d2}};
  }

  void apply(const double* x, double* out) const {
    for (int j = 0; j < 3; ++j) {
      out[j] = m[0] * x[j] + m[1] * x[j + 3];
      out[j + 3] = m[2] * x[j] + m[3] * x[j + 3];
    }
  }
  std::array<double, 6> apply(const std::array<double, 6>& x) const {
    std::array<double, 6> out;
    apply(x.data(), out.data());
    return out;
  }
};

// Integer-entry group element, compared exactly.
struct GroupElement {
  std::array<int, 4> m{1, 0, 0, 1};
  std::string name;

  GroupElement operator*(const GroupElement& o) const {
    GroupElement r;
    r.m = {m[0] * o.m[0] + m[1] * o.m[2], m[0] * o.m[1] + m[1] * o.m[3],
           m[2] * o.m[0] + m[3] * o.m[2], m[2] * o.m[1] + m[3] * o.m[3]};
    return r;
  }
  bool same_matrix(const GroupElement& o) const { return m == o.m; }
  int det2() const { return m[0] * m[3] - m[1] * m[2]; }

  Block2 as_block() const {
    return Block2{{double(m[0]), double(m[1]), double(m[2]), double(m[3])}};
  }
  void apply(const double* x, double* out) const {
    for (int j = 0; j < 3; ++j) {
      out[j] = m[0] * x[j] + m[1] * x[j + 3];
      out[j + 3] = m[2] * x[j] + m[3] * x[j + 3];
    }
  }
  std::array<double, 6> apply(const std::array<double, 6>& x) const {
    std::array<double, 6> out;
    apply(x.data(), out.data());
    return out;
  }
};

// The six relabeling maps of the three-body relative coordinates: the group
// generated by the swap S and the involution A. Canonical order
// {I, S, A, AS, SA, ASA} is a toolkit convention.
inline std::vector<GroupElement> symmetry_group() {
  GroupElement I{{1, 0, 0, 1}, "I"};
  GroupElement S{{0, 1, 1, 0}, "S"};
  GroupElement A{{1, -1, 0, -1}, "A"};
  GroupElement AS = A * S;
  AS.name = "AS";
  GroupElement SA = S * A;
  SA.name = "SA";
  GroupElement ASA = A * S * A;
  ASA.name = "ASA";
  return {I, S, A, AS, SA, ASA};
}

struct MetricGroup {
  Block2 m;          // the kinetic metric, sqrt of (1/2)[[2,1],[1,2]]
  Block2 m_inverse;
  double det_m = 0;  // determinant on R^6
  std::vector<GroupElement> elements;

  // eigenvalues of m as a 2x2 matrix
  double eig_lo() const { return std::sqrt(0.5); }
  double eig_hi() const { return std::sqrt(1.5); }

  std::array<double, 6> apply_m(const std::array<double, 6>& x) const { return m.apply(x); }
  std::array<double, 6> apply_m_inverse(const std::array<double, 6>& x) const {
    return m_inverse.apply(x);
  }
  // |M x| and |M^{-1} x|
  double m_norm(const double* x) const {
    double y[6];
    m.apply(x, y);
    double s = 0;
    for (double v : y) s += v * v;
    return std::sqrt(s);
  }
  double m_inv_norm(const double* x) const {
    double y[6];
    m_inverse.apply(x, y);
    double s = 0;
    for (double v : y) s += v * v;
    return std::sqrt(s);
  }
};

inline MetricGroup metric_matrix() {
  MetricGroup g;
  const double s3 = std::sqrt(3.0);
  const double c = 1.0 / (2.0 * std::sqrt(2.0));
  g.m = Block2{{c * (s3 + 1.0), c * (s3 - 1.0), c * (s3 - 1.0), c * (s3 + 1.0)}};
  g.m_inverse = g.m.inverse();
  g.det_m = g.m.det6();
  g.elements = symmetry_group();
  return g;
}

}  // namespace gpscatter
