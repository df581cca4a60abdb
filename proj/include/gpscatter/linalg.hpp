#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "gpscatter/common.hpp"

namespace gpscatter {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return deterministic_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  bool indefinite = false;
};

// Conjugate gradient on a symmetric positive definite operator.
template <class MatVec>
CgResult conjugate_gradient(const MatVec& A, const std::vector<double>& b,
                            std::vector<double>& x, double tol, int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> r(n), p(n), ap(n);
  if (x.size() != n) x.assign(n, 0.0);
  A(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  p = r;
  double rr = dot(r, r);
  const double bnorm = std::max(norm2(b), std::numeric_limits<double>::min());
  CgResult res;
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) / bnorm <= tol) {
      res.converged = true;
      break;
    }
    A(p, ap);
    double pap = dot(p, ap);
    if (pap <= 0.0) {
      res.indefinite = true;
      break;
    }
    double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rr_new = dot(r, r);
    double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    res.iterations = it + 1;
  }
  res.rel_residual = std::sqrt(rr) / bnorm;
  res.converged = res.converged || res.rel_residual <= tol;
  return res;
}

namespace detail {

// smallest eigenvalue of the symmetric tridiagonal (alpha, beta) by Sturm
// bisection
inline double tridiag_smallest(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const int k = static_cast<int>(alpha.size());
  double lo = alpha[0], hi = alpha[0];
  for (int i = 0; i < k; ++i) {
    double off = (i > 0 ? std::abs(beta[i - 1]) : 0.0) + (i + 1 < k ? std::abs(beta[i]) : 0.0);
    lo = std::min(lo, alpha[i] - off);
    hi = std::max(hi, alpha[i] + off);
  }
  auto count_below = [&](double x) {
    int cnt = 0;
    double d = alpha[0] - x;
    if (d < 0) ++cnt;
    for (int i = 1; i < k; ++i) {
      double b2 = beta[i - 1] * beta[i - 1];
      d = alpha[i] - x - b2 / (d == 0.0 ? 1e-300 : d);
      if (d < 0) ++cnt;
    }
    return cnt;
  };
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (count_below(mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// last component of the unit eigenvector of (alpha,beta) at eigenvalue theta,
// by one pass of inverse iteration on the shifted tridiagonal
inline double tridiag_last_component(const std::vector<double>& alpha,
                                     const std::vector<double>& beta, double theta) {
  const int k = static_cast<int>(alpha.size());
  std::vector<double> v(k, 1.0);
  // two sweeps of tridiagonal solve (Thomas) with the shifted matrix
  for (int sweep = 0; sweep < 2; ++sweep) {
    std::vector<double> c(k), d(k);
    double shift = theta - 1e-12 * (1.0 + std::abs(theta));
    c[0] = alpha[0] - shift;
    if (std::abs(c[0]) < 1e-300) c[0] = 1e-300;
    d[0] = v[0] / c[0];
    for (int i = 1; i < k; ++i) {
      double m = beta[i - 1] / c[i - 1];
      c[i] = alpha[i] - shift - m * beta[i - 1];
      if (std::abs(c[i]) < 1e-300) c[i] = 1e-300;
      d[i] = (v[i] - m * d[i - 1]) / c[i];
    }
    v[k - 1] = d[k - 1];
    for (int i = k - 2; i >= 0; --i) v[i] = d[i] - beta[i] / c[i] * v[i + 1];
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (double& x : v) x /= nrm;
  }
  return v[k - 1];
}

}  // namespace detail

struct LanczosResult {
  double eigenvalue = 0.0;
  double residual_bound = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Smallest eigenvalue by plain Lanczos with a computable residual bound
// |lambda_min - theta| <= beta_k |s_k|. `stop(theta, bound)` may end the
// iteration early once the caller can classify the sign.
template <class MatVec>
LanczosResult lanczos_smallest(const MatVec& A, std::size_t n, std::vector<double> v0,
                               int max_iter, double tol,
                               const std::function<bool(double, double)>& stop = {},
                               std::vector<double>* alpha_out = nullptr,
                               std::vector<double>* beta_out = nullptr) {
  std::vector<double> v_prev(n, 0.0), v = std::move(v0), w(n);
  double nrm = norm2(v);
  require(nrm > 0, ErrorKind::precondition, "lanczos needs a nonzero start vector");
  for (auto& x : v) x /= nrm;
  std::vector<double> alpha, beta;
  LanczosResult res;
  double beta_prev = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    A(v, w);
    double a = dot(v, w);
    alpha.push_back(a);
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * v[i] + beta_prev * v_prev[i];
    double b = norm2(w);
    res.iterations = k + 1;
    if ((k + 1) % 5 == 0 || k + 1 == max_iter || b <= 1e-300) {
      double theta = detail::tridiag_smallest(alpha, beta);
      double last = alpha.size() > 1 ? detail::tridiag_last_component(alpha, beta, theta) : 1.0;
      double bound = std::abs(b * last);
      res.eigenvalue = theta;
      res.residual_bound = bound;
      if (bound <= tol) {
        res.converged = true;
        break;
      }
      if (stop && stop(theta, bound)) break;
    }
    if (b <= 1e-300) {
      res.converged = true;
      break;
    }
    beta.push_back(b);
    v_prev.swap(v);
    v.swap(w);
    for (std::size_t i = 0; i < n; ++i) v[i] /= b;
    beta_prev = b;
  }
  if (alpha_out) *alpha_out = alpha;
  if (beta_out) *beta_out = beta;
  return res;
}

// Two-pass Lanczos ground-state solver: first pass builds the tridiagonal,
// second pass accumulates the Ritz vector without storing the basis.
template <class MatVec>
std::pair<double, std::vector<double>> lanczos_ground_state(const MatVec& A, std::size_t n,
                                                            std::vector<double> v0, int max_iter,
                                                            double tol) {
  std::vector<double> start = v0;
  std::vector<double> alpha, beta;
  LanczosResult r = lanczos_smallest(A, n, std::move(v0), max_iter, tol, {}, &alpha, &beta);
  const int k = static_cast<int>(alpha.size());
  // eigenvector of the tridiagonal at the smallest Ritz value
  double theta = detail::tridiag_smallest(alpha, beta);
  std::vector<double> s(k, 1.0);
  {
    // inverse iteration
    for (int sweep = 0; sweep < 3; ++sweep) {
      std::vector<double> c(k), d(k);
      double shift = theta - 1e-12 * (1.0 + std::abs(theta));
      c[0] = alpha[0] - shift;
      if (std::abs(c[0]) < 1e-300) c[0] = 1e-300;
      d[0] = s[0] / c[0];
      for (int i = 1; i < k; ++i) {
        double m = beta[i - 1] / c[i - 1];
        c[i] = alpha[i] - shift - m * beta[i - 1];
        if (std::abs(c[i]) < 1e-300) c[i] = 1e-300;
        d[i] = (s[i] - m * d[i - 1]) / c[i];
      }
      s[k - 1] = d[k - 1];
      for (int i = k - 2; i >= 0; --i) s[i] = d[i] - beta[i] / c[i] * s[i + 1];
      double nrm = 0.0;
      for (double x : s) nrm += x * x;
      nrm = std::sqrt(nrm);
      for (double& x : s) x /= nrm;
    }
  }
  // pass 2: rebuild basis vectors and accumulate
  std::vector<double> v_prev(n, 0.0), v = std::move(start), w(n), psi(n, 0.0);
  double nrm = norm2(v);
  for (auto& x : v) x /= nrm;
  double beta_prev = 0.0;
  for (int j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) psi[i] += s[j] * v[i];
    if (j + 1 == k) break;
    A(v, w);
    for (std::size_t i = 0; i < n; ++i) w[i] -= alpha[j] * v[i] + beta_prev * v_prev[i];
    v_prev.swap(v);
    v.swap(w);
    for (std::size_t i = 0; i < n; ++i) v[i] /= beta[j];
    beta_prev = beta[j];
  }
  double pn = norm2(psi);
  for (auto& x : psi) x /= pn;
  (void)r;
  return {theta, std::move(psi)};
}

}  // namespace gpscatter
