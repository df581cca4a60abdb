#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gpscatter {

// Error carrying a category that the CLI maps onto exit codes.
enum class ErrorKind { config = 2, solver = 3, precondition = 4 };

class ToolkitError : public std::runtime_error {
 public:
  ToolkitError(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw ToolkitError(kind, msg);
}

// Thread cap: GPSCATTER_THREADS, else hardware concurrency.
inline unsigned thread_cap() {
  if (const char* env = std::getenv("GPSCATTER_THREADS")) {
    long v = std::atol(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Parallel loop over [0,n) in fixed chunks. The chunk layout does not depend
// on the thread count, so reductions built per chunk stay deterministic.
inline void parallel_for_chunks(std::size_t n,
                                const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t nchunks = 64;
  const std::size_t chunk = (n + nchunks - 1) / nchunks;
  unsigned nthreads = std::min<std::size_t>(thread_cap(), nchunks);
  if (nthreads <= 1 || n < 4096) {
    for (std::size_t c = 0; c * chunk < n; ++c)
      body(c, c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::vector<std::thread> pool;
  std::size_t total_chunks = (n + chunk - 1) / chunk;
  for (unsigned t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t c = t; c < total_chunks; c += nthreads)
        body(c, c * chunk, std::min(n, (c + 1) * chunk));
    });
  }
  for (auto& th : pool) th.join();
}

// Deterministic chunked sum: per-chunk partials accumulated in chunk order.
template <class F>
double deterministic_sum(std::size_t n, F&& term) {
  const std::size_t nchunks = 64;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for_chunks(n, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[c % nchunks] += s;
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

// Counter-derived RNG stream: stable per (seed, stream index) pair.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return std::mt19937_64(z ^ (z >> 31));
}

// FNV-1a, used for input provenance records.
inline std::uint64_t fnv1a(const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline double sphere_area(int d) {
  // |S^{d-1}|
  if (d == 3) return 4.0 * M_PI;
  if (d == 6) return M_PI * M_PI * M_PI;
  double g = std::tgamma(d / 2.0);
  return 2.0 * std::pow(M_PI, d / 2.0) / g;
}

inline double ball_volume(int d, double r) {
  return sphere_area(d) / d * std::pow(r, d);
}

// Green's function of -Delta in R^d, G(x) = |x|^{2-d} / ((d-2)|S^{d-1}|).
inline double laplace_green(int d, double r) {
  return std::pow(r, 2 - d) / ((d - 2) * sphere_area(d));
}

}  // namespace gpscatter
