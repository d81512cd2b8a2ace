#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qplab {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Library-wide singularity floor: magnitudes at or below it are treated as
// exact zeros of an analytic function, not as data.
inline constexpr double singular_floor = 1e-14;

inline double log_abs_floored(double v) {
  double a = std::abs(v);
  return a < singular_floor ? -std::numeric_limits<double>::infinity()
                            : std::log(a);
}

// Runtime guard trips (identically singular determinants, excluded-sample
// budgets, ...).  Distinct from std::invalid_argument so callers can map
// precondition failures and guard failures to different exit codes.
struct guard_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic reduction: result depends only on the operand order, never on
// the worker count.  All averaged statistics in this library go through here.
inline double pairwise_sum(const double* p, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(p, h) + pairwise_sum(p + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  return pairwise_sum(v) / static_cast<double>(v.size());
}

// Standard error of the mean; 0 for a single sample.
inline double std_error(const std::vector<double>& v, double m) {
  std::size_t n = v.size();
  if (n < 2) return 0.0;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - m) * (v[i] - m);
  double var = pairwise_sum(sq) / static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

// Worker count: COCYCLE_LAB_THREADS pins it when set (so reruns under a
// forced count are comparable); otherwise hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("COCYCLE_LAB_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(std::min(v, 64L));
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1u;
}

// Runs fn(i) for i in [0, n).  Each index is owned by exactly one worker and
// fn must only touch state indexed by i; with that contract the outcome is
// identical for every worker count.
template <class F>
void parallel_for(std::size_t n, F&& fn) {
  unsigned workers = worker_count();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    std::size_t lo = n * t / workers, hi = n * (t + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// mt19937_64 output mapped to [0,1) through the 53-bit mantissa path; the
// standard distributions are implementation defined, this is not.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Nearest-rank percentile, q in (0,100]; input need not be sorted.
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile: empty sample");
  std::sort(v.begin(), v.end());
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(q / 100.0 * static_cast<double>(v.size())));
  rank = std::min(std::max<std::size_t>(rank, 1), v.size());
  return v[rank - 1];
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 paired points");
  double n = static_cast<double>(x.size());
  double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

// 17 significant digits: enough to round-trip a double exactly.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace qplab
