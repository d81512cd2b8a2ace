#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qplab/torus.hpp"

namespace qplab {

// |K_n(y)| for K_n(y) = (1/n) sum_{j<n} e(jy).  Closed ratio away from the
// kernel's removable singularity, direct sum next to it.
inline double fejer_kernel(long long n, double y) {
  if (n < 1) throw std::invalid_argument("fejer_kernel: n >= 1");
  const double ny = torus_norm(y);
  double mag;
  if (ny < 1e-12) {
    std::complex<double> acc(0.0, 0.0);
    for (long long j = 0; j < n; ++j) {
      double t = two_pi * mod1(static_cast<double>(j) * y);
      acc += std::complex<double>(std::cos(t), std::sin(t));
    }
    mag = std::abs(acc) / static_cast<double>(n);
  } else {
    double num = std::abs(std::sin(M_PI * static_cast<double>(n) * y));
    double den = static_cast<double>(n) * std::abs(std::sin(M_PI * y));
    mag = num / den;
  }
  double bound = std::min(1.0, 1.0 / (static_cast<double>(n) * std::max(ny, 1e-300)));
  if (mag > bound + 1e-9)
    throw std::logic_error("fejer_kernel: kernel bound violated");
  return mag;
}

inline double fejer_bound(long long n, double y) {
  const double ny = torus_norm(y);
  if (ny == 0.0) return 1.0;
  return std::min(1.0, 1.0 / (static_cast<double>(n) * ny));
}

// Compensated orbit average (1/n) sum u(x + j omega).  Divergent samples
// (u = -inf or NaN) are skipped; more than 1% of them trips the guard.
template <class F>
double birkhoff_average(F&& u, const Frequency& f, const TorusPoint& x,
                        long long n) {
  if (n < 1) throw std::invalid_argument("birkhoff_average: n >= 1");
  if (x.dim() != f.dim())
    throw std::invalid_argument("birkhoff_average: dimension mismatch");
  double sum = 0.0, comp = 0.0;
  long long used = 0, excluded = 0;
  for (long long j = 0; j < n; ++j) {
    double v = u(translate(x, f, j));
    if (!std::isfinite(v)) {
      ++excluded;
      continue;
    }
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    ++used;
  }
  if (excluded * 100 > n || used == 0)
    throw guard_error("birkhoff_average: more than 1% of orbit samples diverged");
  return sum / static_cast<double>(used);
}

// DFT of a uniform sample vector, coefficients for |k| <= K, with the
// empirical decay constant max |k||u_hat(k)|.  Divergent samples are dropped
// from every coefficient (1% guard).
struct FourierProfile {
  int K = 0;
  std::vector<std::complex<double>> coefficients;  // index k + K
  double decay_constant = 0.0;
  long long samples_used = 0;
  long long samples_excluded = 0;

  const std::complex<double>& at(int k) const { return coefficients[k + K]; }
};

inline FourierProfile fourier_decay_profile(const std::vector<double>& samples,
                                            int K) {
  const long long N = static_cast<long long>(samples.size());
  if (K < 0) throw std::invalid_argument("fourier_decay_profile: K >= 0");
  if (N < 4LL * std::max(K, 1))
    throw std::invalid_argument("fourier_decay_profile: need N >= 4K samples");
  std::vector<long long> keep;
  keep.reserve(samples.size());
  for (long long j = 0; j < N; ++j)
    if (std::isfinite(samples[j])) keep.push_back(j);
  FourierProfile prof;
  prof.K = K;
  prof.samples_used = static_cast<long long>(keep.size());
  prof.samples_excluded = N - prof.samples_used;
  if (prof.samples_excluded * 100 > N || keep.empty())
    throw guard_error("fourier_decay_profile: more than 1% divergent samples");
  prof.coefficients.assign(2 * static_cast<std::size_t>(K) + 1, {0.0, 0.0});
  parallel_for(prof.coefficients.size(), [&](std::size_t idx) {
    const int k = static_cast<int>(idx) - K;
    double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0;
    for (long long j : keep) {
      double t = -two_pi * mod1(static_cast<double>(k) * static_cast<double>(j) /
                                static_cast<double>(N));
      double vr = samples[j] * std::cos(t);
      double vi = samples[j] * std::sin(t);
      double yr = vr - cre, tr = re + yr;
      cre = (tr - re) - yr;
      re = tr;
      double yi = vi - cim, ti = im + yi;
      cim = (ti - im) - yi;
      im = ti;
    }
    prof.coefficients[idx] = std::complex<double>(re, im) /
                             static_cast<double>(keep.size());
  });
  for (int k = 1; k <= K; ++k) {
    double v = static_cast<double>(k) *
               std::max(std::abs(prof.at(k)), std::abs(prof.at(-k)));
    prof.decay_constant = std::max(prof.decay_constant, v);
  }
  return prof;
}

// Integer minimizer of S (K^{-1/2} + K^{d+1} / (n t)): equidistribution
// truncation error against the Diophantine small-divisor cost.
struct QbetBound {
  long long K_star = 1;
  double bound = 0.0;
};

inline QbetBound qbet_bound(double S, double t, int d, double n) {
  if (!(S > 0.0 && t > 0.0 && n > 0.0) || d < 1)
    throw std::invalid_argument("qbet_bound: positive inputs required");
  auto value = [&](double K) {
    return S * (1.0 / std::sqrt(K) +
                std::pow(K, static_cast<double>(d) + 1.0) / (n * t));
  };
  double Kc = std::pow(n * t / (2.0 * (static_cast<double>(d) + 1.0)),
                       2.0 / (2.0 * static_cast<double>(d) + 3.0));
  QbetBound out;
  out.bound = std::numeric_limits<double>::infinity();
  for (long long K : {static_cast<long long>(std::floor(Kc)) - 1,
                      static_cast<long long>(std::floor(Kc)),
                      static_cast<long long>(std::floor(Kc)) + 1,
                      static_cast<long long>(std::floor(Kc)) + 2}) {
    if (K < 1) K = 1;
    double v = value(static_cast<double>(K));
    if (v < out.bound) {
      out.bound = v;
      out.K_star = K;
    }
  }
  return out;
}

// Dyadic BMO surrogate: max mean oscillation over dyadic intervals down to
// max_depth.  Within a factor 2 of the interval BMO norm, which is all the
// downstream inequalities need.
inline double bmo_norm(const std::vector<double>& samples, int max_depth) {
  const long long N = static_cast<long long>(samples.size());
  if (max_depth < 0) throw std::invalid_argument("bmo_norm: max_depth >= 0");
  if (N < (1LL << max_depth))
    throw std::invalid_argument("bmo_norm: need >= 2^max_depth samples");
  long long bad = 0;
  for (double v : samples)
    if (!std::isfinite(v)) ++bad;
  if (bad * 100 > N) throw guard_error("bmo_norm: more than 1% divergent samples");
  double worst = 0.0;
  for (int depth = 0; depth <= max_depth; ++depth) {
    const long long cells = 1LL << depth;
    for (long long c = 0; c < cells; ++c) {
      const long long lo = c * N / cells;
      const long long hi = (c + 1) * N / cells;
      double sum = 0.0;
      long long used = 0;
      for (long long j = lo; j < hi; ++j)
        if (std::isfinite(samples[j])) {
          sum += samples[j];
          ++used;
        }
      if (used == 0) continue;
      const double mean = sum / static_cast<double>(used);
      double osc = 0.0;
      for (long long j = lo; j < hi; ++j)
        if (std::isfinite(samples[j])) osc += std::abs(samples[j] - mean);
      worst = std::max(worst, osc / static_cast<double>(used));
    }
  }
  return worst;
}

// John-Nirenberg boost constant, fixed once against the log|2sin(pi x)|
// profile (whose measured boost admits c up to about 4 at eps0 = 2); kept
// deliberately small so the check stays an inequality, not a fit.
inline constexpr double jn_boost_c = 0.25;

struct JnBoostReport {
  double mean = 0.0;
  double weak_measure = 0.0;     // fraction with |u - mean| > eps0
  double boosted_measure = 0.0;  // fraction with |u - mean| > sqrt(eps0)
  double prediction = 0.0;
  double c_used = jn_boost_c;
  bool pass = false;
};

inline JnBoostReport jn_boost_check(const std::vector<double>& samples,
                                    double eps0, double eps1, double S_emp,
                                    double c = jn_boost_c) {
  if (!(eps0 > 0.0 && eps0 < 1.0))
    throw std::invalid_argument("jn_boost_check: eps0 in (0,1)");
  if (!(eps1 >= 0.0) || !(S_emp >= 0.0) || !(c > 0.0))
    throw std::invalid_argument("jn_boost_check: nonnegative eps1, S, positive c");
  if (eps1 > std::pow(eps0, 4.0))
    throw std::invalid_argument("jn_boost_check: need eps1 <= eps0^4");
  const long long N = static_cast<long long>(samples.size());
  if (N == 0) throw std::invalid_argument("jn_boost_check: empty samples");
  double sum = 0.0;
  long long used = 0, bad = 0;
  for (double v : samples) {
    if (!std::isfinite(v)) {
      ++bad;
      continue;
    }
    sum += v;
    ++used;
  }
  if (bad * 100 > N || used == 0)
    throw guard_error("jn_boost_check: more than 1% divergent samples");
  JnBoostReport rep;
  rep.c_used = c;
  rep.mean = sum / static_cast<double>(used);
  long long weak = 0, boosted = 0;
  const double th0 = eps0, th1 = std::sqrt(eps0);
  for (double v : samples) {
    if (!std::isfinite(v)) continue;
    double dev = std::abs(v - rep.mean);
    if (dev > th0) ++weak;
    if (dev > th1) ++boosted;
  }
  rep.weak_measure = static_cast<double>(weak) / static_cast<double>(used);
  rep.boosted_measure = static_cast<double>(boosted) / static_cast<double>(used);
  if (rep.weak_measure > eps1)
    throw std::invalid_argument("jn_boost_check: weak estimate fails at eps1");
  const double bracket =
      std::sqrt(eps0) + S_emp * std::pow(eps1, 0.25) / std::sqrt(eps0);
  rep.prediction = std::exp(-c / bracket);
  rep.pass = rep.boosted_measure <= rep.prediction;
  return rep;
}

}  // namespace qplab
