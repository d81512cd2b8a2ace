#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "qplab/cocycle.hpp"

namespace qplab {

template <class S>
double u_scale(const FourierCocycleT<S>& A, const Frequency& f,
               const TorusPoint& x, long long n) {
  return iterate(A, f, x, n).log_norm / static_cast<double>(n);
}

struct DeviationRow {
  long long n = 0;
  double epsilon = 0.0;
  double measure = 0.0;
  long long samples = 0;
};

struct DeviationMeasurement {
  DeviationRow row;
  double L1 = 0.0;  // reference level the deviations are measured against
  long long excluded = 0;
};

// |{x : |u_n(x) - L| > epsilon}| estimated on the sampler.  L defaults to the
// sample mean of u_n over the same points, so curve and reference share one
// seed and one point set.
template <class S>
DeviationMeasurement deviation_measure(const FourierCocycleT<S>& A,
                                       const Frequency& f, long long n,
                                       double epsilon,
                                       const std::vector<TorusPoint>& sampler,
                                       std::optional<double> L1 = std::nullopt) {
  if (n < 1) throw std::invalid_argument("deviation_measure: n >= 1");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("deviation_measure: epsilon >= 0");
  if (sampler.empty()) throw std::invalid_argument("deviation_measure: empty sampler");
  std::vector<double> u(sampler.size());
  parallel_for(sampler.size(), [&](std::size_t i) {
    u[i] = u_scale(A, f, sampler[i], n);
  });
  std::vector<double> kept;
  kept.reserve(u.size());
  DeviationMeasurement out;
  for (double v : u) (std::isfinite(v) ? kept.push_back(v) : void(++out.excluded));
  if (kept.empty())
    throw guard_error("deviation_measure: every sample was excluded");
  out.L1 = L1 ? *L1 : mean(kept);
  long long hits = 0;
  for (double v : kept) hits += std::abs(v - out.L1) > epsilon;
  out.row.n = n;
  out.row.epsilon = epsilon;
  out.row.samples = static_cast<long long>(kept.size());
  out.row.measure = static_cast<double>(hits) / static_cast<double>(kept.size());
  return out;
}

// One u_n pass per scale, shared across every epsilon of that scale, so a
// whole (n, epsilon) grid costs as much as its largest column.
template <class S>
std::vector<DeviationRow> deviation_curve(const FourierCocycleT<S>& A,
                                          const Frequency& f,
                                          const std::vector<long long>& ns,
                                          const std::vector<double>& epsilons,
                                          const std::vector<TorusPoint>& sampler) {
  if (ns.empty() || epsilons.empty())
    throw std::invalid_argument("deviation_curve: empty schedule");
  if (sampler.empty()) throw std::invalid_argument("deviation_curve: empty sampler");
  for (double e : epsilons)
    if (!(e >= 0.0)) throw std::invalid_argument("deviation_curve: epsilon >= 0");
  std::vector<DeviationRow> rows;
  for (long long n : ns) {
    if (n < 1) throw std::invalid_argument("deviation_curve: n >= 1");
    std::vector<double> u(sampler.size());
    parallel_for(sampler.size(), [&](std::size_t i) {
      u[i] = u_scale(A, f, sampler[i], n);
    });
    std::vector<double> kept;
    kept.reserve(u.size());
    for (double v : u)
      if (std::isfinite(v)) kept.push_back(v);
    if (kept.empty()) throw guard_error("deviation_curve: every sample excluded");
    const double L = mean(kept);
    for (double e : epsilons) {
      long long hits = 0;
      for (double v : kept) hits += std::abs(v - L) > e;
      DeviationRow r;
      r.n = n;
      r.epsilon = e;
      r.samples = static_cast<long long>(kept.size());
      r.measure = static_cast<double>(hits) / static_cast<double>(kept.size());
      rows.push_back(r);
    }
  }
  return rows;
}

// Two empirical shape fits for a family of deviation rows:
//   measure(n) ~ exp(alpha - beta n^b)   (scale decay at one epsilon)
//   eps*(n)    ~ C n^-a                  (smallest epsilon with measure <= target)
// Only shapes are fitted; no externally prescribed constants are assumed.
struct LdtFit {
  double b_hat = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double r2 = 0.0;
  double epsilon_used = 0.0;
  double C_hat = 0.0;
  double a_hat = 0.0;
  bool has_epsilon_fit = false;
  bool below_resolution = false;
  long long scales_used = 0;
};

inline LdtFit ldt_fit(const std::vector<DeviationRow>& rows, double target = 0.1) {
  if (rows.empty()) throw std::invalid_argument("ldt_fit: no rows");
  LdtFit fit;
  bool any_nonzero = false;
  for (const auto& r : rows) any_nonzero |= r.measure > 0.0;
  if (!any_nonzero) {
    fit.below_resolution = true;  // everything below sampling resolution
    return fit;
  }

  // Pick the epsilon whose curve carries the most nonzero scales (ties: the
  // smallest epsilon, where the decay is slowest and best resolved).
  std::map<double, std::set<long long>> scales;
  for (const auto& r : rows)
    if (r.measure > 0.0) scales[r.epsilon].insert(r.n);
  double best_eps = 0.0;
  std::size_t best_count = 0;
  for (const auto& [eps, ns] : scales)
    if (ns.size() > best_count) {
      best_count = ns.size();
      best_eps = eps;
    }
  if (best_count < 3)
    throw std::invalid_argument("ldt_fit: need >= 3 scales with nonzero measures");
  fit.epsilon_used = best_eps;
  fit.scales_used = static_cast<long long>(best_count);

  std::vector<double> ns, logm;
  for (const auto& r : rows)
    if (r.epsilon == best_eps && r.measure > 0.0) {
      ns.push_back(static_cast<double>(r.n));
      logm.push_back(std::log(r.measure));
    }
  auto sse_at = [&](double b) {
    std::vector<double> xs(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) xs[i] = -std::pow(ns[i], b);
    LineFit lf = fit_line(xs, logm);
    double sse = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
      double res = logm[i] - (lf.intercept + lf.slope * xs[i]);
      sse += res * res;
    }
    return std::pair<double, LineFit>(sse, lf);
  };
  double best_b = 0.05, best_sse = std::numeric_limits<double>::infinity();
  for (double b = 0.05; b <= 1.5005; b += 0.01) {
    double sse = sse_at(b).first;
    if (sse < best_sse) {
      best_sse = sse;
      best_b = b;
    }
  }
  double lo = std::max(0.01, best_b - 0.01), hi = std::min(1.6, best_b + 0.01);
  for (int iter = 0; iter < 40; ++iter) {  // ternary refinement inside the grid cell
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (sse_at(m1).first < sse_at(m2).first)
      hi = m2;
    else
      lo = m1;
  }
  fit.b_hat = (lo + hi) / 2.0;
  auto [sse, lf] = sse_at(fit.b_hat);
  (void)sse;
  fit.alpha = lf.intercept;
  fit.beta = lf.slope;
  fit.r2 = lf.r2;

  // eps*(n) against C n^-a, when more than one epsilon was measured.
  std::map<long long, double> eps_star;
  for (const auto& r : rows)
    if (r.measure <= target) {
      auto it = eps_star.find(r.n);
      if (it == eps_star.end() || r.epsilon < it->second) eps_star[r.n] = r.epsilon;
    }
  if (eps_star.size() >= 2) {
    std::vector<double> xs, ys;
    for (const auto& [n, e] : eps_star) {
      if (e <= 0.0) continue;
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(e));
    }
    if (xs.size() >= 2 && std::set<double>(xs.begin(), xs.end()).size() >= 2) {
      LineFit ef = fit_line(xs, ys);
      fit.a_hat = -ef.slope;
      fit.C_hat = std::exp(ef.intercept);
      fit.has_epsilon_fit = true;
    }
  }
  return fit;
}

// Almost-invariance of u_n under one translation step.  The constant is
// frozen on a calibration half of the sampler (99th percentile of
// |u_n(x) - u_n(Tx)| times n^a) and the violation mass is then measured on
// the other half against the frozen threshold.
struct AlmostInvarianceReport {
  long long n = 0;
  double a_exp = 0.0;
  double C_hat = 0.0;
  double threshold = 0.0;
  double violation_fraction = 0.0;
  long long calibration_count = 0;
  long long measurement_count = 0;
  long long excluded = 0;
};

template <class S>
AlmostInvarianceReport almost_invariance_scan(const FourierCocycleT<S>& A,
                                              const Frequency& f, long long n,
                                              double a_exp,
                                              const std::vector<TorusPoint>& sampler) {
  if (n < 1) throw std::invalid_argument("almost_invariance_scan: n >= 1");
  if (sampler.size() < 4)
    throw std::invalid_argument("almost_invariance_scan: need >= 4 samples");
  std::vector<double> v(sampler.size());
  parallel_for(sampler.size(), [&](std::size_t i) {
    double a = u_scale(A, f, sampler[i], n);
    double b = u_scale(A, f, translate(sampler[i], f), n);
    v[i] = std::abs(a - b);
  });
  AlmostInvarianceReport rep;
  rep.n = n;
  rep.a_exp = a_exp;
  std::vector<double> cal, meas;
  std::size_t half = sampler.size() / 2;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      ++rep.excluded;
      continue;
    }
    (i < half ? cal : meas).push_back(v[i]);
  }
  if (cal.empty() || meas.empty())
    throw guard_error("almost_invariance_scan: a sampler half was fully excluded");
  double na = std::pow(static_cast<double>(n), a_exp);
  rep.threshold = percentile(cal, 99.0);
  rep.C_hat = rep.threshold * na;
  long long hits = 0;
  for (double w : meas) hits += w > rep.threshold;
  rep.violation_fraction = static_cast<double>(hits) / static_cast<double>(meas.size());
  rep.calibration_count = static_cast<long long>(cal.size());
  rep.measurement_count = static_cast<long long>(meas.size());
  return rep;
}

// sup log norm, RMS of log|det| over the sampler, and the Cramer constant.
// Orbit points within 1e-14 of a determinant zero are excluded and counted;
// a determinant that never clears 1e-10 on the sampler trips the guard.
template <class S>
MeasurementReport uniform_measurement(const FourierCocycleT<S>& A,
                                      const std::vector<TorusPoint>& sampler,
                                      long long sup_grid = 256) {
  if (sampler.empty()) throw std::invalid_argument("uniform_measurement: empty sampler");
  auto det = determinant_function(A);
  std::vector<double> absdet(sampler.size());
  parallel_for(sampler.size(), [&](std::size_t i) {
    absdet[i] = std::abs(det(sampler[i]));
  });
  double max_abs = 0.0;
  for (double v : absdet) max_abs = std::max(max_abs, v);
  if (max_abs <= 1e-10)
    throw guard_error("uniform_measurement: identically singular determinant");

  MeasurementReport rep;
  std::vector<double> sq;
  sq.reserve(absdet.size());
  for (double v : absdet)
    (v < singular_floor ? void(++rep.samples_excluded) : sq.push_back(std::log(v) * std::log(v)));
  rep.samples_used = static_cast<long long>(sq.size());
  rep.det_l2 = std::sqrt(mean(sq));
  rep.sup_log_norm = std::log(sup_norm_strip(A, sup_grid));
  rep.cramer_constant = rep.sup_log_norm * (A.m - 1) +
                        std::lgamma(static_cast<double>(A.m)) + rep.sup_log_norm;
  return rep;
}

}  // namespace qplab
