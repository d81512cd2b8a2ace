#pragma once

#include <Eigen/SVD>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "qplab/cocycle.hpp"

namespace qplab {

// Averaged finite-scale exponent data at one scale n.
//   lambdas[j-1] = avg over samples of (1/n) log ||wedge_j A^(n)(x)||
//   les[j-1]     = lambdas[j-1] - lambdas[j-2]   (the exponent ladder)
// Exterior powers keep every ladder entry a *top* norm of a renormalized
// product, so nothing here degrades when s_j(A^(n)) leaves the double range.
struct FiniteScaleSpectrum {
  long long n = 0;
  VecX lambdas;
  VecX les;
  VecX std_errors;  // standard errors of the les entries
  long long sample_count = 0;
  long long excluded_count = 0;
};

template <class S>
FiniteScaleSpectrum finite_scale_spectrum(const FourierCocycleT<S>& A,
                                          const Frequency& f, long long n,
                                          const std::vector<TorusPoint>& sampler) {
  if (n < 1) throw std::invalid_argument("finite_scale_spectrum: n >= 1");
  if (sampler.empty())
    throw std::invalid_argument("finite_scale_spectrum: empty sampler");
  const int m = A.m;
  const std::size_t NS = sampler.size();
  MatX lam(NS, m);
  std::vector<char> skip(NS, 0);

  parallel_for(NS, [&](std::size_t i) {
    std::vector<ScaledMatrix> P;
    P.reserve(m);
    for (int j = 1; j <= m; ++j)
      P.push_back(ScaledMatrix::identity(
          static_cast<Eigen::Index>(lex_subsets(m, j).size())));
    for (long long step = 0; step < n; ++step) {
      Mat<S> M = evaluate_real(A, translate(sampler[i], f, step));
      for (int j = 1; j <= m; ++j) P[static_cast<std::size_t>(j - 1)].apply(
          compound_matrix<S>(M, j));
    }
    for (int j = 0; j < m; ++j) {
      double v = P[static_cast<std::size_t>(j)].log_op_norm() / static_cast<double>(n);
      if (!std::isfinite(v)) {
        skip[i] = 1;  // product collapsed through an exact singularity
        return;
      }
      lam(static_cast<Eigen::Index>(i), j) = v;
    }
  });

  FiniteScaleSpectrum out;
  out.n = n;
  std::vector<std::size_t> keep;
  keep.reserve(NS);
  for (std::size_t i = 0; i < NS; ++i)
    (skip[i] ? void(++out.excluded_count) : keep.push_back(i));
  if (keep.empty())
    throw guard_error("finite_scale_spectrum: every sample was excluded");
  out.sample_count = static_cast<long long>(keep.size());
  out.lambdas = VecX(m);
  out.les = VecX(m);
  out.std_errors = VecX(m);
  std::vector<double> col(keep.size());
  VecX prev = VecX::Zero(m);
  for (int j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < keep.size(); ++i)
      col[i] = lam(static_cast<Eigen::Index>(keep[i]), j);
    out.lambdas[j] = mean(col);
    for (std::size_t i = 0; i < keep.size(); ++i)
      col[i] -= (j == 0 ? 0.0 : lam(static_cast<Eigen::Index>(keep[i]), j - 1));
    double lj = mean(col);
    out.les[j] = lj;
    out.std_errors[j] = std_error(col, lj);
  }
  return out;
}

using Signature = std::vector<int>;

// Indices 1 <= j < m where the ladder drops by more than tol.
inline Signature gap_pattern(const FiniteScaleSpectrum& sp, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("gap_pattern: tol >= 0");
  Signature tau;
  for (int j = 1; j < sp.les.size(); ++j)
    if (sp.les[j - 1] - sp.les[j] > tol) tau.push_back(j);
  return tau;
}

inline void validate_signature(const Signature& tau, int m) {
  if (tau.empty()) throw std::invalid_argument("signature: empty");
  int prev = 0;
  for (int t : tau) {
    if (t <= prev || t >= m) throw std::invalid_argument("signature: need 1 <= t_1 < ... < t_k < m");
    prev = t;
  }
}

// Flag of slow subspaces at one point: the component of dimension q is the
// span of the q right singular vectors of A^(n)(x) with the smallest singular
// values.  Components are listed by increasing dimension m - tau_k < ... <
// m - tau_1 and are nested by construction.
struct FlagSample {
  TorusPoint x;
  std::vector<MatX> components;
  VecX log_gaps;  // log s_{tau_j} - log s_{tau_j + 1}, one per signature entry
};

template <class S>
FlagSample finite_scale_filtration(const FourierCocycleT<S>& A, const Frequency& f,
                                   const TorusPoint& x, long long n,
                                   const Signature& tau) {
  validate_signature(tau, A.m);
  IterateResult it = iterate(A, f, x, n);
  Eigen::JacobiSVD<MatX> svd(it.product, Eigen::ComputeFullV);
  VecX s = svd.singularValues();
  FlagSample out;
  out.x = x;
  out.log_gaps = VecX(static_cast<Eigen::Index>(tau.size()));
  for (std::size_t j = 0; j < tau.size(); ++j) {
    double top = std::log(s[tau[j] - 1]), bot = std::log(s[tau[j]]);
    double gap = std::isfinite(bot) ? top - bot
                                    : std::numeric_limits<double>::infinity();
    out.log_gaps[static_cast<Eigen::Index>(j)] = gap;
    if (!(gap > 10.0))
      throw std::invalid_argument(
          "finite_scale_filtration: singular gap at tau_j below 10/n");
  }
  for (std::size_t j = tau.size(); j-- > 0;) {
    int q = A.m - tau[j];
    out.components.push_back(svd.matrixV().rightCols(q));
  }
  return out;
}

// Mean over paired samples of the worst principal angle across components.
inline double filtration_distance(const std::vector<FlagSample>& F,
                                  const std::vector<FlagSample>& G) {
  if (F.size() != G.size() || F.empty())
    throw std::invalid_argument("filtration_distance: need equal nonempty sample sets");
  std::vector<double> per(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (F[i].components.size() != G[i].components.size())
      throw std::invalid_argument("filtration_distance: signature mismatch");
    double worst = 0.0;
    for (std::size_t c = 0; c < F[i].components.size(); ++c) {
      if (F[i].components[c].cols() != G[i].components[c].cols())
        throw std::invalid_argument("filtration_distance: signature mismatch");
      worst = std::max(worst, max_principal_angle(F[i].components[c],
                                                  G[i].components[c]));
    }
    per[i] = worst;
  }
  return mean(per);
}

// A + t * D as Fourier data (modes merged by index vector).
template <class S>
FourierCocycleT<S> perturb(const FourierCocycleT<S>& A, const FourierCocycleT<S>& D,
                           double t) {
  if (A.d != D.d || A.m != D.m)
    throw std::invalid_argument("perturb: shape mismatch");
  std::map<std::vector<int>, ModeT<S>> merged;
  auto fold = [&](const ModeT<S>& mo, double w) {
    std::vector<int> key(mo.k.data(), mo.k.data() + mo.k.size());
    auto it = merged.find(key);
    if (it == merged.end()) {
      ModeT<S> fresh;
      fresh.k = mo.k;
      fresh.c = w * mo.c;
      fresh.s = w * mo.s;
      merged.emplace(std::move(key), std::move(fresh));
    } else {
      it->second.c += w * mo.c;
      it->second.s += w * mo.s;
    }
  };
  for (const auto& mo : A.modes) fold(mo, 1.0);
  for (const auto& mo : D.modes) fold(mo, t);
  FourierCocycleT<S> B;
  B.d = A.d;
  B.m = A.m;
  B.rho = std::min(A.rho, D.rho);
  for (auto& [k, mo] : merged) B.modes.push_back(std::move(mo));
  return B;
}

struct ProbeRow {
  double delta = 0.0;
  double dL1 = 0.0;
  double dist = 0.0;  // NaN when the gap gate blocked the flag comparison
};

// Weak-Hoelder modulus fit: dL1(h) ~ exp(-c (log 1/h)^b), linearized as
// log(-log dL1) = log c + b log log(1/h).
struct ContinuityProbe {
  std::vector<ProbeRow> rows;
  double c_hat = 0.0;
  double b_hat = 0.0;
  double r2 = 0.0;
  bool fit_ok = false;
};

template <class S>
ContinuityProbe continuity_probe(const FourierCocycleT<S>& A, const Frequency& f,
                                 const FourierCocycleT<S>& direction,
                                 const std::vector<double>& deltas, long long n,
                                 const std::vector<TorusPoint>& sampler,
                                 const Signature& tau = {1}) {
  for (double h : deltas)
    if (!(h > 0.0 && h < 1.0))
      throw std::invalid_argument("continuity_probe: deltas in (0,1)");
  validate_signature(tau, A.m);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto flags_of = [&](const FourierCocycleT<S>& B) {
    // Samples whose gap gate fails are skipped; pairing below intersects the
    // surviving index sets so distances always compare the same points.
    std::map<std::size_t, FlagSample> out;
    for (std::size_t i = 0; i < sampler.size(); ++i) {
      try {
        out.emplace(i, finite_scale_filtration(B, f, sampler[i], n, tau));
      } catch (const std::invalid_argument&) {
      }
    }
    return out;
  };

  FiniteScaleSpectrum base = finite_scale_spectrum(A, f, n, sampler);
  auto base_flags = flags_of(A);

  ContinuityProbe probe;
  for (double h : deltas) {
    FourierCocycleT<S> B = perturb(A, direction, h);
    FiniteScaleSpectrum sp = finite_scale_spectrum(B, f, n, sampler);
    ProbeRow row;
    row.delta = h;
    row.dL1 = std::abs(sp.les[0] - base.les[0]);
    auto pert_flags = flags_of(B);
    std::vector<FlagSample> Fa, Fb;
    for (const auto& [i, fs] : base_flags) {
      auto it = pert_flags.find(i);
      if (it != pert_flags.end()) {
        Fa.push_back(fs);
        Fb.push_back(it->second);
      }
    }
    row.dist = Fa.empty() ? nan : filtration_distance(Fa, Fb);
    probe.rows.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const auto& r : probe.rows)
    if (r.dL1 > 0.0 && r.dL1 < 1.0) {
      xs.push_back(std::log(std::log(1.0 / r.delta)));
      ys.push_back(std::log(-std::log(r.dL1)));
    }
  if (xs.size() >= 2) {
    try {
      LineFit lf = fit_line(xs, ys);
      probe.b_hat = lf.slope;
      probe.c_hat = std::exp(lf.intercept);
      probe.r2 = lf.r2;
      probe.fit_ok = std::isfinite(probe.b_hat) && std::isfinite(probe.c_hat);
    } catch (const std::invalid_argument&) {
    }
  }
  return probe;
}

}  // namespace qplab
