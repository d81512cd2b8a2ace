#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qplab/linalg.hpp"
#include "qplab/numeric.hpp"
#include "qplab/torus.hpp"

namespace qplab {

// One Fourier mode of a matrix-valued trigonometric polynomial:
// the contribution c*cos(2 pi k.x) + s*sin(2 pi k.x).
template <class S>
struct ModeT {
  Eigen::VectorXi k;
  Mat<S> c;
  Mat<S> s;
};

// Analytic quasi-periodic cocycle data: A(x) = sum of modes over x in T^d,
// together with the half-width rho of the complexification strip
// {|Im z_i| <= rho} on which sup norms are taken.
template <class S>
struct FourierCocycleT {
  int d = 1;
  int m = 1;
  double rho = 0.0;
  std::vector<ModeT<S>> modes;

  void validate() const {
    if (d < 1 || m < 1) throw std::invalid_argument("cocycle: d, m >= 1");
    if (!(rho >= 0.0)) throw std::invalid_argument("cocycle: rho >= 0");
    for (const auto& mo : modes) {
      if (mo.k.size() != d) throw std::invalid_argument("cocycle: mode index dim");
      if (mo.c.rows() != m || mo.c.cols() != m || mo.s.rows() != m || mo.s.cols() != m)
        throw std::invalid_argument("cocycle: mode matrix shape");
    }
  }
};

using Mode = ModeT<double>;
using FourierCocycle = FourierCocycleT<double>;

// A(x + iy) for |y_i| <= rho, via cos(t+iu) = cos t cosh u - i sin t sinh u
// and sin(t+iu) = sin t cosh u + i cos t sinh u.
template <class S>
Mat<std::complex<S>> evaluate(const FourierCocycleT<S>& A, const TorusPoint& x,
                              const Eigen::VectorXd& imag_offset) {
  if (x.dim() != A.d) throw std::invalid_argument("evaluate: point dimension");
  if (imag_offset.size() != A.d)
    throw std::invalid_argument("evaluate: offset dimension");
  for (Eigen::Index i = 0; i < imag_offset.size(); ++i)
    if (std::abs(imag_offset[i]) > A.rho * (1.0 + 1e-12) + 1e-15)
      throw std::invalid_argument("evaluate: offset outside the strip");
  Mat<std::complex<S>> out = Mat<std::complex<S>>::Zero(A.m, A.m);
  for (const auto& mo : A.modes) {
    double t = 0.0, u = 0.0;
    for (int i = 0; i < A.d; ++i) {
      t += mo.k[i] * x.x[i];
      u += mo.k[i] * imag_offset[i];
    }
    t *= two_pi;
    u *= two_pi;
    std::complex<S> cz(std::cos(t) * std::cosh(u), -std::sin(t) * std::sinh(u));
    std::complex<S> sz(std::sin(t) * std::cosh(u), std::cos(t) * std::sinh(u));
    out += cz * mo.c.template cast<std::complex<S>>() +
           sz * mo.s.template cast<std::complex<S>>();
  }
  return out;
}

template <class S>
Mat<S> evaluate_real(const FourierCocycleT<S>& A, const TorusPoint& x) {
  if (x.dim() != A.d) throw std::invalid_argument("evaluate: point dimension");
  Mat<S> out = Mat<S>::Zero(A.m, A.m);
  for (const auto& mo : A.modes) {
    double t = 0.0;
    for (int i = 0; i < A.d; ++i) t += mo.k[i] * x.x[i];
    t *= two_pi;
    out += std::cos(t) * mo.c + std::sin(t) * mo.s;
  }
  return out;
}

// n-step product A(x+(n-1)w)...A(x+w)A(x), renormalized every step.  The
// stored product is the unit-Frobenius factor; log_scale carries the rest,
// so log_norm stays accurate far past the range where the raw entries would
// overflow.  The lower log singular values are limited by the condition
// number of the full product: entries more than ~35 log units below the top
// degrade and eventually read -inf.  Exponent ladders past that range come
// from exterior powers, whose top value is renormalized per step.
struct IterateResult {
  long long n = 0;
  MatX product;
  double log_scale = 0.0;
  double log_norm = 0.0;
  VecX singular_values;      // of the stored (normalized) product
  VecX log_singular_values;  // of the full product: log s_j + log_scale
};

template <class S>
IterateResult iterate(const FourierCocycleT<S>& A, const Frequency& f,
                      const TorusPoint& x, long long n) {
  if (n < 1) throw std::invalid_argument("iterate: n >= 1");
  if (f.dim() != A.d) throw std::invalid_argument("iterate: frequency dimension");
  ScaledMatrix P = ScaledMatrix::identity(A.m);
  for (long long j = 0; j < n; ++j)
    P.apply(evaluate_real(A, translate(x, f, j)));
  IterateResult r;
  r.n = n;
  r.product = P.m;
  r.log_scale = P.log_scale;
  r.singular_values = singular_values(P.m);
  r.log_singular_values = P.log_singular_values();
  r.log_norm = P.degenerate() ? -std::numeric_limits<double>::infinity()
                              : r.log_singular_values[0];
  return r;
}

// Sup of the operator norm over the closed strip, sampled on a dyadic real
// grid crossed with imaginary offsets {-rho, 0, +rho} per coordinate.  The
// norm of an analytic map attains its max on the boundary, so the offset set
// is enough; the grid is rounded up to a power of two to make the returned
// value monotone in grid_N.
template <class S>
double sup_norm_strip(const FourierCocycleT<S>& A, long long grid_N) {
  if (grid_N < 1) throw std::invalid_argument("sup_norm_strip: grid_N >= 1");
  long long N = 1;
  while (N < grid_N) N *= 2;
  std::vector<double> offs = A.rho > 0.0 ? std::vector<double>{-A.rho, 0.0, A.rho}
                                         : std::vector<double>{0.0};
  long long total = 1;
  for (int i = 0; i < A.d; ++i) {
    if (total > 100000000LL / N) throw std::overflow_error("sup_norm_strip: grid too large");
    total *= N;
  }
  double best = 0.0;
  Eigen::VectorXd xr(A.d), yi(A.d);
  std::vector<std::size_t> oidx(A.d, 0);
  for (long long t = 0; t < total; ++t) {
    long long rest = t;
    for (int i = 0; i < A.d; ++i) {
      xr[i] = static_cast<double>(rest % N) / static_cast<double>(N);
      rest /= N;
    }
    TorusPoint p(xr);
    std::fill(oidx.begin(), oidx.end(), 0);
    while (true) {
      for (int i = 0; i < A.d; ++i) yi[i] = offs[oidx[i]];
      best = std::max(best, op_norm(evaluate(A, p, yi)));
      int i = A.d - 1;
      while (i >= 0 && oidx[i] + 1 == offs.size()) oidx[i--] = 0;
      if (i < 0) break;
      ++oidx[i];
    }
  }
  return best;
}

// det A(.) as a scalar evaluator; carries its own copy of the cocycle.
template <class S>
struct DeterminantFunction {
  FourierCocycleT<S> A;
  S operator()(const TorusPoint& x) const {
    return evaluate_real(A, x).determinant();
  }
  std::complex<S> operator()(const TorusPoint& x, const Eigen::VectorXd& imag_offset) const {
    return evaluate(A, x, imag_offset).determinant();
  }
};

template <class S>
DeterminantFunction<S> determinant_function(const FourierCocycleT<S>& A) {
  return DeterminantFunction<S>{A};
}

// Pointwise j-th exterior power.  Not a trigonometric-polynomial cocycle any
// more (minors multiply modes), so it is exposed as an evaluator; products of
// its values are the compounds of products, which is what the Lyapunov sums
// need.
template <class S>
struct ExteriorPower {
  FourierCocycleT<S> A;
  int j = 1;
  int dim() const {
    return static_cast<int>(lex_subsets(A.m, j).size());
  }
  Mat<S> operator()(const TorusPoint& x) const {
    return compound_matrix<S>(evaluate_real(A, x), j);
  }
};

template <class S>
ExteriorPower<S> exterior_power(const FourierCocycleT<S>& A, int j) {
  if (j < 1 || j > A.m) throw std::invalid_argument("exterior_power: 1 <= j <= m");
  return ExteriorPower<S>{A, j};
}

// Scalar summary of a cocycle used by the uniform estimates: sup log norm
// over the strip, the L^2 size of log|det|, and the Cramer constant
// (m-1) log||A||_rho + log((m-1)!) + log||A||_rho.
struct MeasurementReport {
  double sup_log_norm = 0.0;
  double det_l2 = 0.0;
  double cramer_constant = 0.0;
  long long samples_used = 0;
  long long samples_excluded = 0;
};

// Two-sided control of u_n = (1/n) log ||A^(n)||:
//   u_n(x) <= log ||A||_rho                                   (submultiplicativity)
//   u_n(x) >= (1/n) sum log|det A(T^i x)| - C_lower           (Cramer's rule)
// with C_lower = log((m-1)!) + (m-1) log ||A||_rho coming from the adjugate
// bound ||adj B|| <= (m-1)! ||B||^(m-1).
struct CramerReport {
  double c_upper = 0.0;
  double c_lower = 0.0;
  double worst_upper_slack = 0.0;  // min over samples of c_upper - u_n
  double worst_lower_slack = 0.0;  // min over samples of u_n - (avg - c_lower)
  long long samples_used = 0;
  long long samples_excluded = 0;
};

template <class S>
CramerReport cramer_bounds_check(const FourierCocycleT<S>& A, const Frequency& f,
                                 long long n, const std::vector<TorusPoint>& sampler,
                                 long long sup_grid = 256, double tol = 1e-8) {
  if (n < 1) throw std::invalid_argument("cramer_bounds_check: n >= 1");
  if (sampler.empty()) throw std::invalid_argument("cramer_bounds_check: empty sampler");
  auto det = determinant_function(A);
  double max_abs_det = 0.0;
  for (const auto& x : sampler) max_abs_det = std::max(max_abs_det, std::abs(det(x)));
  if (max_abs_det <= 1e-10)
    throw guard_error("cramer_bounds_check: identically singular determinant");

  CramerReport rep;
  rep.c_upper = std::log(sup_norm_strip(A, sup_grid));
  rep.c_lower = std::lgamma(static_cast<double>(A.m)) + (A.m - 1) * rep.c_upper;

  std::vector<double> up(sampler.size()), lo(sampler.size());
  std::vector<char> skip(sampler.size(), 0);
  parallel_for(sampler.size(), [&](std::size_t i) {
    const TorusPoint& x = sampler[i];
    double logdet_sum = 0.0;
    for (long long j = 0; j < n; ++j) {
      double fj = std::abs(det(translate(x, f, j)));
      if (fj < singular_floor) {
        skip[i] = 1;  // orbit passes through a determinant zero
        return;
      }
      logdet_sum += std::log(fj);
    }
    double u = iterate(A, f, x, n).log_norm / static_cast<double>(n);
    up[i] = rep.c_upper - u;
    lo[i] = u - (logdet_sum / static_cast<double>(n) - rep.c_lower);
  });

  rep.worst_upper_slack = std::numeric_limits<double>::infinity();
  rep.worst_lower_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sampler.size(); ++i) {
    if (skip[i]) {
      ++rep.samples_excluded;
      continue;
    }
    ++rep.samples_used;
    rep.worst_upper_slack = std::min(rep.worst_upper_slack, up[i]);
    rep.worst_lower_slack = std::min(rep.worst_lower_slack, lo[i]);
  }
  if (rep.samples_used == 0)
    throw guard_error("cramer_bounds_check: every sample hit a determinant zero");
  if (rep.worst_upper_slack < -tol || rep.worst_lower_slack < -tol)
    throw guard_error("cramer_bounds_check: sandwich violated, slack " +
                      fmt_g17(std::min(rep.worst_upper_slack, rep.worst_lower_slack)));
  return rep;
}

// ---- presets ---------------------------------------------------------------

inline FourierCocycle make_const_diag(const std::vector<double>& diag,
                                      int d = 1, double rho = 0.05) {
  FourierCocycle A;
  A.d = d;
  A.m = static_cast<int>(diag.size());
  A.rho = rho;
  ModeT<double> m0;
  m0.k = Eigen::VectorXi::Zero(d);
  m0.c = MatX::Zero(A.m, A.m);
  for (int i = 0; i < A.m; ++i) m0.c(i, i) = diag[static_cast<std::size_t>(i)];
  m0.s = MatX::Zero(A.m, A.m);
  A.modes.push_back(std::move(m0));
  A.validate();
  return A;
}

// x -> rotation of the plane by angle 2 pi x.
inline FourierCocycle make_rotation(double rho = 0.05) {
  FourierCocycle A;
  A.d = 1;
  A.m = 2;
  A.rho = rho;
  ModeT<double> m1;
  m1.k = Eigen::VectorXi::Ones(1);
  m1.c = MatX::Identity(2, 2);
  m1.s = MatX::Zero(2, 2);
  m1.s(0, 1) = -1.0;
  m1.s(1, 0) = 1.0;
  A.modes.push_back(std::move(m1));
  A.validate();
  return A;
}

// Transfer matrix [[2 lambda cos(2 pi x) - E, -1], [1, 0]]; det = 1.
inline FourierCocycle make_schrodinger(double lambda, double E = 0.0,
                                       double rho = 0.05) {
  FourierCocycle A;
  A.d = 1;
  A.m = 2;
  A.rho = rho;
  ModeT<double> m0;
  m0.k = Eigen::VectorXi::Zero(1);
  m0.c = MatX::Zero(2, 2);
  m0.c(0, 0) = -E;
  m0.c(0, 1) = -1.0;
  m0.c(1, 0) = 1.0;
  m0.s = MatX::Zero(2, 2);
  A.modes.push_back(m0);
  ModeT<double> m1;
  m1.k = Eigen::VectorXi::Ones(1);
  m1.c = MatX::Zero(2, 2);
  m1.c(0, 0) = 2.0 * lambda;
  m1.s = MatX::Zero(2, 2);
  A.modes.push_back(m1);
  A.validate();
  return A;
}

// diag(2 cos(2 pi x_1), 1) on T^d; singular on the circle x_1 = 1/4 etc.,
// which is what the zero-measure guards are exercised against.
inline FourierCocycle make_diag_cos(int d = 1, double rho = 0.05) {
  FourierCocycle A;
  A.d = d;
  A.m = 2;
  A.rho = rho;
  ModeT<double> m0;
  m0.k = Eigen::VectorXi::Zero(d);
  m0.c = MatX::Zero(2, 2);
  m0.c(1, 1) = 1.0;
  m0.s = MatX::Zero(2, 2);
  A.modes.push_back(m0);
  ModeT<double> m1;
  m1.k = Eigen::VectorXi::Zero(d);
  m1.k[0] = 1;
  m1.c = MatX::Zero(2, 2);
  m1.c(0, 0) = 2.0;
  m1.s = MatX::Zero(2, 2);
  A.modes.push_back(m1);
  A.validate();
  return A;
}

// "name" or "name:args" with comma-separated numeric args:
//   const-diag:2,1   rotation   schrodinger:10[,E]   diag-cos[:d]
inline FourierCocycle parse_preset(const std::string& text) {
  std::string name = text;
  std::vector<double> args;
  if (auto pos = text.find(':'); pos != std::string::npos) {
    name = text.substr(0, pos);
    std::string rest = text.substr(pos + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      std::size_t comma = rest.find(',', start);
      std::string tok = rest.substr(start, comma == std::string::npos
                                               ? std::string::npos
                                               : comma - start);
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("preset: bad numeric argument '" + tok + "'");
      }
      if (used != tok.size())
        throw std::invalid_argument("preset: bad numeric argument '" + tok + "'");
      args.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  if (name == "const-diag") {
    if (args.empty()) throw std::invalid_argument("const-diag needs diagonal entries");
    return make_const_diag(args);
  }
  if (name == "rotation") {
    if (!args.empty()) throw std::invalid_argument("rotation takes no arguments");
    return make_rotation();
  }
  if (name == "schrodinger") {
    if (args.empty() || args.size() > 2)
      throw std::invalid_argument("schrodinger needs lambda and optional E");
    return make_schrodinger(args[0], args.size() > 1 ? args[1] : 0.0);
  }
  if (name == "diag-cos") {
    if (args.size() > 1) throw std::invalid_argument("diag-cos takes one optional dim");
    int d = args.empty() ? 1 : static_cast<int>(args[0]);
    if (!args.empty() && (args[0] != std::floor(args[0]) || d < 1))
      throw std::invalid_argument("diag-cos dim must be a positive integer");
    return make_diag_cos(d);
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace qplab
