#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qplab/cocycle.hpp"

namespace qplab {

using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

// Fraction-free Gaussian elimination; exact for the small unimodular
// matrices handled here (entries stay far below the int64 range for d <= 8).
inline long long det_int(IMat M) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n) throw std::invalid_argument("det_int: square only");
  if (n == 0) return 1;
  long long prev = 1;
  long long sign = 1;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (M(k, k) == 0) {
      Eigen::Index p = k + 1;
      while (p < n && M(p, k) == 0) ++p;
      if (p == n) return 0;
      M.row(k).swap(M.row(p));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i)
      for (Eigen::Index j = k + 1; j < n; ++j)
        M(i, j) = (M(i, j) * M(k, k) - M(i, k) * M(k, j)) / prev;
    prev = M(k, k);
  }
  return sign * M(n - 1, n - 1);
}

inline IMat adjugate_int(const IMat& M) {
  const Eigen::Index n = M.rows();
  IMat adj(n, n);
  IMat minor(n - 1, n - 1);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index i = 0, mi = 0; i < n; ++i) {
        if (i == r) continue;
        for (Eigen::Index j = 0, mj = 0; j < n; ++j) {
          if (j == c) continue;
          minor(mi, mj) = M(i, j);
          ++mj;
        }
        ++mi;
      }
      adj(c, r) = ((r + c) % 2 == 0 ? 1 : -1) * det_int(minor);
    }
  return adj;
}

// Empirical Lojasiewicz data: sublevel measures on a t grid, a log-log slope
// b_hat, and the smallest S_hat with measure(t) <= S_hat t^b_hat on every
// grid row, so max_violation <= 0 holds by construction whenever any
// sublevel mass was seen at all.
struct LojaFit {
  double S_hat = 0.0;
  double b_hat = 0.0;
  std::vector<double> t_grid;
  std::vector<double> measures;
  double max_violation = 0.0;
  bool degenerate = false;  // fewer than two nonzero rows; no slope available
  long long samples = 0;
};

inline std::vector<double> dyadic_t_grid(int min_exp = 20) {
  std::vector<double> t;
  for (int i = 0; i <= min_exp; ++i) t.push_back(std::ldexp(1.0, -i));
  return t;
}

template <class F>
LojaFit loja_fit(F&& f, const std::vector<TorusPoint>& sampler,
                 std::vector<double> t_grid = dyadic_t_grid()) {
  if (sampler.empty()) throw std::invalid_argument("loja_fit: empty sampler");
  if (t_grid.empty()) throw std::invalid_argument("loja_fit: empty t grid");
  std::vector<double> av(sampler.size());
  parallel_for(sampler.size(), [&](std::size_t i) {
    av[i] = std::abs(f(sampler[i]));
  });
  double max_abs = 0.0;
  for (double v : av) max_abs = std::max(max_abs, v);
  if (max_abs <= singular_floor) throw guard_error("loja_fit: |f| vanishes on the sampler");

  LojaFit fit;
  fit.t_grid = std::move(t_grid);
  fit.samples = static_cast<long long>(sampler.size());
  std::sort(av.begin(), av.end());
  for (double t : fit.t_grid) {
    auto lo = std::lower_bound(av.begin(), av.end(), t);  // #, |f| < t
    fit.measures.push_back(static_cast<double>(lo - av.begin()) /
                           static_cast<double>(av.size()));
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < fit.t_grid.size(); ++i)
    if (fit.measures[i] > 0.0) {
      xs.push_back(std::log(fit.t_grid[i]));
      ys.push_back(std::log(fit.measures[i]));
    }
  if (xs.size() < 2 || std::set<double>(xs.begin(), xs.end()).size() < 2) {
    fit.degenerate = true;
    for (double m : fit.measures) fit.S_hat = std::max(fit.S_hat, m);
  } else {
    fit.b_hat = fit_line(xs, ys).slope;
    for (std::size_t i = 0; i < fit.t_grid.size(); ++i)
      if (fit.measures[i] > 0.0)
        fit.S_hat = std::max(fit.S_hat,
                             fit.measures[i] / std::pow(fit.t_grid[i], fit.b_hat));
    fit.S_hat *= 1.0 + 1e-12;  // keep the binding row on the right side of 0
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fit.t_grid.size(); ++i)
    worst = std::max(worst, fit.measures[i] -
                                fit.S_hat * std::pow(fit.t_grid[i], fit.b_hat));
  fit.max_violation = worst;
  return fit;
}

// ||log|f|||_{L^2} control from Lojasiewicz data:
// |log sup|f|| + S (2^b - 1)^(-3/2).
inline double log_l2_bound(double S, double b, double sup_norm) {
  if (!(b > 0.0)) throw std::invalid_argument("log_l2_bound: b > 0");
  if (!(S >= 0.0) || !(sup_norm > 0.0))
    throw std::invalid_argument("log_l2_bound: S >= 0, sup_norm > 0");
  return std::abs(std::log(sup_norm)) + S * std::pow(std::exp2(b) - 1.0, -1.5);
}

// sup over axis-parallel lines of the L^2 norm of u along the line,
// restricted to the lines where the integral is finite.  Lines where more
// than 1% of the grid evaluates non-finite (or whose mean square still
// diverges) are counted, not errors: a function can be L^2 on the torus and
// still have bad sections.
struct SeparateL2Report {
  double value = 0.0;
  long long divergent_lines = 0;
  long long lines_checked = 0;
};

template <class F>
SeparateL2Report separate_l2_norm(F&& u, int d, long long anchors_per_axis,
                                  long long line_grid) {
  if (d < 1) throw std::invalid_argument("separate_l2_norm: d >= 1");
  if (anchors_per_axis < 1 || line_grid < 2)
    throw std::invalid_argument("separate_l2_norm: grid sizes");
  SeparateL2Report rep;
  long long anchor_total = 1;
  for (int i = 0; i + 1 < d; ++i) {
    if (anchor_total > 1000000LL / anchors_per_axis)
      throw std::overflow_error("separate_l2_norm: anchor grid too large");
    anchor_total *= anchors_per_axis;
  }
  Eigen::VectorXd coords(d);
  for (int ax = 0; ax < d; ++ax) {
    for (long long a = 0; a < anchor_total; ++a) {
      long long rest = a;
      for (int i = 0; i < d; ++i) {
        if (i == ax) continue;
        coords[i] = static_cast<double>(rest % anchors_per_axis) /
                    static_cast<double>(anchors_per_axis);
        rest /= anchors_per_axis;
      }
      ++rep.lines_checked;
      long long bad = 0;
      double sumsq = 0.0;
      long long used = 0;
      for (long long t = 0; t < line_grid; ++t) {
        coords[ax] = static_cast<double>(t) / static_cast<double>(line_grid);
        double v = u(TorusPoint(coords));
        if (!std::isfinite(v)) {
          ++bad;
          continue;
        }
        sumsq += v * v;
        ++used;
      }
      if (bad * 100 > line_grid || used == 0 || !std::isfinite(sumsq)) {
        ++rep.divergent_lines;
        continue;
      }
      rep.value = std::max(rep.value, std::sqrt(sumsq / static_cast<double>(used)));
    }
  }
  if (rep.divergent_lines == rep.lines_checked)
    throw guard_error("separate_l2_norm: every line diverged");
  return rep;
}

// The standard unimodular totally-irrational test family: on the plane
// [[1,1],[1,2]], in higher dimension identity + subdiagonal shift with two
// extra units in the last column.  Characteristic polynomial
// (-1)^d ((t-1)^d - t), verified exactly below.
struct CoordinateChange {
  IMat M;
  long long det_check = 0;
  int primitive_power = 0;  // smallest p <= 2d with M^p entrywise positive
  bool charpoly_ok = false;
  bool no_unit_root = false;
};

inline bool charpoly_check(const IMat& M) {
  const int d = static_cast<int>(M.rows());
  for (long long lam = 0; lam <= d; ++lam) {
    IMat S = M;
    for (int i = 0; i < d; ++i) S(i, i) -= lam;
    long long expect = 1;
    for (int i = 0; i < d; ++i) expect *= lam - 1;
    expect -= lam;
    if (d % 2 != 0) expect = -expect;
    if (det_int(S) != expect) return false;
  }
  return true;
}

inline CoordinateChange coordinate_matrix(int d) {
  if (d < 2) throw std::invalid_argument("coordinate_matrix: d >= 2");
  CoordinateChange cc;
  cc.M = IMat::Zero(d, d);
  if (d == 2) {
    cc.M << 1, 1, 1, 2;
  } else {
    for (int i = 0; i < d; ++i) cc.M(i, i) = 1;
    for (int i = 1; i < d; ++i) cc.M(i, i - 1) = 1;
    cc.M(0, d - 1) = 1;
    cc.M(1, d - 1) = 1;
  }
  cc.det_check = det_int(cc.M);
  IMat P = IMat::Identity(d, d);
  for (int p = 1; p <= 2 * d; ++p) {
    P = (P * cc.M).eval();
    if ((P.array() > 0).all()) {
      cc.primitive_power = p;
      break;
    }
  }
  cc.charpoly_ok = charpoly_check(cc.M);
  // mu^d - mu - 1 at the only integer candidates +-1; nonzero means the
  // stable direction of M never lies in a rational hyperplane of low height.
  long long at1 = 1 - 1 - 1;
  long long atm1 = (d % 2 == 0 ? 1 : -1) + 1 - 1;
  cc.no_unit_root = at1 != 0 && atm1 != 0;
  return cc;
}

// Is the closed geodesic {t k mod 1} delta-dense in the sup metric?
// Exhaustive at the stated resolutions; the caller owes the resolution
// bounds line_samples >= 10/delta^2 and torus_samples >= 10/delta^d.
struct DensityReport {
  bool dense = false;
  double max_min_dist = 0.0;
  TorusPoint witness;
};

inline DensityReport delta_density_check(const Eigen::VectorXi& k, double delta,
                                         long long line_samples,
                                         long long torus_samples) {
  const int d = static_cast<int>(k.size());
  if (d < 1) throw std::invalid_argument("delta_density_check: empty direction");
  if (k.isZero()) throw std::invalid_argument("delta_density_check: zero direction");
  if (!(delta > 0.0 && delta <= 0.5))
    throw std::invalid_argument("delta_density_check: delta in (0, 1/2]");
  if (static_cast<double>(line_samples) < 10.0 / (delta * delta))
    throw std::invalid_argument("delta_density_check: line_samples below 10/delta^2");
  if (static_cast<double>(torus_samples) < 10.0 / std::pow(delta, d))
    throw std::invalid_argument("delta_density_check: torus_samples below 10/delta^d");

  std::vector<TorusPoint> line;
  line.reserve(static_cast<std::size_t>(line_samples));
  Eigen::VectorXd p(d);
  for (long long i = 0; i < line_samples; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(line_samples);
    for (int j = 0; j < d; ++j) p[j] = t * k[j];
    line.emplace_back(p);
  }
  long long side = 1;
  while (std::pow(static_cast<double>(side), d) < static_cast<double>(torus_samples)) ++side;

  DensityReport rep;
  rep.dense = true;
  long long total = 1;
  for (int i = 0; i < d; ++i) total *= side;
  std::vector<double> worst(static_cast<std::size_t>(total), 0.0);
  std::vector<TorusPoint> pts(static_cast<std::size_t>(total));
  parallel_for(static_cast<std::size_t>(total), [&](std::size_t t) {
    Eigen::VectorXd q(d);
    long long rest = static_cast<long long>(t);
    for (int i = 0; i < d; ++i) {
      q[i] = static_cast<double>(rest % side) / static_cast<double>(side);
      rest /= side;
    }
    TorusPoint tp(q);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& lp : line) best = std::min(best, torus_dist_sup(tp, lp));
    worst[t] = best;
    pts[t] = tp;
  });
  for (std::size_t t = 0; t < worst.size(); ++t)
    if (worst[t] > rep.max_min_dist) {
      rep.max_min_dist = worst[t];
      rep.witness = pts[t];
    }
  rep.dense = rep.max_min_dist <= delta;
  return rep;
}

// Pull a cocycle and its frequency through x -> Mx: modes relabel by M^T,
// the frequency maps by M^-1 (adjugate; det M = 1), and the safe strip
// shrinks by the max row sum of M.  Declared Diophantine constants degrade
// by at most the (d+1)-th power of the max column sum.
template <class S>
std::pair<FourierCocycleT<S>, Frequency> change_coordinates(
    const FourierCocycleT<S>& A, const Frequency& f, const IMat& M) {
  const int d = A.d;
  if (M.rows() != d || M.cols() != d)
    throw std::invalid_argument("change_coordinates: M must be d x d");
  if (f.dim() != d) throw std::invalid_argument("change_coordinates: frequency dim");
  if (det_int(M) != 1)
    throw std::invalid_argument("change_coordinates: det M must be 1");

  double row_sum = 0.0, col_sum = 0.0;
  for (int i = 0; i < d; ++i) {
    double rs = 0.0, cs = 0.0;
    for (int j = 0; j < d; ++j) {
      rs += std::abs(static_cast<double>(M(i, j)));
      cs += std::abs(static_cast<double>(M(j, i)));
    }
    row_sum = std::max(row_sum, rs);
    col_sum = std::max(col_sum, cs);
  }

  FourierCocycleT<S> B = A;
  B.rho = A.rho / row_sum;
  for (auto& mo : B.modes) {
    Eigen::VectorXi kk = Eigen::VectorXi::Zero(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        kk[i] += static_cast<int>(M(j, i)) * mo.k[j];  // M^T k
    mo.k = kk;
  }

  IMat Minv = adjugate_int(M);
  Eigen::VectorXd w(d);
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += static_cast<double>(Minv(i, j)) * f.omega[j];
    w[i] = s;
  }
  Frequency g(w);
  if (f.declared_t)
    g.declared_t = *f.declared_t / std::pow(col_sum, static_cast<double>(d) + 1.0);
  g.declared_delta0 = f.declared_delta0;
  return {std::move(B), std::move(g)};
}

}  // namespace qplab
