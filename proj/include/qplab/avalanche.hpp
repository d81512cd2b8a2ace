#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qplab/lyapunov.hpp"

namespace qplab {

// s_1/s_2; +inf when the second singular value underflows to zero.
inline double gap_ratio(const MatX& g) {
  if (g.rows() < 2 || g.rows() != g.cols())
    throw std::invalid_argument("gap_ratio: square matrix, m >= 2");
  VecX s = singular_values(g);
  if (s[0] <= 0.0) throw std::invalid_argument("gap_ratio: zero matrix");
  return s[1] > 0.0 ? s[0] / s[1] : std::numeric_limits<double>::infinity();
}

// ||g h|| / (||g|| ||h||) in (0,1]; the alignment of h's expanding image with
// g's expanding axis.  Zero factors are rejected.
inline double cancellation_ratio(const MatX& g, const MatX& h) {
  double ng = op_norm(g), nh = op_norm(h);
  if (ng <= 0.0 || nh <= 0.0)
    throw std::invalid_argument("cancellation_ratio: zero factor");
  return op_norm(MatX(g * h)) / (ng * nh);
}

// Block product certificate.  With kappa := 1/kappa_inv the hypotheses are
//   gap_ratio(g_i) >= kappa_inv  (by construction of kappa_inv)
//   every consecutive cancellation ratio > epsilon
//   kappa <= c_hyp * epsilon^2
// and the certified conclusion is
//   |log||g^(n)|| + sum_{1..n-2} log||g_i|| - sum_{1..n-1} log||g_i g_{i-1}|||
//     <= C_cal * n * kappa / epsilon^2.
struct APCertificate {
  int n_blocks = 0;
  double epsilon = 0.0;
  double kappa_inv = 0.0;
  bool hypothesis_ok = false;
  double predicted_bound = 0.0;
  double actual_error = 0.0;
};

inline constexpr double ap_hypothesis_c = 0.01;
inline constexpr double ap_calibrated_C = 40.0;

inline APCertificate ap_certify(const std::vector<MatX>& blocks,
                                double C_cal = ap_calibrated_C,
                                double c_hyp = ap_hypothesis_c) {
  if (blocks.size() < 3) throw std::invalid_argument("ap_certify: need >= 3 blocks");
  const Eigen::Index m = blocks.front().rows();
  for (const auto& g : blocks)
    if (g.rows() != m || g.cols() != m)
      throw std::invalid_argument("ap_certify: inconsistent block shapes");

  APCertificate cert;
  cert.n_blocks = static_cast<int>(blocks.size());
  cert.epsilon = std::numeric_limits<double>::infinity();
  cert.kappa_inv = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    cert.kappa_inv = std::min(cert.kappa_inv, gap_ratio(blocks[i]));
    if (i > 0)
      cert.epsilon = std::min(cert.epsilon,
                              cancellation_ratio(blocks[i], blocks[i - 1]));
  }
  cert.hypothesis_ok = cert.epsilon > 0.0 &&
                       1.0 / cert.kappa_inv <= c_hyp * cert.epsilon * cert.epsilon;
  cert.predicted_bound = C_cal * static_cast<double>(cert.n_blocks) /
                         (cert.kappa_inv * cert.epsilon * cert.epsilon);

  ScaledMatrix prod = ScaledMatrix::identity(m);
  for (const auto& g : blocks) prod.apply(g);
  double lhs = prod.log_op_norm();
  for (std::size_t i = 1; i + 1 < blocks.size(); ++i)
    lhs += std::log(op_norm(blocks[i]));
  for (std::size_t i = 1; i < blocks.size(); ++i)
    lhs -= std::log(op_norm(MatX(blocks[i] * blocks[i - 1])));
  cert.actual_error = std::abs(lhs);
  return cert;
}

// Shifted block partition of [0, n1): first block n0 + j, middle blocks n0,
// last block absorbing the remainder inside (2 n0, 3 n0].  Offsets after the
// first are then j + i * n0, so sliding j through 0..n0-1 moves every interior
// block boundary across each point of the orbit exactly once.
struct BlockConfiguration {
  long long n0 = 0;
  long long n1 = 0;
  long long j = 0;
  std::vector<long long> sizes;
  std::vector<long long> offsets;
};

inline BlockConfiguration shifted_partition(long long n1, long long n0, long long j) {
  if (n0 < 1) throw std::invalid_argument("shifted_partition: n0 >= 1");
  if (j < 0 || j >= n0)
    throw std::invalid_argument("shifted_partition: 0 <= j < n0");
  if (n1 < 5 * n0)
    throw std::invalid_argument("shifted_partition: n1 >= 5 n0");
  BlockConfiguration cfg;
  cfg.n0 = n0;
  cfg.n1 = n1;
  cfg.j = j;
  long long rem = n1 - (n0 + j);           // >= 3 n0 + 1 given the preconditions
  long long mid = (rem - 3 * n0 + n0 - 1) / n0;  // ceil((rem - 3 n0)/n0) >= 1
  long long last = rem - mid * n0;
  cfg.sizes.push_back(n0 + j);
  for (long long i = 0; i < mid; ++i) cfg.sizes.push_back(n0);
  cfg.sizes.push_back(last);
  long long off = 0;
  for (long long s : cfg.sizes) {
    cfg.offsets.push_back(off);
    off += s;
  }
  if (off != n1 || last <= 2 * n0 || last > 3 * n0)
    throw std::logic_error("shifted_partition: internal arithmetic error");
  return cfg;
}

// Two-scale refinement record: L^(n1)_1 predicted from the n0 and 2 n0
// ladders through L^(n1) + L^(n0) - 2 L^(2n0) ~ 0, plus the fraction of
// sampled orbits where some shifted block configuration violates the
// certificate hypotheses at thresholds epsilon = e^(-n0 gap / 5),
// 1/kappa = e^(n0 gap / 2).
struct MultiscaleReport {
  long long n0 = 0;
  long long n1 = 0;
  double gap = 0.0;  // L^(n0)_1 - L^(n0)_2
  double L_n0 = 0.0;
  double L_2n0 = 0.0;
  double predicted_L_n1 = 0.0;
  double measured_L_n1 = 0.0;
  double residual = 0.0;
  double hypothesis_failure_fraction = 0.0;
  long long sample_count = 0;
};

template <class S>
MultiscaleReport multiscale_refine(const FourierCocycleT<S>& A, const Frequency& f,
                                   long long n0, long long n1,
                                   const std::vector<TorusPoint>& sampler,
                                   double gap_min = 0.2) {
  if (A.m < 2) throw std::invalid_argument("multiscale_refine: m >= 2");
  shifted_partition(n1, n0, 0);  // validates the scale relation up front

  FiniteScaleSpectrum sp0 = finite_scale_spectrum(A, f, n0, sampler);
  MultiscaleReport rep;
  rep.n0 = n0;
  rep.n1 = n1;
  rep.gap = sp0.les[0] - sp0.les[1];
  if (!(rep.gap > gap_min))
    throw std::invalid_argument("multiscale_refine: finite-scale gap at n0 below threshold");
  rep.L_n0 = sp0.les[0];
  rep.L_2n0 = finite_scale_spectrum(A, f, 2 * n0, sampler).les[0];
  rep.measured_L_n1 = finite_scale_spectrum(A, f, n1, sampler).les[0];
  rep.predicted_L_n1 = 2.0 * rep.L_2n0 - rep.L_n0;
  rep.residual = rep.measured_L_n1 + rep.L_n0 - 2.0 * rep.L_2n0;
  rep.sample_count = static_cast<long long>(sampler.size());

  const double eps_thr = std::exp(-static_cast<double>(n0) * rep.gap / 5.0);
  const double log_gr_thr = static_cast<double>(n0) * rep.gap / 2.0;
  std::vector<BlockConfiguration> cfgs;
  for (long long j = 0; j < n0; ++j) cfgs.push_back(shifted_partition(n1, n0, j));

  std::vector<char> failed(sampler.size(), 0);
  parallel_for(sampler.size(), [&](std::size_t i) {
    std::vector<MatX> steps, wedge_steps;
    steps.reserve(static_cast<std::size_t>(n1));
    wedge_steps.reserve(static_cast<std::size_t>(n1));
    for (long long k = 0; k < n1; ++k) {
      steps.push_back(evaluate_real(A, translate(sampler[i], f, k)));
      wedge_steps.push_back(compound_matrix(steps.back(), 2));
    }
    for (const auto& cfg : cfgs) {
      std::vector<MatX> blocks;  // normalized; every ratio below is scale-free
      blocks.reserve(cfg.sizes.size());
      for (std::size_t b = 0; b < cfg.sizes.size(); ++b) {
        ScaledMatrix P = ScaledMatrix::identity(A.m);
        ScaledMatrix Q = ScaledMatrix::identity(wedge_steps.front().rows());
        for (long long k = 0; k < cfg.sizes[b]; ++k) {
          const auto idx = static_cast<std::size_t>(cfg.offsets[b] + k);
          P.apply(steps[idx]);
          Q.apply(wedge_steps[idx]);
        }
        if (P.degenerate()) {
          failed[i] = 1;
          return;
        }
        // log(s1/s2) through the top wedge value; the direct singular-value
        // ratio of the product flattens near 1e16, below the thresholds
        // hyperbolic blocks are expected to clear.
        double log_gap = 2.0 * P.log_op_norm() - Q.log_op_norm();
        if (!(log_gap > log_gr_thr)) {
          failed[i] = 1;
          return;
        }
        blocks.push_back(P.m);
      }
      for (std::size_t b = 1; b < blocks.size(); ++b) {
        if (!(cancellation_ratio(blocks[b], blocks[b - 1]) > eps_thr)) {
          failed[i] = 1;
          return;
        }
      }
    }
  });
  long long nfail = 0;
  for (char c : failed) nfail += c;
  rep.hypothesis_failure_fraction =
      static_cast<double>(nfail) / static_cast<double>(sampler.size());
  return rep;
}

}  // namespace qplab
