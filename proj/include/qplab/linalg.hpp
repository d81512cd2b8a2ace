#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace qplab {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
using MatX = Mat<double>;
using CMatX = Mat<std::complex<double>>;
using VecX = Eigen::VectorXd;

// Singular values, descending.  The 2x2 real case gets the rotation closed
// form: with q = |(a+d, b-c)|/2 and r = |(a-d, b+c)|/2 the values are q+r and
// |q-r|.  Exact to rounding, and cheap enough to sit inside the per-step loops.
inline VecX singular_values(const MatX& M) {
  if (M.rows() == 1 && M.cols() == 1) {
    VecX s(1);
    s[0] = std::abs(M(0, 0));
    return s;
  }
  if (M.rows() == 2 && M.cols() == 2) {
    double q = std::hypot(M(0, 0) + M(1, 1), M(0, 1) - M(1, 0)) / 2.0;
    double r = std::hypot(M(0, 0) - M(1, 1), M(0, 1) + M(1, 0)) / 2.0;
    VecX s(2);
    s[0] = q + r;
    s[1] = std::abs(q - r);
    return s;
  }
  Eigen::JacobiSVD<MatX> svd(M);
  return svd.singularValues();
}

inline double op_norm(const MatX& M) { return singular_values(M)[0]; }

inline double op_norm(const CMatX& M) {
  if (M.rows() == 1 && M.cols() == 1) return std::abs(M(0, 0));
  Eigen::JacobiSVD<CMatX> svd(M);
  return svd.singularValues()[0];
}

// Running matrix product held as exp(log_scale) * m with ||m||_F = 1, so the
// accumulated product never leaves the representable range.
struct ScaledMatrix {
  MatX m;
  double log_scale = 0.0;

  static ScaledMatrix identity(Eigen::Index n) {
    ScaledMatrix p;
    p.m = MatX::Identity(n, n);
    double s = p.m.norm();
    p.m /= s;
    p.log_scale = std::log(s);
    return p;
  }

  // Left-multiplies by A and renormalizes.  A zero product (possible when a
  // factor is singular) is reported by degenerate() rather than by NaNs.
  void apply(const MatX& A) {
    m = A * m;
    double s = m.norm();
    if (s > 0.0 && std::isfinite(s)) {
      m /= s;
      log_scale += std::log(s);
    } else {
      log_scale = -std::numeric_limits<double>::infinity();
    }
  }

  bool degenerate() const { return !std::isfinite(log_scale); }

  double log_op_norm() const { return log_scale + std::log(op_norm(m)); }

  // log of every singular value of the full product, descending.
  VecX log_singular_values() const {
    VecX s = singular_values(m);
    VecX out(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
      out[i] = log_scale + std::log(s[i]);
    return out;
  }
};

inline std::vector<std::vector<int>> lex_subsets(int m, int j) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(j);
  for (int i = 0; i < j; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = j - 1;
    while (i >= 0 && idx[i] == m - j + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int l = i + 1; l < j; ++l) idx[l] = idx[l - 1] + 1;
  }
  return out;
}

// j-th compound matrix: rows and columns indexed by the lexicographic
// j-subsets, entries the corresponding minors.  Multiplicative in the
// argument, and its top singular value is s_1*...*s_j of the argument.
template <class S>
Mat<S> compound_matrix(const Mat<S>& M, int j) {
  int m = static_cast<int>(M.rows());
  if (M.cols() != m) throw std::invalid_argument("compound_matrix: square only");
  if (j < 1 || j > m) throw std::invalid_argument("compound_matrix: 1 <= j <= m");
  if (j == 1) return M;
  auto subsets = lex_subsets(m, j);
  Mat<S> C(subsets.size(), subsets.size());
  Mat<S> block(j, j);
  for (std::size_t r = 0; r < subsets.size(); ++r)
    for (std::size_t c = 0; c < subsets.size(); ++c) {
      for (int a = 0; a < j; ++a)
        for (int b = 0; b < j; ++b) block(a, b) = M(subsets[r][a], subsets[c][b]);
      C(r, c) = block.determinant();
    }
  return C;
}

// Largest principal angle between the spans of two orthonormal column sets
// of equal dimension: acos of the smallest singular value of U^T W.
inline double max_principal_angle(const MatX& U, const MatX& W) {
  if (U.rows() != W.rows() || U.cols() != W.cols())
    throw std::invalid_argument("max_principal_angle: shape mismatch");
  if (U.cols() == 0) return 0.0;
  MatX G = U.transpose() * W;
  VecX s = singular_values(G);
  double c = std::clamp(s[s.size() - 1], -1.0, 1.0);
  return std::acos(c);
}

}  // namespace qplab
