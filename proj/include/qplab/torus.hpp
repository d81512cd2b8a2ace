#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qplab/numeric.hpp"

namespace qplab {

inline double mod1(double y) {
  double r = y - std::floor(y);
  return r >= 1.0 ? 0.0 : r;  // r can round up to 1.0 for tiny negative y
}

// Distance to the nearest integer; always in [0, 1/2].
inline double torus_norm(double y) {
  double r = y - std::round(y);
  return std::abs(r);
}

// Point on T^d = (R/Z)^d, coordinates kept in [0,1).
struct TorusPoint {
  Eigen::VectorXd x;

  TorusPoint() = default;
  explicit TorusPoint(Eigen::VectorXd v) : x(std::move(v)) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = mod1(x[i]);
  }
  int dim() const { return static_cast<int>(x.size()); }
};

inline double torus_dist_sup(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("torus_dist_sup: dimension mismatch");
  double d = 0.0;
  for (Eigen::Index i = 0; i < a.x.size(); ++i)
    d = std::max(d, torus_norm(a.x[i] - b.x[i]));
  return d;
}

// Translation frequency.  declared_t / declared_delta0 carry claimed
// Diophantine data alongside the vector; the scan below measures the actual
// constant at finite resolution.
struct Frequency {
  Eigen::VectorXd omega;
  std::optional<double> declared_t;
  std::optional<double> declared_delta0;

  Frequency() = default;
  explicit Frequency(Eigen::VectorXd w) : omega(std::move(w)) {
    for (Eigen::Index i = 0; i < omega.size(); ++i) omega[i] = mod1(omega[i]);
  }
  int dim() const { return static_cast<int>(omega.size()); }
};

inline TorusPoint translate(const TorusPoint& p, const Frequency& f,
                            long long steps = 1) {
  if (p.dim() != f.dim())
    throw std::invalid_argument("translate: dimension mismatch");
  Eigen::VectorXd y(p.x.size());
  double s = static_cast<double>(steps);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = mod1(p.x[i] + s * f.omega[i]);
  return TorusPoint(y);
}

enum class DiophMode { standard, strong };

struct DiophantineReport {
  DiophMode mode = DiophMode::standard;
  long long K_max = 0;
  double t_hat = 0.0;
  Eigen::VectorXi argmin_k;
  double delta0 = 0.0;  // standard-mode exponent offset
  double eta = 0.0;     // strong-mode log exponent offset
};

// Exhaustive lattice-box scan of the Diophantine constant:
//   standard: t_hat = min over 0 < |k|_inf <= K of |k|_inf^(d+delta0) ||k.w||
//   strong  : t_hat = min over 0 < k <= K of k (log(1+k))^(1+eta) ||k w||
// The strong flavor only makes sense on the circle (d = 1).  log(1+k) rather
// than log k keeps the k = 1 term nonzero.  The weight is even in k, so the
// reported argmin is canonicalized to have positive leading coordinate.
inline DiophantineReport diophantine_scan(const Frequency& f, DiophMode mode,
                                          long long K_max, double delta0 = 0.0,
                                          double eta = 0.5) {
  int d = f.dim();
  if (d < 1) throw std::invalid_argument("diophantine_scan: empty frequency");
  if (K_max < 1) throw std::invalid_argument("diophantine_scan: K_max >= 1");
  if (mode == DiophMode::strong && d != 1)
    throw std::invalid_argument("diophantine_scan: strong mode needs d = 1");
  if (delta0 < 0.0) throw std::invalid_argument("diophantine_scan: delta0 >= 0");
  if (eta <= 0.0) throw std::invalid_argument("diophantine_scan: eta > 0");

  DiophantineReport rep;
  rep.mode = mode;
  rep.K_max = K_max;
  rep.delta0 = delta0;
  rep.eta = eta;
  rep.t_hat = std::numeric_limits<double>::infinity();

  Eigen::VectorXi k = Eigen::VectorXi::Constant(d, static_cast<int>(-K_max));
  auto weight = [&](double kinf) {
    if (mode == DiophMode::strong)
      return kinf * std::pow(std::log1p(kinf), 1.0 + eta);
    return std::pow(kinf, static_cast<double>(d) + delta0);
  };
  while (true) {
    double kinf = 0.0, dot = 0.0;
    for (int i = 0; i < d; ++i) {
      kinf = std::max(kinf, std::abs(static_cast<double>(k[i])));
      dot += static_cast<double>(k[i]) * f.omega[i];
    }
    if (kinf > 0.0) {
      double v = weight(kinf) * torus_norm(dot);
      if (v < rep.t_hat) {
        rep.t_hat = v;
        rep.argmin_k = k;
      }
    }
    int i = d - 1;
    while (i >= 0 && k[i] == static_cast<int>(K_max)) k[i--] = static_cast<int>(-K_max);
    if (i < 0) break;
    ++k[i];
  }
  for (int i = 0; i < d; ++i) {
    if (rep.argmin_k[i] == 0) continue;
    if (rep.argmin_k[i] < 0) rep.argmin_k = -rep.argmin_k;
    break;
  }
  return rep;
}

enum class SampleScheme { random, lattice };

// Deterministic point families for averaging experiments.  The lattice
// scheme is the N^d product grid for d <= 2 and a Korobov rank-1 lattice
// (N points) in higher dimension, where a product grid would explode.
inline std::vector<TorusPoint> sample_grid(int d, long long N,
                                           SampleScheme scheme,
                                           std::uint64_t seed = 0) {
  if (d < 1) throw std::invalid_argument("sample_grid: d >= 1");
  if (N < 1) throw std::invalid_argument("sample_grid: N >= 1");
  std::vector<TorusPoint> pts;
  if (scheme == SampleScheme::random) {
    std::mt19937_64 gen(seed);
    pts.reserve(static_cast<std::size_t>(N));
    for (long long i = 0; i < N; ++i) {
      Eigen::VectorXd v(d);
      for (int j = 0; j < d; ++j) v[j] = uniform01(gen);
      pts.emplace_back(std::move(v));
    }
    return pts;
  }
  if (d == 1) {
    pts.reserve(static_cast<std::size_t>(N));
    for (long long i = 0; i < N; ++i) {
      Eigen::VectorXd v(1);
      v[0] = static_cast<double>(i) / static_cast<double>(N);
      pts.emplace_back(std::move(v));
    }
    return pts;
  }
  if (d == 2) {
    if (N > 100000000LL / N)
      throw std::overflow_error("sample_grid: N^2 lattice too large");
    pts.reserve(static_cast<std::size_t>(N * N));
    for (long long i = 0; i < N; ++i)
      for (long long j = 0; j < N; ++j) {
        Eigen::VectorXd v(2);
        v[0] = static_cast<double>(i) / static_cast<double>(N);
        v[1] = static_cast<double>(j) / static_cast<double>(N);
        pts.emplace_back(std::move(v));
      }
    return pts;
  }
  long long a = static_cast<long long>(std::llround(0.6180339887498949 * static_cast<double>(N)));
  a = std::max(1LL, a % N);
  while (std::gcd(a, N) != 1) ++a;
  pts.reserve(static_cast<std::size_t>(N));
  long long g = 1;
  std::vector<long long> gen_vec(d);
  for (int j = 0; j < d; ++j) {
    gen_vec[j] = g;
    g = (g * a) % N;
  }
  for (long long i = 0; i < N; ++i) {
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j)
      v[j] = static_cast<double>((i * gen_vec[j]) % N) / static_cast<double>(N);
    pts.emplace_back(std::move(v));
  }
  return pts;
}

// Named frequencies plus plain comma-separated decimal vectors.
inline Frequency parse_frequency(const std::string& text) {
  auto vec1 = [](double v) {
    Eigen::VectorXd w(1);
    w[0] = v;
    return w;
  };
  if (text == "golden") {
    Frequency f(vec1((std::sqrt(5.0) - 1.0) / 2.0));
    f.declared_t = (3.0 - std::sqrt(5.0)) / 2.0;
    f.declared_delta0 = 0.0;
    return f;
  }
  if (text == "sqrt2") return Frequency(vec1(std::sqrt(2.0) - 1.0));
  if (text == "cbrt2-pair") {
    Eigen::VectorXd w(2);
    w[0] = std::cbrt(2.0) - 1.0;
    w[1] = std::cbrt(4.0) - 1.0;
    return Frequency(w);
  }
  std::vector<double> coords;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("parse_frequency: bad coordinate '" + tok + "'");
    }
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size() || !std::isfinite(v))
      throw std::invalid_argument("parse_frequency: bad coordinate '" + tok + "'");
    coords.push_back(v);
  }
  if (coords.empty()) throw std::invalid_argument("parse_frequency: empty spec");
  Eigen::VectorXd w(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) w[static_cast<Eigen::Index>(i)] = coords[i];
  return Frequency(w);
}

}  // namespace qplab
