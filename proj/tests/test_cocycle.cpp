#include <cmath>
#include <random>

#include "doctest.h"
#include "qplab/cocycle.hpp"
#include "qplab/serialize.hpp"

using namespace qplab;

namespace {

TorusPoint pt1(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return TorusPoint(v);
}

MatX full_product(const IterateResult& r) {
  return std::exp(r.log_scale) * r.product;
}

}  // namespace

TEST_CASE("preset evaluation matches the defining formulas") {
  FourierCocycle D = make_const_diag({2.0, 1.0});
  MatX Dv = evaluate_real(D, pt1(0.37));
  CHECK(Dv(0, 0) == 2.0);
  CHECK(Dv(1, 1) == 1.0);
  CHECK(Dv(0, 1) == 0.0);

  FourierCocycle R = make_rotation();
  MatX Rv = evaluate_real(R, pt1(0.25));
  CHECK(std::abs(Rv(0, 0)) <= 1e-15);
  CHECK(Rv(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(Rv(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(Rv(1, 1)) <= 1e-15);

  double lambda = 10.0, E = 0.3, x = 0.11;
  FourierCocycle Sc = make_schrodinger(lambda, E);
  MatX Sv = evaluate_real(Sc, pt1(x));
  CHECK(Sv(0, 0) ==
        doctest::Approx(2.0 * lambda * std::cos(two_pi * x) - E).epsilon(1e-14));
  CHECK(Sv(0, 1) == -1.0);
  CHECK(Sv(1, 0) == 1.0);
  CHECK(Sv(1, 1) == 0.0);

  FourierCocycle C = make_diag_cos();
  MatX Cv = evaluate_real(C, pt1(x));
  CHECK(Cv(0, 0) == doctest::Approx(2.0 * std::cos(two_pi * x)).epsilon(1e-14));
  CHECK(Cv(1, 1) == 1.0);
}

TEST_CASE("complex evaluation on the strip boundary") {
  FourierCocycle C = make_diag_cos();
  Eigen::VectorXd y(1);
  y[0] = C.rho;
  CMatX Z = evaluate(C, pt1(0.0), y);
  CHECK(Z(0, 0).real() == doctest::Approx(2.0 * std::cosh(two_pi * C.rho)).epsilon(1e-14));
  CHECK(std::abs(Z(0, 0).imag()) <= 1e-15);
  CHECK(Z(1, 1).real() == 1.0);

  y[0] = C.rho * 1.5;
  CHECK_THROWS_AS(evaluate(C, pt1(0.0), y), std::invalid_argument);
}

TEST_CASE("strip sup norm is attained and monotone in the grid") {
  FourierCocycle C = make_diag_cos();
  double exact = 2.0 * std::cosh(two_pi * C.rho);
  double s64 = sup_norm_strip(C, 64);
  double s256 = sup_norm_strip(C, 256);
  double s1024 = sup_norm_strip(C, 1024);
  CHECK(s256 == doctest::Approx(exact).epsilon(1e-12));
  CHECK(s64 <= s256 + 1e-15);
  CHECK(s256 <= s1024 + 1e-15);
  CHECK(s1024 <= exact * (1.0 + 1e-12));
}

TEST_CASE("iterate multiplies along the orbit") {
  FourierCocycle Sc = make_schrodinger(1.5);
  Frequency f = parse_frequency("golden");
  TorusPoint x = pt1(0.123);

  MatX brute = MatX::Identity(2, 2);
  for (long long j = 0; j < 12; ++j)
    brute = evaluate_real(Sc, translate(x, f, j)) * brute;
  IterateResult r12 = iterate(Sc, f, x, 12);
  CHECK((full_product(r12) - brute).norm() <= 1e-12 * brute.norm());

  IterateResult r5 = iterate(Sc, f, x, 5);
  IterateResult r7 = iterate(Sc, f, translate(x, f, 5), 7);
  MatX split = full_product(r7) * full_product(r5);
  CHECK((split - full_product(r12)).norm() <= 1e-12 * full_product(r12).norm());

  CHECK(r12.log_norm == doctest::Approx(std::log(op_norm(brute))).epsilon(1e-12));
  CHECK_THROWS_AS(iterate(Sc, f, x, 0), std::invalid_argument);
}

TEST_CASE("renormalized products survive scales plain products cannot") {
  FourierCocycle D = make_const_diag({2.0, 1.0});
  Frequency f = parse_frequency("golden");
  IterateResult r = iterate(D, f, pt1(0.0), 1200);  // raw 2^1200 would overflow
  CHECK(r.log_norm == doctest::Approx(1200.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(std::isfinite(r.product.norm()));

  // the bottom of the ladder is only meaningful while the product's condition
  // number fits in double precision, so probe it at a mild n
  FourierCocycle H = make_const_diag({2.0, 0.5});
  IterateResult h = iterate(H, f, pt1(0.0), 8);
  CHECK(h.log_singular_values[0] ==
        doctest::Approx(8.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(h.log_singular_values[1] ==
        doctest::Approx(-8.0 * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("compound matrices multiply minors") {
  MatX D = MatX::Zero(3, 3);
  D(0, 0) = 3.0;
  D(1, 1) = 2.0;
  D(2, 2) = 1.0;
  MatX C2 = compound_matrix<double>(D, 2);
  REQUIRE(C2.rows() == 3);
  CHECK(C2(0, 0) == doctest::Approx(6.0));
  CHECK(C2(1, 1) == doctest::Approx(3.0));
  CHECK(C2(2, 2) == doctest::Approx(2.0));
  CHECK(std::abs(C2(0, 1)) + std::abs(C2(1, 0)) == 0.0);

  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 5; ++trial) {
    MatX M(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) M(i, j) = 2.0 * uniform01(gen) - 1.0;
    Eigen::JacobiSVD<MatX> svd(M);
    VecX s = svd.singularValues();
    double top2 = s[0] * s[1];
    MatX C = compound_matrix<double>(M, 2);
    CHECK(op_norm(C) == doctest::Approx(top2).epsilon(1e-10));
    MatX N(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) N(i, j) = 2.0 * uniform01(gen) - 1.0;
    MatX lhs = compound_matrix<double>(MatX(M * N), 2);
    MatX rhs = compound_matrix<double>(M, 2) * compound_matrix<double>(N, 2);
    CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
  }
}

TEST_CASE("closed-form 2x2 singular values match Jacobi") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    MatX M(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) M(i, j) = 4.0 * uniform01(gen) - 2.0;
    if (trial % 5 == 0) M(1, 1) = M(0, 0);  // mix in near-degenerate gaps
    VecX fast = singular_values(M);
    Eigen::JacobiSVD<MatX> svd(M);
    VecX slow = svd.singularValues();
    CHECK(fast[0] == doctest::Approx(slow[0]).epsilon(1e-13));
    CHECK(fast[1] == doctest::Approx(slow[1]).epsilon(1e-13).scale(1.0));
  }

  MatX shear(2, 2);
  shear << 1.0, 1.0, 0.0, 1.0;
  VecX s = singular_values(shear);
  double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(s[0] == doctest::Approx(phi).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(1.0 / phi).epsilon(1e-14));
  CHECK(s[0] / s[1] == doctest::Approx(phi * phi).epsilon(1e-13));
}

TEST_CASE("exterior power evaluator has binomial dimension") {
  FourierCocycle D = make_const_diag({4.0, 3.0, 2.0, 1.0});
  auto E2 = exterior_power(D, 2);
  CHECK(E2.dim() == 6);
  MatX v = E2(pt1(0.0));
  CHECK(v(0, 0) == doctest::Approx(12.0));
  CHECK_THROWS_AS(exterior_power(D, 5), std::invalid_argument);
  CHECK_THROWS_AS(exterior_power(D, 0), std::invalid_argument);
}

TEST_CASE("determinant evaluator tracks the preset determinants") {
  FourierCocycle Sc = make_schrodinger(10.0, 0.7);
  auto detS = determinant_function(Sc);
  for (double x : {0.0, 0.2, 0.4, 0.8})
    CHECK(detS(pt1(x)) == doctest::Approx(1.0).epsilon(1e-14));

  FourierCocycle C = make_diag_cos();
  auto detC = determinant_function(C);
  CHECK(detC(pt1(0.1)) == doctest::Approx(2.0 * std::cos(two_pi * 0.1)).epsilon(1e-14));
  Eigen::VectorXd y(1);
  y[0] = 0.02;
  std::complex<double> z = detC(pt1(0.1), y);
  std::complex<double> arg = two_pi * std::complex<double>(0.1, 0.02);
  CHECK(std::abs(z - 2.0 * std::cos(arg)) <= 1e-13);
}

TEST_CASE("norm and adjugate bounds sandwich the constant diagonal") {
  FourierCocycle D = make_const_diag({2.0, 1.0});
  Frequency f = parse_frequency("golden");
  auto pts = sample_grid(1, 50, SampleScheme::random, 3);
  CramerReport rep = cramer_bounds_check(D, f, 20, pts);
  CHECK(rep.c_upper == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(rep.c_lower == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(rep.worst_upper_slack) <= 1e-12);
  CHECK(rep.worst_lower_slack == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(rep.samples_used == 50);
  CHECK(rep.samples_excluded == 0);

  FourierCocycle Sc = make_schrodinger(3.0);
  CramerReport srep = cramer_bounds_check(Sc, f, 25, pts);
  CHECK(srep.worst_upper_slack >= -1e-10);
  CHECK(srep.worst_lower_slack >= -1e-10);

  FourierCocycle Z = make_const_diag({0.0, 1.0});
  CHECK_THROWS_AS(cramer_bounds_check(Z, f, 5, pts), guard_error);
}

TEST_CASE("preset strings parse and reject malformed input") {
  FourierCocycle A = parse_preset("const-diag:2,1");
  CHECK(A.m == 2);
  CHECK(evaluate_real(A, pt1(0.5))(0, 0) == 2.0);

  FourierCocycle S10 = parse_preset("schrodinger:10");
  CHECK(evaluate_real(S10, pt1(0.0))(0, 0) == doctest::Approx(20.0));
  FourierCocycle S10E = parse_preset("schrodinger:10,0.5");
  CHECK(evaluate_real(S10E, pt1(0.0))(0, 0) == doctest::Approx(19.5));

  FourierCocycle DC2 = parse_preset("diag-cos:2");
  CHECK(DC2.d == 2);

  CHECK(parse_preset("rotation").m == 2);
  CHECK_THROWS_AS(parse_preset("rotation:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_preset("const-diag"), std::invalid_argument);
  CHECK_THROWS_AS(parse_preset("schrodinger:a"), std::invalid_argument);
  CHECK_THROWS_AS(parse_preset("schrodinger:1,2,3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_preset("diag-cos:1.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_preset("mystery"), std::invalid_argument);
}

TEST_CASE("cocycles survive a JSON round trip") {
  FourierCocycle Sc = make_schrodinger(2.5, 0.1, 0.07);
  FourierCocycle back = cocycle_from_json(json_cocycle(Sc));
  CHECK(back.d == Sc.d);
  CHECK(back.m == Sc.m);
  CHECK(back.rho == Sc.rho);
  REQUIRE(back.modes.size() == Sc.modes.size());
  for (double x : {0.0, 0.13, 0.71}) {
    MatX a = evaluate_real(Sc, pt1(x));
    MatX b = evaluate_real(back, pt1(x));
    CHECK((a - b).norm() == 0.0);
  }

  nlohmann::json bad = json_cocycle(Sc);
  bad["m"] = 0;
  CHECK_THROWS_AS(cocycle_from_json(bad), std::invalid_argument);
}

TEST_CASE("cocycle validation catches shape mismatches") {
  FourierCocycle A = make_rotation();
  A.modes[0].k = Eigen::VectorXi::Zero(2);
  CHECK_THROWS_AS(A.validate(), std::invalid_argument);

  FourierCocycle B = make_rotation();
  B.modes[0].c = MatX::Zero(3, 3);
  CHECK_THROWS_AS(B.validate(), std::invalid_argument);

  FourierCocycle C = make_rotation();
  C.rho = -0.1;
  CHECK_THROWS_AS(C.validate(), std::invalid_argument);
}
