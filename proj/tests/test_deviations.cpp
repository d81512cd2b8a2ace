#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qplab/deviations.hpp"

using namespace qplab;

TEST_CASE("constant diagonal has no deviations at any scale") {
  FourierCocycle D = make_const_diag({2.0, 1.0});
  Frequency f = parse_frequency("golden");
  auto pts = sample_grid(1, 40, SampleScheme::random, 19);
  DeviationMeasurement m = deviation_measure(D, f, 25, 1e-6, pts);
  CHECK(m.row.measure == 0.0);
  CHECK(m.L1 == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(m.row.samples == 40);
  CHECK(m.excluded == 0);

  // explicit reference level: every sample sits exactly 0.5 away
  DeviationMeasurement far = deviation_measure(D, f, 25, 0.4, pts, std::log(2.0) + 0.5);
  CHECK(far.row.measure == 1.0);
  DeviationMeasurement near = deviation_measure(D, f, 25, 0.6, pts, std::log(2.0) + 0.5);
  CHECK(near.row.measure == 0.0);

  CHECK_THROWS_AS(deviation_measure(D, f, 0, 0.1, pts), std::invalid_argument);
  CHECK_THROWS_AS(deviation_measure(D, f, 10, -0.1, pts), std::invalid_argument);
  CHECK_THROWS_AS(deviation_measure(D, f, 10, 0.1, std::vector<TorusPoint>{}),
                  std::invalid_argument);
}

TEST_CASE("rotations concentrate at zero exponent") {
  FourierCocycle R = make_rotation();
  Frequency f = parse_frequency("sqrt2");
  auto pts = sample_grid(1, 40, SampleScheme::random, 29);
  DeviationMeasurement m = deviation_measure(R, f, 50, 1e-6, pts);
  CHECK(m.row.measure == 0.0);
  CHECK(std::abs(m.L1) <= 1e-12);
}

TEST_CASE("a curve row equals the single measurement it aggregates") {
  FourierCocycle C = make_diag_cos();
  Frequency f = parse_frequency("golden");
  auto pts = sample_grid(1, 300, SampleScheme::random, 37);
  std::vector<long long> ns = {20, 40};
  std::vector<double> eps = {0.02, 0.1};
  auto rows = deviation_curve(C, f, ns, eps, pts);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    DeviationMeasurement m = deviation_measure(C, f, r.n, r.epsilon, pts);
    CHECK(r.measure == m.row.measure);
    CHECK(r.samples == m.row.samples);
  }
  CHECK(rows[0].n == 20);
  CHECK(rows[0].epsilon == 0.02);
  CHECK(rows[3].n == 40);
  CHECK(rows[3].epsilon == 0.1);
  // measure is monotone in epsilon at fixed n
  CHECK(rows[0].measure >= rows[1].measure);
  CHECK(rows[2].measure >= rows[3].measure);

  CHECK_THROWS_AS(deviation_curve(C, f, {}, eps, pts), std::invalid_argument);
  CHECK_THROWS_AS(deviation_curve(C, f, ns, {-1.0}, pts), std::invalid_argument);
}

TEST_CASE("stretched-exponential decay is recovered from synthetic rows") {
  std::vector<DeviationRow> rows;
  for (long long n : {25LL, 50LL, 100LL, 200LL, 400LL, 800LL}) {
    DeviationRow r;
    r.n = n;
    r.epsilon = 0.05;
    r.measure = std::exp(-std::sqrt(static_cast<double>(n)));
    r.samples = 100000;
    rows.push_back(r);
  }
  LdtFit fit = ldt_fit(rows);
  CHECK(fit.b_hat == doctest::Approx(0.5).epsilon(0.04));
  CHECK(fit.beta == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(fit.alpha) <= 0.1);
  CHECK(fit.r2 > 0.999);
  CHECK(fit.scales_used == 6);
  CHECK(fit.epsilon_used == 0.05);
  CHECK(!fit.below_resolution);
}

TEST_CASE("all-zero measures report below-resolution instead of a fake fit") {
  std::vector<DeviationRow> rows;
  for (long long n : {10LL, 20LL, 40LL}) {
    DeviationRow r;
    r.n = n;
    r.epsilon = 0.1;
    r.measure = 0.0;
    r.samples = 1000;
    rows.push_back(r);
  }
  LdtFit fit = ldt_fit(rows);
  CHECK(fit.below_resolution);
  CHECK(fit.b_hat == 0.0);

  rows[0].measure = 0.5;
  rows[1].measure = 0.25;
  CHECK_THROWS_AS(ldt_fit(rows), std::invalid_argument);  // only 2 usable scales
  CHECK_THROWS_AS(ldt_fit({}), std::invalid_argument);
}

TEST_CASE("the resolvable-epsilon fit reads off an exact power law") {
  std::vector<DeviationRow> rows;
  for (long long n : {16LL, 64LL, 256LL}) {
    double ninv = 1.0 / std::sqrt(static_cast<double>(n));
    DeviationRow common;
    common.n = n;
    common.epsilon = 1e-3;
    common.measure = 0.8 * std::exp(-0.1 * std::sqrt(static_cast<double>(n)));
    rows.push_back(common);
    DeviationRow at;
    at.n = n;
    at.epsilon = ninv;
    at.measure = 0.05;
    rows.push_back(at);
    DeviationRow below;
    below.n = n;
    below.epsilon = 0.5 * ninv;
    below.measure = 0.3;
    rows.push_back(below);
  }
  LdtFit fit = ldt_fit(rows, 0.1);
  CHECK(fit.epsilon_used == 1e-3);
  CHECK(fit.b_hat == doctest::Approx(0.5).epsilon(0.04));
  REQUIRE(fit.has_epsilon_fit);
  CHECK(fit.a_hat == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fit.C_hat == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("translation almost-invariance of the finite-scale average") {
  FourierCocycle D = make_const_diag({2.0, 1.0});
  Frequency f = parse_frequency("golden");
  auto pts = sample_grid(1, 100, SampleScheme::random, 41);
  AlmostInvarianceReport rep = almost_invariance_scan(D, f, 20, 1.0, pts);
  CHECK(rep.threshold == 0.0);
  CHECK(rep.C_hat == 0.0);
  CHECK(rep.violation_fraction == 0.0);
  CHECK(rep.calibration_count == 50);
  CHECK(rep.measurement_count == 50);

  FourierCocycle Sc = make_schrodinger(10.0);
  auto pts2 = sample_grid(1, 400, SampleScheme::random, 43);
  AlmostInvarianceReport srep = almost_invariance_scan(Sc, f, 30, 1.0, pts2);
  CHECK(srep.violation_fraction <= 0.1);
  CHECK(srep.threshold > 0.0);
  CHECK(srep.C_hat == doctest::Approx(srep.threshold * 30.0).epsilon(1e-12));

  CHECK_THROWS_AS(almost_invariance_scan(D, f, 0, 1.0, pts), std::invalid_argument);
  auto tiny = sample_grid(1, 3, SampleScheme::random, 1);
  CHECK_THROWS_AS(almost_invariance_scan(D, f, 10, 1.0, tiny), std::invalid_argument);
}

TEST_CASE("uniform measurements of the cosine diagonal") {
  FourierCocycle C = make_diag_cos();

  auto coarse = sample_grid(1, 4, SampleScheme::lattice);
  MeasurementReport m4 = uniform_measurement(C, coarse);
  CHECK(m4.samples_excluded == 2);  // the two determinant zeros of the lattice
  CHECK(m4.samples_used == 2);
  CHECK(m4.det_l2 == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  double sup = std::log(2.0 * std::cosh(two_pi * C.rho));
  CHECK(m4.sup_log_norm == doctest::Approx(sup).epsilon(1e-12));
  CHECK(m4.cramer_constant == doctest::Approx(2.0 * sup).epsilon(1e-12));

  auto fine = sample_grid(1, 65536, SampleScheme::lattice);
  MeasurementReport mf = uniform_measurement(C, fine);
  CHECK(mf.det_l2 == doctest::Approx(std::numbers::pi / std::sqrt(12.0)).epsilon(5e-3));

  FourierCocycle Z = make_const_diag({0.0, 1.0});
  CHECK_THROWS_AS(uniform_measurement(Z, coarse), guard_error);
  CHECK_THROWS_AS(uniform_measurement(C, std::vector<TorusPoint>{}),
                  std::invalid_argument);
}

TEST_CASE("deviations of the cosine diagonal decay with the scale") {
  FourierCocycle C = make_diag_cos();
  Frequency f = parse_frequency("golden");
  auto pts = sample_grid(1, 2000, SampleScheme::random, 47);
  auto rows = deviation_curve(C, f, {10, 40, 160}, {0.02}, pts);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].measure >= rows[1].measure);
  CHECK(rows[1].measure >= rows[2].measure);
  CHECK(rows[0].measure > 0.5);
  CHECK(rows[2].measure < 0.05);
}
