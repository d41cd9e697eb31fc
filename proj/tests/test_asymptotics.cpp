#include "returnwalk/asymptotics.hpp"
#include "returnwalk/errors.hpp"
#include "returnwalk/occupation.hpp"
#include "returnwalk/renewal.hpp"
#include "support.hpp"

#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace rw;

namespace {

// Aperiodic law on Z with unit variance: 0 w.p. 1/4, +-1 w.p. 1/3, +-2 w.p. 1/24.
StepLaw unit_variance_1d() {
  return rwtest::exact_law(1, {{{0}, "1/4"}, {{1}, "1/3"}, {{-1}, "1/3"}, {{2}, "1/24"}, {{-2}, "1/24"}});
}

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("make_norming") {
  const StepLaw lazy = lazy_simple_walk(3);
  const NormingPlan p3 = make_norming(lazy, classify(lazy));
  CHECK(p3.eta == doctest::Approx(1.5));
  CHECK(p3.C(100) == doctest::Approx(1000.0));
  CHECK(p3.c(100, 1) == doctest::Approx(10.0));
  const StepLaw pt = make_power_tail(0.7);
  const NormingPlan p1 = make_norming(pt, classify(pt));
  CHECK(p1.eta == doctest::Approx(10.0 / 7.0));
  CHECK(p1.C(128) == doctest::Approx(std::pow(128.0, 10.0 / 7.0)));
  CHECK(p1.scale[0] == doctest::Approx(std::pow(pt.power_tail()->scale_power(), 1.0 / 0.7)));
  CHECK_THROWS_AS(make_norming(rwtest::drifted(), classify(rwtest::drifted())), PreconditionError);
  const StepLaw l2 = lazy_simple_walk(2);
  const NormingPlan p2 = make_norming(l2, classify(l2));
  CHECK(p2.eta == doctest::Approx(1.0));
  CHECK_FALSE(classify(l2).transient);
  double prev = 0.0;
  for (long n = 1; n <= 1000; ++n) {
    CHECK(p1.C(n) >= prev);
    prev = p1.C(n);
  }
}

TEST_CASE("gaussian_g0") {
  CHECK(gaussian_g0(Eigen::MatrixXd::Identity(3, 3) / 6.0) ==
        doctest::Approx(std::pow(6.0 / (2 * std::numbers::pi), 1.5)).epsilon(1e-14));
  CHECK(gaussian_g0(Eigen::MatrixXd::Identity(3, 3) / 6.0) == doctest::Approx(0.933162).epsilon(1e-6));
  CHECK(gaussian_g0(Eigen::MatrixXd::Identity(1, 1)) == doctest::Approx(0.398942).epsilon(1e-6));
  Eigen::MatrixXd sing(2, 2);
  sing << 1, 1, 1, 1;
  CHECK_THROWS_AS(gaussian_g0(sing), PreconditionError);
  Eigen::MatrixXd indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(gaussian_g0(indef), PreconditionError);
}

TEST_CASE("gaussian_g0 is invariant under rotation") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(3, 3), g(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = z(gen), g(i, j) = z(gen);
    const Eigen::MatrixXd b = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::MatrixXd rotated = q * b * q.transpose();
    rotated = 0.5 * (rotated + rotated.transpose());
    CHECK(std::abs(gaussian_g0(rotated) - gaussian_g0(b)) <= 1e-12 * gaussian_g0(b));
  }
}

TEST_CASE("product_stable_g0") {
  CHECK(product_stable_g0(1.0, 1.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(product_stable_g0(2.0, 1.0) == doctest::Approx(0.5 / std::sqrt(std::numbers::pi)).epsilon(1e-15));
  // Normal with variance 2 has density 1/sqrt(4 pi) at 0.
  CHECK(product_stable_g0(2.0, 1.0) == doctest::Approx(1.0 / std::sqrt(4 * std::numbers::pi)).epsilon(1e-15));
  boost::math::quadrature::exp_sinh<double> integrator;
  for (double alpha : {0.7, 1.3}) {
    for (double sigma : {1.0, 0.92}) {
      const double q =
          integrator.integrate([&](double t) { return std::exp(-std::pow(sigma * t, alpha)); }) / std::numbers::pi;
      CHECK(product_stable_g0(alpha, sigma) == doctest::Approx(q).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(product_stable_g0(0.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(product_stable_g0(2.5, 1.0), PreconditionError);
  CHECK_THROWS_AS(product_stable_g0(0.7, 0.0), PreconditionError);
}

TEST_CASE("aitken") {
  const double l = 0.7, c = 0.3, r = 0.5;
  const auto a = aitken(l + c, l + c * r, l + c * r * r);
  REQUIRE(a);
  CHECK(*a == doctest::Approx(l).epsilon(1e-14));
  CHECK_FALSE(aitken(1.0, 2.0, 1.5));
  CHECK_FALSE(aitken(1.0, 2.0, 4.0));
  CHECK(*aitken(3.0, 3.0, 3.0) == 3.0);
}

TEST_CASE("extrapolate_ladder picks the largest contracting triple") {
  std::vector<double> seq(65, 0.0);
  std::vector<bool> use(65, true);
  for (long n = 1; n <= 64; ++n) seq[static_cast<std::size_t>(n)] = 2.0 - 1.0 / static_cast<double>(n);
  seq[64] = 5.0;  // a spoiled top value
  const Extrapolation ex = extrapolate_ladder(seq, use, 64, 2);
  CHECK(ex.accelerated);
  CHECK(ex.top == 32);
  CHECK(ex.limit == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("empirical_g0 on the lazy walk") {
  const StepLaw lazy = lazy_simple_walk(3);
  const USeq u = u_aliased(lazy, 512, grid_for_target(lazy, 512, 1e-12));
  const NormingPlan plan = make_norming(lazy, classify(lazy));
  const EmpiricalG0 e = empirical_g0(u, plan);
  CHECK(std::abs(e.g0 - 0.933162) <= 0.03 * 0.933162);
  CHECK(e.extrapolation.ladder.size() >= 3);
}

TEST_CASE("empirical_g0 on a deterministic law is degenerate") {
  const USeq u = u_exact(rwtest::deterministic_e1(1), 64);
  const NormingPlan plan{{2.0}, {1.0}, 0.5};
  const EmpiricalG0 e = empirical_g0(u, plan);
  CHECK(e.g0 == 0.0);
  CHECK(e.extrapolation.degenerate);
  CHECK_THROWS_AS(empirical_g0(u_exact(lazy_simple_walk(3), 8), plan), PreconditionError);
}

TEST_CASE("empirical_g0 in d = 1: Theorem-1 check without transience") {
  const StepLaw law = unit_variance_1d();
  const WalkClass cls = classify(law);
  CHECK_FALSE(cls.transient);
  CHECK((*cls.covariance)(0, 0) == doctest::Approx(1.0));
  const NormingPlan plan = make_norming(law, cls);
  const EmpiricalG0 e = empirical_g0(u_exact(law, 4096), plan);
  CHECK(e.g0 == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-4));
  // The simple walk is 2-periodic: on its support times the local limit doubles.
  const StepLaw srw = simple_walk(1);
  const EmpiricalG0 s = empirical_g0(u_exact(srw, 4096), make_norming(srw, classify(srw)));
  CHECK(s.g0 == doctest::Approx(2.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-4));
}

TEST_CASE("acceleration keeps the direction of the raw trend") {
  auto check_direction = [](const Extrapolation& ex) {
    const auto& l = ex.ladder;
    REQUIRE(l.size() >= 3);
    if (!ex.accelerated) return;
    std::size_t i = 0;
    while (l[i].n != ex.top) ++i;
    const double step = l[i].value - l[i - 1].value;
    CHECK((ex.limit - l[i].value) * step >= 0.0);
  };
  for (const auto& law : {lazy_simple_walk(3), simple_walk(3), unit_variance_1d()}) {
    const USeq u = u_exact(law, 64);
    check_direction(empirical_g0(u, make_norming(law, classify(law))).extrapolation);
  }
  const StepLaw pt = make_power_tail(0.7);
  check_direction(empirical_g0(u_aliased(pt, 512, GridSpec{{1L << 16}}), make_norming(pt, classify(pt))).extrapolation);
}

TEST_CASE("predict_pn") {
  const NormingPlan plan{{2, 2, 2}, {}, 1.5};
  CHECK(predict_pn(0.0, 0.9, plan, 16) == doctest::Approx(0.9 / 64.0));
  CHECK(predict_pn(0.3, 0.9, plan, 1) == doctest::Approx(0.49 * 0.9));
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u01(0.0, 0.99);
  for (int k = 0; k < 100; ++k) {
    const double p = u01(gen), g = 0.1 + u01(gen);
    const long n = 1 + k * 7;
    CHECK(predict_pn(p, 2 * g, plan, n) == doctest::Approx(2 * predict_pn(p, g, plan, n)).epsilon(1e-15));
    CHECK(predict_pn(p, g, plan, n) == doctest::Approx((1 - p) * (1 - p) * predict_pn(0.0, g, plan, n)).epsilon(1e-15));
  }
  const double p = 0.6703;
  CHECK(predict_pn(p, 0.933162, plan, 100) == doctest::Approx((1 - p) * (1 - p) * 0.933162e-3));
  CHECK_THROWS_AS(predict_pn(1.0, 0.9, plan, 4), PreconditionError);
}

TEST_CASE("ratio_diagnostics on the synthetic fixed point") {
  const double q = 0.5, k = (1 - q) * (1 - q);
  const long n_max = 64;
  std::vector<double> u(n_max + 1, 0.0), p(n_max + 1, 0.0);
  u[0] = 1.0;
  p[1] = u[1] = 0.1;
  for (long n = 2; n <= n_max; ++n) {
    double s = 0.0;
    for (long j = 1; j < n; ++j) s += p[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(n - j)];
    u[static_cast<std::size_t>(n)] = s / (1.0 - k);
    p[static_cast<std::size_t>(n)] = k * u[static_cast<std::size_t>(n)];
  }
  USeq us;
  us.values = u;
  us.error.assign(u.size(), 0.0);
  const TauDist t = make_tau(std::vector<double>(p.begin() + 1, p.end()));
  const TheoremReport rep = ratio_diagnostics(t, us, q);
  CHECK(rep.target == k);
  CHECK(rep.ratio_gap <= 1e-14);
  for (const auto& pt : rep.ratio.ladder) CHECK(pt.value == doctest::Approx(k).epsilon(1e-14));
}

TEST_CASE("ratio_diagnostics refuses an all-zero ladder") {
  const USeq u = u_exact(rwtest::deterministic_e1(1), 64);
  CHECK_THROWS_AS(ratio_diagnostics(invert_renewal(u), u, 0.0), PreconditionError);
}

TEST_CASE("ratio_diagnostics skips parity zeros") {
  const StepLaw srw = simple_walk(3);
  const USeq u = u_exact(srw, 63);
  const TheoremReport rep = ratio_diagnostics(invert_renewal(u), u, 0.34);
  for (const auto& pt : rep.ratio.ladder) CHECK(pt.n % 2 == 0);
}

TEST_CASE("smoothness_check") {
  const double r = 0.9;
  std::vector<double> p;
  for (long n = 1; n <= 40; ++n) p.push_back((1 - r) * std::pow(r, n));
  const Smoothness s = smoothness_check(make_tau(p), 10, 40);
  CHECK_FALSE(s.skipped);
  CHECK(s.deviation == doctest::Approx(1 - r).epsilon(1e-12));
  p[20] = 0.0;
  CHECK(smoothness_check(make_tau(p), 10, 40).skipped);
}

}
