#include "returnwalk/errors.hpp"
#include "returnwalk/occupation.hpp"
#include "returnwalk/oracle.hpp"
#include "returnwalk/renewal.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>

using namespace rw;

TEST_SUITE("oracle") {

TEST_CASE("taboo_dp small tables") {
  const StepLaw lazy = lazy_simple_walk(3);
  const TabooTable t0 = taboo_dp(lazy, 0, Arithmetic::Rational);
  CHECK(t0.layer.exact_at(Point{0, 0, 0}) == 1);
  CHECK((*t0.survival_exact)[0] == 1);

  const TabooTable t1 = taboo_dp(lazy, 1, Arithmetic::Rational);
  CHECK(t1.layer.exact_at(Point{1, 0, 0}) == Rational(1, 12));
  CHECK(t1.layer.exact_at(Point{0, 0, 0}) == 0);
  CHECK((*t1.first_return_exact)[1] == Rational(1, 2));

  const TabooTable t2 = taboo_dp(lazy, 2, Arithmetic::Rational);
  CHECK((*t2.first_return_exact)[2] == Rational(1, 24));
  CHECK(t2.layer.exact_at(Point{0, 0, 0}) == 0);
}

TEST_CASE("taboo_dp invariants") {
  const StepLaw lazy = lazy_simple_walk(3);
  const TabooTable t = taboo_dp(lazy, 12, Arithmetic::Rational);
  const auto& sv = *t.survival_exact;
  for (std::size_t m = 1; m < sv.size(); ++m) {
    CHECK(sv[m] <= sv[m - 1]);
    CHECK(sv[m] + (*t.first_return_exact)[m] == sv[m - 1]);
  }
  // p_m as the one-step flux into the origin from the previous taboo layer.
  for (long m = 1; m <= 6; ++m) {
    const TabooTable prev = taboo_dp(lazy, m - 1, Arithmetic::Rational);
    Rational flux = 0;
    for (const auto& a : lazy.atoms()) {
      Point from(3);
      for (int r = 0; r < 3; ++r) from[static_cast<std::size_t>(r)] = -a.x[static_cast<std::size_t>(r)];
      flux += prev.layer.exact_at(from) * *a.exact;
    }
    CHECK(flux == (*t.first_return_exact)[static_cast<std::size_t>(m)]);
  }
}

TEST_CASE("rational chain equality") {
  for (const auto& law : {lazy_simple_walk(3), rwtest::drifted(), lazy_simple_walk(2)}) {
    const long n = 12;
    const TabooTable t = taboo_dp(law, n, Arithmetic::Rational);
    const TauDist r = invert_renewal(u_rational(law, n));
    for (long m = 1; m <= n; ++m) CHECK((*t.first_return_exact)[static_cast<std::size_t>(m)] == (*r.exact)[static_cast<std::size_t>(m)]);
    for (long m = 1; m <= 6; ++m) {
      const Enumerated e = exact_enumeration(law, m);
      CHECK(e.p == (*r.exact)[static_cast<std::size_t>(m)]);
    }
  }
}

TEST_CASE("survival decreases toward the escape probability") {
  const StepLaw lazy = lazy_simple_walk(3);
  const TabooTable t = taboo_dp(lazy, 60, Arithmetic::Float);
  for (std::size_t m = 1; m < t.survival.size(); ++m) CHECK(t.survival[m] <= t.survival[m - 1] + 1e-15);
  const double escape = 1.0 - 0.670266;
  CHECK(t.survival[60] > escape);
  CHECK(t.survival[60] - escape < 0.1);
  CHECK(t.survival[60] - escape < t.survival[30] - escape);
}

TEST_CASE("caps") {
  CHECK_THROWS_AS(taboo_dp(lazy_simple_walk(3), 30, Arithmetic::Rational), CapExceeded);
  CHECK_NOTHROW(taboo_dp(lazy_simple_walk(3), 24, Arithmetic::Rational));
  CHECK_THROWS_AS(exact_enumeration(lazy_simple_walk(3), 9), CapExceeded);
  CHECK_THROWS_AS(taboo_dp(make_power_tail(0.7), 4, Arithmetic::Float), PreconditionError);
  try {
    taboo_dp(lazy_simple_walk(3), 30, Arithmetic::Rational);
  } catch (const CapExceeded& e) {
    CHECK(std::string(e.what()).find("n = 24") != std::string::npos);
  }
}

TEST_CASE("exact_enumeration examples") {
  const Enumerated e2 = exact_enumeration(lazy_simple_walk(3), 2);
  CHECK(e2.u == Rational(7, 24));
  CHECK(e2.p == Rational(1, 24));
  const Enumerated e1 = exact_enumeration(lazy_simple_walk(3), 1);
  CHECK(e1.u == Rational(1, 2));
  CHECK(e1.p == e1.u);
  const Enumerated d2 = exact_enumeration(rwtest::drifted(), 2);
  CHECK(d2.u == Rational(8, 25));  // 2 * 0.8 * 0.2
  const USeq u = u_rational(lazy_simple_walk(3), 6);
  for (long n = 1; n <= 6; ++n) CHECK(exact_enumeration(lazy_simple_walk(3), n).u == (*u.exact)[static_cast<std::size_t>(n)]);
}

TEST_CASE("lemma1_check boundary of reach") {
  const StepLaw lazy = lazy_simple_walk(3);
  const long n = 6;
  const TabooTable t = taboo_dp(lazy, n, Arithmetic::Rational);
  const LayerTable q = position_dp(lazy, n, Arithmetic::Rational);
  const double p = 0.670266;
  const Lemma1Result r = lemma1_check(t, q, p, n, n);
  CHECK(r.rows.size() == 6);
  for (const auto& row : r.rows) CHECK(row.ratio == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.max_deviation == doctest::Approx(1.0 / (1.0 - p) - 1.0).epsilon(1e-12));
}

TEST_CASE("lemma1_check on a walk that never returns") {
  const StepLaw det = rwtest::deterministic_e1(2);
  const TabooTable t = taboo_dp(det, 8, Arithmetic::Float);
  const LayerTable q = position_dp(det, 8, Arithmetic::Float);
  const Lemma1Result r = lemma1_check(t, q, 0.0, 0, 8);
  CHECK(r.max_deviation == 0.0);
  CHECK(r.max_additive == 0.0);
}

TEST_CASE("lemma1_check errors") {
  const StepLaw lazy = lazy_simple_walk(3);
  const TabooTable t = taboo_dp(lazy, 4, Arithmetic::Float);
  const LayerTable q = position_dp(lazy, 4, Arithmetic::Float);
  CHECK_THROWS_AS(lemma1_check(t, q, 0.5, 5, 9), PreconditionError);
  CHECK_THROWS_AS(lemma1_check(t, position_dp(lazy, 3, Arithmetic::Float), 0.5, 0, 2), PreconditionError);
}

TEST_CASE("wilson interval") {
  const auto w = wilson(30, 100);
  CHECK(w.lo < 0.3);
  CHECK(w.hi > 0.3);
  const auto z = wilson(0, 1000);
  CHECK(z.lo == 0.0);
  CHECK(z.hi > 0.0);
  const double w1 = wilson(300, 1000).hi - wilson(300, 1000).lo;
  const double w4 = wilson(1200, 4000).hi - wilson(1200, 4000).lo;
  CHECK(w1 / w4 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("mc_paths") {
  const MCEstimate det = mc_paths(rwtest::deterministic_e1(3), 10, 5000, 1);
  for (long n = 1; n <= 10; ++n) {
    CHECK(det.hits_u[static_cast<std::size_t>(n)] == 0);
    CHECK(det.hits_p[static_cast<std::size_t>(n)] == 0);
  }
  const StepLaw lazy = lazy_simple_walk(3);
  const MCEstimate a = mc_paths(lazy, 8, 100000, 42);
  CHECK(a.u_ci[2].lo <= 7.0 / 24.0);
  CHECK(7.0 / 24.0 <= a.u_ci[2].hi);
  CHECK(a.p_ci[2].lo <= 1.0 / 24.0);
  CHECK(1.0 / 24.0 <= a.p_ci[2].hi);
  for (long n = 1; n <= 8; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    CHECK(a.u_ci[nn].lo <= a.u(n));
    CHECK(a.u(n) <= a.u_ci[nn].hi);
    CHECK(a.hits_p[nn] <= a.hits_u[nn]);
  }
  const MCEstimate b = mc_paths(lazy, 8, 100000, 42);
  CHECK(a.hits_u == b.hits_u);
  CHECK(a.hits_p == b.hits_p);
  setenv("RWALK_THREADS", "3", 1);
  const MCEstimate c = mc_paths(lazy, 8, 100000, 42);
  unsetenv("RWALK_THREADS");
  CHECK(a.hits_u == c.hits_u);
  CHECK(a.hits_p == c.hits_p);
  const MCEstimate d = mc_paths(lazy, 8, 100000, 43);
  CHECK(a.hits_u != d.hits_u);
  CHECK_THROWS_AS(mc_paths(lazy, 8, 0, 1), PreconditionError);
}

TEST_CASE("mc_paths power-tail sampler") {
  const StepLaw pt = make_power_tail(0.7);
  const MCEstimate m = mc_paths(pt, 16, 200000, 9);
  const USeq u = u_aliased(pt, 16, GridSpec{{1L << 22}});
  long inside = 0;
  for (long n = 1; n <= 16; ++n) {
    const auto nn = static_cast<std::size_t>(n);
    inside += m.u_ci[nn].lo <= u[n] && u[n] <= m.u_ci[nn].hi;
  }
  CHECK(inside >= 14);
}

}
