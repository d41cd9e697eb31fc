#include "returnwalk/asymptotics.hpp"
#include "returnwalk/errors.hpp"
#include "returnwalk/lattice_model.hpp"
#include "support.hpp"

#include <doctest.h>

#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace rw;
using rwtest::exact_law;

TEST_SUITE("lattice_model") {

TEST_CASE("validate_law accepts normalized laws") {
  const StepLaw lazy = lazy_simple_walk(3);
  CHECK(lazy.dim() == 3);
  CHECK(lazy.exact());
  CHECK(lazy.atoms().size() == 7);
  CHECK(*lazy.atoms().front().exact + 0 >= 0);
  Rational total = 0;
  for (const auto& a : lazy.atoms()) total += *a.exact;
  CHECK(total == 1);
  CHECK(lazy.prob_at(Point{0, 0, 0}) == doctest::Approx(0.5));

  const StepLaw d = rwtest::float_law(1, {{{1}, 0.8}, {{-1}, 0.2}});
  CHECK(d.prob_at(Point{1}) == doctest::Approx(0.8));
}

TEST_CASE("validate_law rejects bad mass and names the field") {
  RawLaw raw{1, Family::FiniteAtoms, {{{1}, 0.8}, {{-1}, 0.3}}, 0.0};
  try {
    validate_law(raw);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("atoms") != std::string::npos);
    CHECK(std::string(e.what()).find("1.1") != std::string::npos);
  }
  RawLaw neg{1, Family::FiniteAtoms, {{{1}, Rational(3, 2)}, {{-1}, Rational(-1, 2)}}, 0.0};
  CHECK_THROWS_AS(validate_law(neg), InputError);
  RawLaw empty{2, Family::FiniteAtoms, {}, 0.0};
  CHECK_THROWS_AS(validate_law(empty), InputError);
  CHECK_THROWS_AS(make_power_tail(2.0), InputError);
}

TEST_CASE("rational probabilities survive the JSON round trip") {
  const StepLaw lazy = lazy_simple_walk(3);
  const StepLaw back = validate_law(law_from_json(law_to_json(lazy)));
  CHECK(back.fingerprint() == lazy.fingerprint());
  for (std::size_t i = 0; i < lazy.atoms().size(); ++i) CHECK(*back.atoms()[i].exact == *lazy.atoms()[i].exact);
  nlohmann::json bad = {{"dim", 1}, {"family", "finite-atoms"}, {"atoms", {{1, "x/2"}}}};
  try {
    law_from_json(bad);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("atoms[0]") != std::string::npos);
  }
}

TEST_CASE("char_fn examples") {
  const StepLaw lazy = lazy_simple_walk(3);
  const double zero[3] = {0, 0, 0};
  CHECK(char_fn(lazy, zero).real() == doctest::Approx(1.0).epsilon(1e-15));
  const double pis[3] = {std::numbers::pi, std::numbers::pi, std::numbers::pi};
  CHECK(std::abs(char_fn(lazy, pis)) < 1e-15);
  const StepLaw coin = simple_walk(1);
  const double pi1[1] = {std::numbers::pi};
  CHECK(char_fn(coin, pi1).real() == doctest::Approx(-1.0));
}

TEST_CASE("char_fn is bounded, real and even for symmetric laws") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> lam(-std::numbers::pi, std::numbers::pi);
  const StepLaw laws[] = {lazy_simple_walk(3), simple_walk(2), rwtest::drifted()};
  for (const auto& law : laws) {
    for (int k = 0; k < 200; ++k) {
      std::vector<double> l(static_cast<std::size_t>(law.dim())), m(l.size());
      for (std::size_t r = 0; r < l.size(); ++r) m[r] = -(l[r] = lam(gen));
      const auto z = char_fn(law, l);
      CHECK(std::abs(z) <= 1.0 + 1e-15);
      if (law.fingerprint() != rwtest::drifted().fingerprint()) {
        CHECK(std::abs(z.imag()) < 1e-14);
        CHECK(std::abs(z.real() - char_fn(law, m).real()) < 1e-14);
      }
    }
  }
}

// Independent oracle: partial sum of 2c sum_k cos(k t) k^{-1-alpha} up to K,
// plus the first Abel term -a_{K+1} sin((K+1/2)t) / (2 sin(t/2)).
// The rest is at most s K^{-s-1} / (2 sin^2(t/2)) with s = 1 + alpha.
TEST_CASE("power-tail char_fn matches direct summation") {
  for (double alpha : {0.7, 1.0, 1.5}) {
    const StepLaw law = make_power_tail(alpha);
    const double c = 1.0 / (2.0 * boost::math::zeta(1.0 + alpha));
    CHECK(law.tail_constant() == doctest::Approx(c).epsilon(1e-15));
    const double s = 1.0 + alpha;
    for (double t : {0.5, 1.0, 2.0, 3.0}) {
      const long kmax = 100000;
      long double acc = 0.0L;
      for (long k = kmax; k >= 1; --k)
        acc += std::cos(static_cast<long double>(k) * t) * std::pow(static_cast<long double>(k), -1.0L - alpha);
      const double h = std::sin(t / 2.0);
      const double dirichlet = std::sin((kmax + 0.5) * t) / (2.0 * h);
      acc -= std::pow(static_cast<long double>(kmax + 1), -1.0L - alpha) * dirichlet;
      const double direct = 2.0 * c * static_cast<double>(acc);
      const double tail = 2.0 * c * s * std::pow(static_cast<double>(kmax), -s - 1.0) / (2.0 * h * h);
      const double lam[1] = {t};
      CHECK(std::abs(char_fn(law, lam).real() - direct) <= tail + 1e-13);
    }
  }
}

TEST_CASE("power-tail scale constant") {
  const StepLaw law = make_power_tail(0.7);
  const double c = law.tail_constant();
  const double expect = std::numbers::pi * c / (std::tgamma(1.7) * std::sin(std::numbers::pi * 0.35));
  CHECK(law.power_tail()->scale_power() == doctest::Approx(expect).epsilon(1e-14));
  CHECK(law.power_tail()->truncation_bound() < 1e-14);
}

TEST_CASE("is_aperiodic") {
  CHECK_FALSE(is_aperiodic(simple_walk(3)));
  CHECK(is_aperiodic(lazy_simple_walk(3)));
  CHECK_FALSE(is_aperiodic(exact_law(1, {{{2}, "1/2"}, {{-2}, "1/2"}})));
  CHECK_FALSE(is_aperiodic(exact_law(1, {{{2}, "1/2"}, {{-3}, "1/2"}})));
  CHECK(is_aperiodic(exact_law(1, {{{2}, "1/3"}, {{-3}, "1/3"}, {{0}, "1/3"}})));
  CHECK(is_aperiodic(make_power_tail(0.7)));
  CHECK_FALSE(is_aperiodic(exact_law(2, {{{1, 1}, "1/2"}, {{-1, -1}, "1/4"}, {{1, -1}, "1/4"}})));
}

TEST_CASE("origin_reachable follows parity") {
  const StepLaw srw = simple_walk(3);
  CHECK(origin_reachable(srw, 2));
  CHECK_FALSE(origin_reachable(srw, 3));
  const StepLaw det = rwtest::deterministic_e1(1);
  CHECK_FALSE(origin_reachable(det, 5));
  const long m[1] = {5};
  CHECK(origin_reachable(det, 5, m));
}

TEST_CASE("hermite_basis of the checkerboard lattice") {
  const auto basis = hermite_basis({{1, 1}, {1, -1}, {2, 0}}, 2);
  REQUIRE(basis.size() == 2);
  CHECK(std::abs(basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0]) == 2);
}

TEST_CASE("classify examples") {
  NormingPlan gauss3{{2, 2, 2}, {}, 1.5};
  const WalkClass lazy = classify(lazy_simple_walk(3), gauss3);
  CHECK(lazy.transient);
  CHECK(lazy.aperiodic);
  CHECK(lazy.eta == doctest::Approx(1.5));
  REQUIRE(lazy.covariance);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK((*lazy.covariance)(i, j) == doctest::Approx(i == j ? 1.0 / 6.0 : 0.0));

  const WalkClass pt = classify(make_power_tail(0.7));
  CHECK(pt.transient);
  CHECK(pt.eta == doctest::Approx(1.0 / 0.7));

  const WalkClass coin = classify(simple_walk(1));
  CHECK_FALSE(coin.transient);
  CHECK(coin.eta == doctest::Approx(0.5));

  CHECK_FALSE(classify(lazy_simple_walk(2)).transient);
  CHECK_FALSE(rwtest::drifted().exact() == false);
  CHECK_FALSE(classify(rwtest::drifted()).drift_free);

  NormingPlan wrong{{1.5, 2, 2}, {}, 0};
  CHECK_THROWS_AS(classify(lazy_simple_walk(3), wrong), PreconditionError);
}

TEST_CASE("every d >= 3 law is transient") {
  CHECK(classify(simple_walk(3)).transient);
  CHECK(classify(exact_law(4, {{{0, 0, 0, 0}, "1/2"}, {{1, 0, 0, 0}, "1/4"}, {{-1, 0, 0, 0}, "1/4"}})).transient);
}

TEST_CASE("lazify") {
  const StepLaw lazy = lazify(simple_walk(3), Rational(1, 2));
  CHECK(lazy.fingerprint() == lazy_simple_walk(3).fingerprint());
  CHECK(is_aperiodic(lazy));
  for (int d = 1; d <= 4; ++d) CHECK(is_aperiodic(lazify(simple_walk(d), Rational(1, 3))));
  CHECK_THROWS_AS(lazify(simple_walk(3), Rational(0)), PreconditionError);
  CHECK_THROWS_AS(lazify(simple_walk(3), 1.0), PreconditionError);
}

}
