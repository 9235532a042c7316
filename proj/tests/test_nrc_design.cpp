#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nrc/nrc_design.hpp"
#include "oracles.hpp"

using nrc::Complex;

TEST_CASE("synthesize_nrc examples") {
  const auto plant = nrc::single_mode_plant(1.0, 2.0, 0.01);
  const auto t = nrc::tune_nrc(plant, {1.0, 3.0, std::nullopt});
  CHECK(t.k == doctest::Approx(1.0));
  CHECK(t.omega_a == doctest::Approx(6.0));
  const auto c = nrc::synthesize_nrc(plant, {1.0, 3.0, std::nullopt});
  CHECK(c.at(0.0).real() == doctest::Approx(-1.0));

  const auto two = nrc::two_mode_plant(2.0, 0.5, 1.0);
  CHECK(nrc::tune_nrc(two, {1.0, 3.0, std::nullopt}).k == doctest::Approx(2.0 / 3.0));

  const auto exp_plant = nrc::single_mode_plant(1.0 / 1.9095, 2.0 * std::numbers::pi * 739.0, 0.01);
  const auto te = nrc::tune_nrc(exp_plant, {1.0, 8.0, std::nullopt});
  CHECK(te.k == doctest::Approx(1.9095));
  CHECK(1.0 / te.k == doctest::Approx(0.5237).epsilon(1e-4));
  CHECK(te.omega_a == doctest::Approx(8.0 * 2.0 * std::numbers::pi * 739.0));
}

TEST_CASE("multi-mode corner uses the first mode") {
  auto spec = nrc::two_mode_plant(3.0, 0.2, 10.0);
  CHECK(nrc::tune_nrc(spec, {1.0, 2.0, std::nullopt}).omega_a == doctest::Approx(20.0));
}

TEST_CASE("gamma and n validation") {
  const auto plant = nrc::single_mode_plant(1.0, 1.0, 0.01);
  CHECK_THROWS_AS(nrc::synthesize_nrc(plant, {1.2, 3.0, std::nullopt}), nrc::Error);
  CHECK_THROWS_AS(nrc::synthesize_nrc(plant, {0.0, 3.0, std::nullopt}), nrc::Error);
  CHECK_THROWS_AS(nrc::synthesize_nrc(plant, {0.5, -1.0, std::nullopt}), nrc::Error);
  CHECK_THROWS_AS(nrc::synthesize_nrc(plant, {0.5, 1.0, 0.0}), nrc::Error);
  try {
    nrc::synthesize_nrc(plant, {1.2, 3.0, std::nullopt});
  } catch (const nrc::Error& e) {
    CHECK(std::string(e.what()).find("gamma must lie in (0,1]") == 0);
  }
  CHECK_NOTHROW(nrc::nrc_tf(1.2, 3.0));
}

TEST_CASE("constant magnitude and phase transition") {
  auto g = oracle::rng(8);
  for (int t = 0; t < 20; ++t) {
    const double k = oracle::uniform(g, 0.1, 5.0);
    const double wa = oracle::uniform(g, 1.0, 1e4);
    const auto c = nrc::nrc_tf(k, wa);
    for (double w : nrc::log_grid(1e-3 * wa, 1e3 * wa, 20)) {
      CHECK(std::abs(c.at(w)) == doctest::Approx(k).epsilon(1e-12));
    }
    CHECK(nrc::phase_deg(c.at(wa)) == doctest::Approx(90.0));
    CHECK(std::abs(std::abs(nrc::phase_deg(c.at(1e-3 * wa))) - 180.0) < 0.2);
    CHECK(std::abs(nrc::phase_deg(c.at(1e3 * wa))) < 0.2);
    const auto pz = nrc::poles_zeros(c);
    CHECK(pz.zeros[0].real() == doctest::Approx(wa));
    CHECK(pz.poles[0].real() == doctest::Approx(-wa));
  }
}

TEST_CASE("state-space realization") {
  const auto ss = nrc::nrc_state_space(1.0, 1.0);
  CHECK(ss.a == -1.0);
  CHECK(ss.b == 1.0);
  CHECK(ss.c == -2.0);
  CHECK(ss.d == 1.0);
  const auto s2 = nrc::nrc_state_space(0.5, 2.0);
  CHECK(s2.a == -2.0);
  CHECK(s2.c == -2.0);
  CHECK(s2.d == 0.5);
  auto g = oracle::rng(9);
  for (int t = 0; t < 50; ++t) {
    const double k = oracle::uniform(g, -3.0, 3.0);
    const double wa = oracle::uniform(g, 0.1, 1e3);
    const auto r = nrc::nrc_state_space(k, wa);
    const auto tf = nrc::nrc_tf(k, wa);
    for (double w : {0.01 * wa, wa, 7.0 * wa}) {
      const Complex direct = k * (Complex{0.0, w} - wa) / (Complex{0.0, w} + wa);
      CHECK(std::abs(r.at(w) - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
      CHECK(std::abs(tf.at(w) - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
    }
  }
  CHECK_THROWS_AS(nrc::nrc_state_space(1.0, 0.0), nrc::Error);
}

TEST_CASE("tamed NRC") {
  const double k = 1.3, wa = 3.0;
  const auto t = nrc::tame_nrc(k, wa, 5.0);
  CHECK(t.is_strictly_proper());
  CHECK(std::abs(t.at(1e6)) < 1e-4);
  CHECK(nrc::dc_gain(t) == doctest::Approx(-k));
  const auto t_far = nrc::tame_nrc(k, wa, 100.0);
  const auto raw = nrc::nrc_tf(k, wa);
  for (double w : nrc::log_grid(1e-2, 1.0, 20)) {
    CHECK(std::abs(t_far.at(w) - raw.at(w)) < 0.01 * std::abs(raw.at(w)));
  }
  CHECK_THROWS_AS(nrc::tame_nrc(k, wa, 0.0), nrc::Error);

  const auto plant = nrc::single_mode_plant(1.0, 1.0, 0.0);
  const auto tamed = nrc::synthesize_nrc(plant, {1.0, 3.0, 10.0});
  CHECK(tamed.den.degree() == 2);
}

TEST_CASE("min_damping_n") {
  CHECK(nrc::min_damping_n(0.0) == doctest::Approx(2.828427).epsilon(1e-6));
  CHECK(nrc::min_damping_n(0.01) == doctest::Approx(2.848427).epsilon(1e-6));
  CHECK(nrc::min_damping_n(0.0, 0.5) == doctest::Approx(1.414214).epsilon(1e-6));
  CHECK(nrc::min_damping_n(0.05) > nrc::min_damping_n(0.01));
  CHECK(nrc::min_damping_n(0.01, 0.9) > nrc::min_damping_n(0.01, 0.8));
  CHECK_THROWS_AS(nrc::min_damping_n(-0.1), nrc::Error);
  CHECK_THROWS_AS(nrc::min_damping_n(0.0, 1.1), nrc::Error);
}

TEST_CASE("practical gamma preset") { CHECK(nrc::kPracticalGamma == 0.999); }
