#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nrc/plant.hpp"
#include "oracles.hpp"

using nrc::Complex;
using nrc::Polynomial;

TEST_CASE("single mode plant") {
  const auto tf = nrc::build_plant(nrc::single_mode_plant(1.0, 1.0, 0.01));
  CHECK(tf.num == Polynomial{1.0});
  CHECK(tf.den == Polynomial{1.0, 0.02, 1.0});
  CHECK(tf.delay_s == 0.0);
}

TEST_CASE("undamped mode has poles on the imaginary axis") {
  const double w = 2.0 * std::numbers::pi * 739.0;
  const auto pz = nrc::poles_zeros(nrc::build_plant(nrc::single_mode_plant(1.0, w, 0.0)));
  REQUIRE(pz.poles.size() == 2);
  for (const auto& p : pz.poles) {
    CHECK(std::abs(p.real()) < 1e-10 * w);
    CHECK(std::abs(std::abs(p.imag()) - w) < 1e-10 * w);
  }
}

TEST_CASE("multi-mode dc gain and amplifier") {
  const auto two = nrc::two_mode_plant(2.0, 0.5, 1.0);
  CHECK(nrc::dc_gain(nrc::build_plant(two)) == doctest::Approx(1.5));
  auto amp = two;
  amp.gain = 0.8;
  amp.amp_corner_rad_s = 30.0;
  CHECK(nrc::dc_gain(nrc::build_plant(amp)) == doctest::Approx(0.8 * 1.5));
  CHECK(amp.dc_gain() == doctest::Approx(1.2));
}

TEST_CASE("plant frequency response equals the modal sum") {
  nrc::PlantSpec spec;
  spec.gain = 0.4;
  spec.modes = {{2.0 * std::numbers::pi * 739.0, 0.01, 1.0}, {2.0 * std::numbers::pi * 983.0, 0.02, 0.3}};
  spec.amp_corner_rad_s = 2.0 * std::numbers::pi * 5000.0;
  spec.delay_s = 150e-6;
  const auto tf = nrc::build_plant(spec);
  CHECK(tf.delay_s == 150e-6);
  for (double f : {10.0, 500.0, 739.0, 850.0, 983.0, 3000.0}) {
    const Complex s{0.0, 2.0 * std::numbers::pi * f};
    Complex sum = 0.0;
    for (const auto& m : spec.modes) {
      sum += m.weight * m.omega_rad_s * m.omega_rad_s / (s * s + 2.0 * m.zeta * m.omega_rad_s * s + m.omega_rad_s * m.omega_rad_s);
    }
    const Complex expect = spec.gain * sum * (*spec.amp_corner_rad_s / (s + *spec.amp_corner_rad_s)) *
                           std::exp(-s * spec.delay_s);
    CHECK(std::abs(tf.at(s.imag()) - expect) < 1e-9 * std::abs(expect));
  }
}

TEST_CASE("high-frequency roll-off") {
  auto spec = nrc::two_mode_plant(2.0, 0.5, 1.0);
  const auto tf = nrc::build_plant(spec);
  const double drop = nrc::mag_db(tf.at(100.0)) - nrc::mag_db(tf.at(1000.0));
  CHECK(drop >= 40.0 - 1e-6);
  spec.amp_corner_rad_s = 5.0;
  const auto tfa = nrc::build_plant(spec);
  const double drop_a = nrc::mag_db(tfa.at(1000.0)) - nrc::mag_db(tfa.at(10000.0));
  CHECK(drop_a >= 60.0 - 1e-3);
}

TEST_CASE("plant validation") {
  nrc::PlantSpec spec;
  CHECK_THROWS_AS(nrc::build_plant(spec), nrc::Error);
  spec.modes = {{1.0, 0.01, 1.0}};
  spec.gain = 0.0;
  CHECK_THROWS_AS(spec.validate(), nrc::Error);
  spec.gain = 1.0;
  spec.modes = {{2.0, 0.01, 1.0}, {1.0, 0.01, 0.5}};
  CHECK_THROWS_AS(spec.validate(), nrc::Error);
  spec.modes = {{1.0, 0.01, 0.5}};
  CHECK_THROWS_WITH_AS(spec.validate(), "plant.modes[0].weight must be 1", nrc::Error);
  spec.modes = {{1.0, -0.1, 1.0}};
  CHECK_THROWS_AS(spec.validate(), nrc::Error);
  spec.modes = {{1.0, 0.1, 1.0}};
  spec.delay_s = -1.0;
  CHECK_THROWS_AS(spec.validate(), nrc::Error);
}

TEST_CASE("scale_load") {
  const double w = 2.0 * std::numbers::pi * 739.0;
  const auto spec = nrc::single_mode_plant(0.5, w, 0.01);
  CHECK(nrc::scale_load(spec, 1.0) == spec);
  const auto half = nrc::scale_load(spec, 0.5);
  CHECK(half.modes[0].omega_rad_s == doctest::Approx(2.0 * std::numbers::pi * 369.5));
  CHECK(half.modes[0].zeta == 0.01);
  CHECK(nrc::dc_gain(nrc::build_plant(half)) == doctest::Approx(0.5));
  CHECK_THROWS_AS(nrc::scale_load(spec, 0.0), nrc::Error);
  CHECK_THROWS_AS(nrc::scale_load(spec, 1.5), nrc::Error);

  // Scaling commutes with building: G_eta(i eta w) = G(i w).
  const auto two = nrc::two_mode_plant(2.5, 0.4, w);
  const auto g = nrc::build_plant(two);
  const auto gl = nrc::build_plant(nrc::scale_load(two, 0.6));
  for (double x : {0.3, 0.9, 1.7, 3.1, 6.0}) {
    CHECK(std::abs(gl.at(0.6 * x * w) - g.at(x * w)) < 1e-9 * std::abs(g.at(x * w)));
  }
}

TEST_CASE("two-mode zero") {
  CHECK(nrc::two_mode_zero(2.0, 1.0, 1.0) == doctest::Approx(2.0 * std::sqrt(2.0 / 5.0)).epsilon(1e-12));
  CHECK(nrc::two_mode_zero(2.0, 1e-9, 1.0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(nrc::two_mode_zero(2.0, 1e9, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(nrc::two_mode_zero(1.0, 0.5, 1.0), nrc::Error);
  CHECK_THROWS_AS(nrc::two_mode_zero(2.0, 0.0, 1.0), nrc::Error);
}

TEST_CASE("two-mode zeros interlace the poles") {
  auto g = oracle::rng(3);
  for (int t = 0; t < 50; ++t) {
    const double alpha = oracle::uniform(g, 1.1, 4.0);
    const double beta = oracle::uniform(g, 0.05, 2.0);
    const auto pz = nrc::poles_zeros(nrc::build_plant(nrc::two_mode_plant(alpha, beta, 1.0)));
    REQUIRE(pz.zeros.size() == 2);
    const double wz = nrc::two_mode_zero(alpha, beta, 1.0);
    for (const auto& z : pz.zeros) {
      CHECK(std::abs(z.real()) < 1e-8);
      CHECK(std::abs(z.imag()) > 1.0);
      CHECK(std::abs(z.imag()) < alpha);
      CHECK(std::abs(z.imag()) == doctest::Approx(wz).epsilon(1e-8));
    }
  }
}
