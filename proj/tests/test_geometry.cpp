#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "coopsense/geometry.hpp"

using namespace coopsense;

TEST_CASE("bistatic delay on a 3-4-5 construction") {
  Scene scene;
  scene.tx = {0.0, 0.0};
  scene.rx = {{600.0, 800.0}};
  // both legs are 500 m
  const Vec2 target{300.0, 400.0};
  CHECK(bistatic_delay(scene, 0, target) ==
        doctest::Approx(1000.0 / kSpeedOfLight).epsilon(1e-12));
  CHECK_THROWS(bistatic_delay(scene, 1, target));
}

TEST_CASE("free-space pathloss reference values") {
  CHECK(pathloss_db(1.0, 3.55) == doctest::Approx(43.4046).epsilon(1e-5));
  CHECK(pathloss_db(0.5, 3.55) == doctest::Approx(37.3840).epsilon(1e-5));
  // doubling the distance adds 20 log10(2) dB
  CHECK(pathloss_db(2.0, 3.55) - pathloss_db(1.0, 3.55) ==
        doctest::Approx(6.0206).epsilon(1e-4));
  CHECK_THROWS(pathloss_db(0.0, 3.55));
}

TEST_CASE("amplitude coefficient composes both legs") {
  Scene scene;
  scene.tx = {0.0, 0.0};
  scene.rx = {{2000.0, 0.0}};
  const Vec2 target{1000.0, 0.0};
  const double loss = 2.0 * pathloss_db(1.0, scene.fc_ghz);
  CHECK(amplitude_coefficient(scene, 0, target) ==
        doctest::Approx(std::pow(10.0, -loss / 20.0)).epsilon(1e-12));
}

TEST_CASE("received SNR combines in linear power") {
  const std::vector<double> two_zeros{0.0, 0.0};
  CHECK(rsnr_db(two_zeros) == doctest::Approx(3.0103).epsilon(1e-4));
  const std::vector<double> six_zeros(6, 0.0);
  CHECK(rsnr_db(six_zeros) == doctest::Approx(7.7815).epsilon(1e-4));
  const std::vector<double> one{-3.0};
  CHECK(rsnr_db(one) == doctest::Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("circular scene layout") {
  TopologySpec topo;
  const Scene scene = make_scene(topo);
  REQUIRE(scene.rx.size() == 6);
  CHECK(scene.tx.x == 0.0);
  CHECK(scene.tx.y == 0.0);
  for (const Vec2& r : scene.rx)
    CHECK(std::hypot(r.x, r.y) == doctest::Approx(topo.radius).epsilon(1e-12));
  CHECK(nominal_target(topo).x == doctest::Approx(topo.radius / 2.0));
  CHECK(nominal_target(topo).y == 0.0);
}

TEST_CASE("linear scene layout") {
  TopologySpec topo;
  topo.kind = TopologyKind::Linear;
  const Scene scene = make_scene(topo);
  REQUIRE(scene.rx.size() == 6);
  CHECK(topo.target_halfspan() == doctest::Approx(250.0));
  double min_x = 1e9, max_x = -1e9;
  for (const Vec2& r : scene.rx) {
    CHECK(r.y == 0.0);
    min_x = std::min(min_x, r.x);
    max_x = std::max(max_x, r.x);
  }
  CHECK(min_x == doctest::Approx(-250.0));
  CHECK(max_x == doctest::Approx(250.0));
  CHECK(scene.tx.x == 0.0);
  CHECK(scene.tx.y == doctest::Approx(topo.tx_standoff));
  CHECK(nominal_target(topo).y == doctest::Approx(topo.target_standoff));
}

TEST_CASE("target sampling matches the declared distributions") {
  TopologySpec topo;
  Rng rng(99);
  // area-uniform disk: E[r^2] = R^2/2
  double mean_r2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Vec2 p = sample_target(topo, rng).pos;
    const double r2 = p.x * p.x + p.y * p.y;
    CHECK(r2 <= topo.radius * topo.radius + 1e-9);
    mean_r2 += r2;
  }
  mean_r2 /= n;
  CHECK(mean_r2 == doctest::Approx(topo.radius * topo.radius / 2.0).epsilon(0.02));

  topo.kind = TopologyKind::Linear;
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p = sample_target(topo, rng).pos;
    CHECK(p.y == doctest::Approx(topo.target_standoff));
    CHECK(std::abs(p.x) <= topo.target_halfspan() + 1e-9);
  }
}

TEST_CASE("delay support covers sampled targets") {
  for (TopologyKind kind : {TopologyKind::Circular, TopologyKind::Linear}) {
    TopologySpec topo;
    topo.kind = kind;
    const Scene scene = make_scene(topo);
    Rng rng(5);
    for (std::size_t n = 0; n < scene.n_receivers(); ++n) {
      const DelaySupport sup = delay_support(scene, topo, n);
      CHECK(sup.tau_min < sup.tau_max);
      for (int i = 0; i < 500; ++i) {
        const double tau = bistatic_delay(scene, n, sample_target(topo, rng).pos);
        CHECK(tau >= sup.tau_min - 1e-12);
        CHECK(tau <= sup.tau_max + 1e-12);
      }
    }
  }
}
