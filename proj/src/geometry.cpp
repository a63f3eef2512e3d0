#include "coopsense/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace coopsense {

Scene make_scene(const TopologySpec& topo, double fc_ghz) {
  if (topo.n_receivers < 1) throw std::invalid_argument("n_receivers must be >= 1");
  Scene scene;
  scene.fc_ghz = fc_ghz;
  if (topo.kind == TopologyKind::Circular) {
    scene.tx = {0.0, 0.0};
    for (int n = 0; n < topo.n_receivers; ++n) {
      const double a = 2.0 * std::numbers::pi * n / topo.n_receivers;
      scene.rx.push_back({topo.radius * std::cos(a), topo.radius * std::sin(a)});
    }
  } else {
    scene.tx = {0.0, topo.tx_standoff};
    const double x0 = -topo.spacing * (topo.n_receivers - 1) / 2.0;
    for (int n = 0; n < topo.n_receivers; ++n)
      scene.rx.push_back({x0 + topo.spacing * n, 0.0});
  }
  return scene;
}

double bistatic_delay(const Scene& scene, std::size_t n, Vec2 target) {
  if (n >= scene.rx.size()) throw std::out_of_range("receiver index out of range");
  return (distance(scene.tx, target) + distance(scene.rx[n], target)) / scene.c;
}

double pathloss_db(double d_km, double fc_ghz) {
  if (!(d_km > 0.0)) throw std::invalid_argument("pathloss_db: distance must be positive");
  return 32.4 + 20.0 * std::log10(d_km) + 20.0 * std::log10(fc_ghz);
}

double amplitude_coefficient(const Scene& scene, std::size_t n, Vec2 target) {
  if (n >= scene.rx.size()) throw std::out_of_range("receiver index out of range");
  const double d1 = distance(scene.tx, target);
  const double d2 = distance(scene.rx[n], target);
  if (d1 <= 0.0 || d2 <= 0.0) throw std::invalid_argument("amplitude_coefficient: zero-length leg");
  const double loss = pathloss_db(d1 / 1000.0, scene.fc_ghz) +
                      pathloss_db(d2 / 1000.0, scene.fc_ghz);
  return std::pow(10.0, -loss / 20.0);
}

TargetTruth sample_target(const TopologySpec& topo, Rng& rng) {
  if (topo.kind == TopologyKind::Circular) {
    // area-uniform over the disk
    const double r = topo.radius * std::sqrt(rng.uniform());
    const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return {{r * std::cos(a), r * std::sin(a)}};
  }
  const double h = topo.target_halfspan();
  return {{rng.uniform(-h, h), topo.target_standoff}};
}

double rsnr_db(std::span<const double> snr_db) {
  if (snr_db.empty()) throw std::invalid_argument("rsnr_db: empty list");
  double lin = 0.0;
  for (double s : snr_db) lin += std::pow(10.0, s / 10.0);
  return 10.0 * std::log10(lin);
}

Vec2 nominal_target(const TopologySpec& topo) {
  if (topo.kind == TopologyKind::Circular) return {topo.radius / 2.0, 0.0};
  return {0.0, topo.target_standoff};
}

DelaySupport delay_support(const Scene& scene, const TopologySpec& topo,
                           std::size_t n) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const int steps = 1024;
  if (topo.kind == TopologyKind::Circular) {
    // the delay sum is convex in the target position: extremes lie on the
    // disk boundary, except the minimum which is bounded by the tx-rx
    // baseline when the focal segment crosses the disk
    lo = distance(scene.tx, scene.rx[n]) / scene.c;
    for (int i = 0; i < steps; ++i) {
      const double a = 2.0 * std::numbers::pi * i / steps;
      const Vec2 t{topo.radius * std::cos(a), topo.radius * std::sin(a)};
      hi = std::max(hi, bistatic_delay(scene, n, t));
    }
  } else {
    const double h = topo.target_halfspan();
    for (int i = 0; i <= steps; ++i) {
      const Vec2 t{-h + 2.0 * h * i / steps, topo.target_standoff};
      const double tau = bistatic_delay(scene, n, t);
      lo = std::min(lo, tau);
      hi = std::max(hi, tau);
    }
  }
  return {lo, hi};
}

}  // namespace coopsense
