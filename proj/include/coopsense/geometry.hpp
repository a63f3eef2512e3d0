#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "coopsense/rng.hpp"

namespace coopsense {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Vec2 a, Vec2 b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct Scene {
  Vec2 tx;
  std::vector<Vec2> rx;
  double c = kSpeedOfLight;
  double fc_ghz = 3.55;

  std::size_t n_receivers() const { return rx.size(); }
};

enum class TopologyKind { Circular, Linear };

// Circular: tx at the origin, receivers equally spaced on a circle of
// `radius`, target area-uniform in the disk.
// Linear: receivers on y=0 with uniform `spacing` centered at x=0, tx at
// (0, tx_standoff), target uniform on the segment y = target_standoff,
// |x| <= spacing*(n_receivers-1)/2.
struct TopologySpec {
  TopologyKind kind = TopologyKind::Circular;
  double radius = 500.0;          // circular [m]
  double spacing = 100.0;         // linear [m]
  double tx_standoff = 500.0;     // linear: tx to receiver line [m]
  double target_standoff = 300.0; // linear: target line to receiver line [m]
  int n_receivers = 6;

  double target_halfspan() const { return spacing * (n_receivers - 1) / 2.0; }
};

struct TargetTruth {
  Vec2 pos;
};

Scene make_scene(const TopologySpec& topo, double fc_ghz = 3.55);

double bistatic_delay(const Scene& scene, std::size_t n, Vec2 target);

// L = 32.4 + 20 log10(d[km]) + 20 log10(fc[GHz])   [dB]
double pathloss_db(double d_km, double fc_ghz);

// rho_n: amplitude loss composed over tx->target and target->rx legs
double amplitude_coefficient(const Scene& scene, std::size_t n, Vec2 target);

TargetTruth sample_target(const TopologySpec& topo, Rng& rng);

double rsnr_db(std::span<const double> snr_db);

// Representative target used for RSNR calibration (the circular support
// center coincides with the transmitter, so mid-radius is used there).
Vec2 nominal_target(const TopologySpec& topo);

struct DelaySupport {
  double tau_min;
  double tau_max;
};

// Range of bistatic delays over the topology's target support for
// receiver n (numerically scanned).
DelaySupport delay_support(const Scene& scene, const TopologySpec& topo,
                           std::size_t n);

}  // namespace coopsense
