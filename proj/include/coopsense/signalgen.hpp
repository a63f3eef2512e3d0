#pragma once

#include <complex>
#include <vector>

#include "coopsense/rng.hpp"
#include "coopsense/waveform.hpp"

namespace coopsense {

// Per-receiver channel state for one pulse.
struct ChannelRealization {
  std::complex<double> xi;     // unit-modulus reflection coefficient
  double rho = 0.0;            // amplitude path loss
  std::complex<double> alpha;  // rho * xi
  double tau = 0.0;            // true bistatic delay [s]
  double noise_var = 1.0;      // sigma_n^2
};

// Contiguous sample index range [k_lo, k_lo + count).
struct ObservationWindow {
  long k_lo = 0;
  int count = 0;

  long k_hi() const { return k_lo + count - 1; }
};

// Samples r(k Ts) for k in [k_lo, k_lo + v.size()).
struct SampleBlock {
  long k_lo = 0;
  std::vector<std::complex<double>> v;

  long k_hi() const { return k_lo + static_cast<long>(v.size()) - 1; }
};

// |xi| = 1, arg(xi) ~ Uniform[0, 2pi)
std::complex<double> draw_reflection(Rng& rng);

// r(k Ts) = sqrt(E) alpha s(k Ts - tau) + w(k Ts), w ~ CN(0, noise_var)
SampleBlock synthesize_received(const PulseSpec& spec,
                                const ChannelRealization& chan, long k_lo,
                                std::size_t count, Rng& rng);

// Window of Td/Ts + 2 indices around tau_hat (padded low-first when the
// natural ceil/floor range falls short).
ObservationWindow observation_window(double tau_hat, const PulseSpec& spec);

}  // namespace coopsense
