#include "coopsense/signalgen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coopsense {

std::complex<double> draw_reflection(Rng& rng) {
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {std::cos(phase), std::sin(phase)};
}

SampleBlock synthesize_received(const PulseSpec& spec,
                                const ChannelRealization& chan, long k_lo,
                                std::size_t count, Rng& rng) {
  if (count == 0) throw std::invalid_argument("synthesize_received: empty range");
  SampleBlock block;
  block.k_lo = k_lo;
  block.v.resize(count);
  std::vector<double> s(count);
  sample_pulse_window(spec, k_lo, count, chan.tau, s.data());
  const double root_e = std::sqrt(spec.E);
  for (std::size_t i = 0; i < count; ++i)
    block.v[i] = root_e * chan.alpha * s[i] + rng.cnormal(chan.noise_var);
  return block;
}

ObservationWindow observation_window(double tau_hat, const PulseSpec& spec) {
  if (tau_hat < 0.0) throw std::invalid_argument("observation_window: negative delay");
  long lo = static_cast<long>(std::ceil((tau_hat - spec.Td / 2.0) / spec.Ts - 1e-9));
  long hi = static_cast<long>(std::floor((tau_hat + spec.Td / 2.0) / spec.Ts + 1e-9));
  const int target = spec.window_points();
  bool pad_low = true;
  while (hi - lo + 1 < target) {
    if (pad_low)
      --lo;
    else
      ++hi;
    pad_low = !pad_low;
  }
  return {lo, static_cast<int>(hi - lo + 1)};
}

}  // namespace coopsense
