#include "coopsense/waveform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "coopsense/kernels.hpp"

namespace coopsense {

void PulseSpec::validate() const {
  if (!(T > 0.0) || !(Ts > 0.0)) throw std::invalid_argument("PulseSpec: T and Ts must be positive");
  if (!(Tc > 0.0) || !(Td >= Tc)) throw std::invalid_argument("PulseSpec: need Td >= Tc > 0");
  if (!(E > 0.0)) throw std::invalid_argument("PulseSpec: E must be positive");
  const double ratio = Td / Ts;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
    throw std::invalid_argument("PulseSpec: Td/Ts must be a positive integer");
}

int PulseSpec::window_points() const {
  return static_cast<int>(std::llround(Td / Ts)) + 2;
}

PulseSpec default_pulse(double energy) {
  const double T = 2e-8;
  return PulseSpec{T, 1e-8, 3.0 * T, 4.0 * T, energy};
}

double sample_pulse(const PulseSpec& spec, double t) {
  const double amp = std::pow(2.0 / (spec.T * spec.T), 0.25);
  const double x = -std::numbers::pi * t * t / (spec.T * spec.T);
  return (x < -708.0) ? 0.0 : amp * std::exp(x);
}

double pulse_derivative(const PulseSpec& spec, double t) {
  return -(2.0 * std::numbers::pi * t / (spec.T * spec.T)) * sample_pulse(spec, t);
}

void sample_pulse_window(const PulseSpec& spec, long k_lo, std::size_t n,
                         double tau, double* out) {
  const double amp = std::pow(2.0 / (spec.T * spec.T), 0.25);
  const double scale = -std::numbers::pi / (spec.T * spec.T);
  // reuse out as the time-offset scratch
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<double>(k_lo + static_cast<long>(i)) * spec.Ts - tau;
  kernels::exp_scaled_sq(out, out, n, scale);
  for (std::size_t i = 0; i < n; ++i) out[i] *= amp;
}

void pulse_derivative_window(const PulseSpec& spec, long k_lo, std::size_t n,
                             double tau, double* out) {
  sample_pulse_window(spec, k_lo, n, tau, out);
  const double c = -2.0 * std::numbers::pi / (spec.T * spec.T);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(k_lo + static_cast<long>(i)) * spec.Ts - tau;
    out[i] *= c * t;
  }
}

}  // namespace coopsense
