#pragma once

#include <cstddef>
#include <vector>

namespace coopsense {

// Lowpass-equivalent transmit pulse s(t) = (2/T^2)^0.25 * exp(-pi t^2 / T^2)
// with unit energy, plus its sampling grid parameters.
struct PulseSpec {
  double T;   // pulse width parameter [s]
  double Ts;  // sampling period [s]
  double Tc;  // effective pulse duration [s]
  double Td;  // observation window length [s]
  double E;   // transmit energy

  void validate() const;
  // number of samples kept in an observation window: Td/Ts + 2
  int window_points() const;
};

// §V defaults: T = 2e-8 s, Ts = 1/(2B) = 1e-8 s, Tc = 3T, Td = 4T.
PulseSpec default_pulse(double energy = 1.0);

double sample_pulse(const PulseSpec& spec, double t);

// d s(t)/dt = -(2 pi t / T^2) s(t)
double pulse_derivative(const PulseSpec& spec, double t);

// out[i] = s((k_lo + i) Ts - tau), i = 0..n-1
void sample_pulse_window(const PulseSpec& spec, long k_lo, std::size_t n,
                         double tau, double* out);

// out[i] = s'((k_lo + i) Ts - tau)
void pulse_derivative_window(const PulseSpec& spec, long k_lo, std::size_t n,
                             double tau, double* out);

}  // namespace coopsense
