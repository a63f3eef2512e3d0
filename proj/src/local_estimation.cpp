#include "coopsense/local_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "coopsense/kernels.hpp"

namespace coopsense {

namespace {

// sub-range of the block where the pulse centered at tau is non-negligible
struct Clip {
  long k_lo;
  std::size_t count;
};

Clip clip_to_pulse(const SampleBlock& block, const PulseSpec& spec, double tau,
                   double half_width) {
  long lo = static_cast<long>(std::ceil((tau - half_width) / spec.Ts));
  long hi = static_cast<long>(std::floor((tau + half_width) / spec.Ts));
  lo = std::max(lo, block.k_lo);
  hi = std::min(hi, block.k_hi());
  if (hi < lo) return {0, 0};
  return {lo, static_cast<std::size_t>(hi - lo + 1)};
}

// |sum_k r_k s(kTs - tau)|^2 / sum_k s(kTs - tau)^2, with the correlation
// returned for the closed-form alpha
struct Score {
  double value = 0.0;
  std::complex<double> corr;
  double energy = 0.0;
};

Score evaluate(const SampleBlock& block, const PulseSpec& spec, double tau,
               std::vector<double>& scratch) {
  const Clip c = clip_to_pulse(block, spec, tau, 5.0 * spec.T);
  if (c.count == 0) return {};
  scratch.resize(c.count);
  sample_pulse_window(spec, c.k_lo, c.count, tau, scratch.data());
  const double energy = kernels::sumsq(scratch.data(), c.count);
  if (energy <= 0.0) return {};
  double re = 0.0, im = 0.0;
  kernels::complex_real_dot(block.v.data() + (c.k_lo - block.k_lo),
                            scratch.data(), c.count, re, im);
  return {(re * re + im * im) / energy, {re, im}, energy};
}

}  // namespace

LocalEstimate estimate_delay_coeff(const SampleBlock& samples,
                                   const PulseSpec& spec, double noise_var,
                                   const SearchRange& range) {
  if (samples.v.empty()) throw std::invalid_argument("estimate_delay_coeff: no samples");
  if (!(range.tau_hi > range.tau_lo))
    throw std::invalid_argument("estimate_delay_coeff: empty search range");

  std::vector<double> scratch;
  const double step = spec.Ts / 20.0;
  double best_tau = range.tau_lo;
  double best_val = -1.0;
  bool any_energy = false;
  for (double tau = range.tau_lo; tau <= range.tau_hi; tau += step) {
    const Score s = evaluate(samples, spec, tau, scratch);
    if (s.energy > 0.0) any_energy = true;
    if (s.value > best_val) {
      best_val = s.value;
      best_tau = tau;
    }
  }
  if (!any_energy)
    throw std::runtime_error("estimate_delay_coeff: zero template energy over the search range");

  // golden-section refinement around the best grid cell
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = best_tau - step, b = best_tau + step;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = evaluate(samples, spec, x1, scratch).value;
  double f2 = evaluate(samples, spec, x2, scratch).value;
  while (b - a > 1e-13) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = evaluate(samples, spec, x2, scratch).value;
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = evaluate(samples, spec, x1, scratch).value;
    }
  }

  LocalEstimate est;
  est.tau_hat = 0.5 * (a + b);
  const Score s = evaluate(samples, spec, est.tau_hat, scratch);
  if (s.energy <= 0.0)
    throw std::runtime_error("estimate_delay_coeff: zero template energy at optimum");
  est.alpha_hat = s.corr / (std::sqrt(spec.E) * s.energy);
  est.crb_tau = crb_tau(est.alpha_hat, noise_var, spec, est.tau_hat,
                        samples.k_lo, samples.v.size());
  est.crb_tau_hat = est.crb_tau;
  return est;
}

double crb_tau(std::complex<double> alpha, double noise_var,
               const PulseSpec& spec, double tau, long k_lo,
               std::size_t count) {
  const double mag2 = std::norm(alpha);
  if (!(mag2 > 0.0)) throw std::invalid_argument("crb_tau: zero coefficient");
  // s' is negligible beyond +-6T; clip the grid sum accordingly
  long lo = std::max(k_lo, static_cast<long>(std::ceil((tau - 6.0 * spec.T) / spec.Ts)));
  long hi = std::min(k_lo + static_cast<long>(count) - 1,
                     static_cast<long>(std::floor((tau + 6.0 * spec.T) / spec.Ts)));
  if (hi < lo) throw std::invalid_argument("crb_tau: grid does not cover the pulse");
  std::vector<double> d(static_cast<std::size_t>(hi - lo + 1));
  pulse_derivative_window(spec, lo, d.size(), tau, d.data());
  const double deriv_energy = kernels::sumsq(d.data(), d.size());
  return 1.0 / (2.0 * spec.E / noise_var * mag2 * deriv_energy);
}

}  // namespace coopsense
