#pragma once

#include <complex>

#include "coopsense/signalgen.hpp"
#include "coopsense/waveform.hpp"

namespace coopsense {

struct LocalEstimate {
  double tau_hat = 0.0;
  std::complex<double> alpha_hat;
  double crb_tau = 0.0;      // CRB of the delay at the estimated point
  double crb_tau_hat = 0.0;  // same formula evaluated at tau_hat (prior width)
};

struct SearchRange {
  double tau_lo;
  double tau_hi;
};

// Joint ML of (tau, alpha) over the coarse capture block: closed-form
// least-squares alpha for fixed tau, grid scan at Ts/20 over `range`,
// golden-section refinement to 1e-13 s.
LocalEstimate estimate_delay_coeff(const SampleBlock& samples,
                                   const PulseSpec& spec, double noise_var,
                                   const SearchRange& range);

// CRB of the delay estimate: 1 / [ (2E/sigma^2) |alpha|^2 sum_k s'(kTs-tau)^2 ],
// summed over the grid [k_lo, k_lo+count).
double crb_tau(std::complex<double> alpha, double noise_var,
               const PulseSpec& spec, double tau, long k_lo,
               std::size_t count);

}  // namespace coopsense
