#pragma once

#include <complex>
#include <cstddef>

// Data-parallel inner loops used by the waveform/estimation hot paths.
// A scalar reference implementation always exists; an AVX2 variant is
// selected at runtime when the CPU supports it. Set COOPSENSE_KERNELS to
// "scalar" or "avx2" to force a backend.

namespace coopsense::kernels {

enum class Backend { Scalar, Avx2 };

Backend active();
const char* backend_name(Backend b);

// out[i] = exp(scale * t[i]^2)
void exp_scaled_sq(const double* t, double* out, std::size_t n, double scale);

double dot(const double* a, const double* b, std::size_t n);
double sumsq(const double* a, std::size_t n);

// re + i*im = sum_k r[k] * s[k] with r complex (interleaved), s real.
void complex_real_dot(const std::complex<double>* r, const double* s,
                      std::size_t n, double& re, double& im);

namespace scalar {
void exp_scaled_sq(const double* t, double* out, std::size_t n, double scale);
double dot(const double* a, const double* b, std::size_t n);
double sumsq(const double* a, std::size_t n);
void complex_real_dot(const std::complex<double>* r, const double* s,
                      std::size_t n, double& re, double& im);
}  // namespace scalar

#if defined(__x86_64__)
namespace avx2 {
void exp_scaled_sq(const double* t, double* out, std::size_t n, double scale);
double dot(const double* a, const double* b, std::size_t n);
double sumsq(const double* a, std::size_t n);
void complex_real_dot(const std::complex<double>* r, const double* s,
                      std::size_t n, double& re, double& im);
}  // namespace avx2
#endif

}  // namespace coopsense::kernels
