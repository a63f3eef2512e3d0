#include "coopsense/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace coopsense::kernels {

namespace scalar {

void exp_scaled_sq(const double* t, double* out, std::size_t n, double scale) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(scale * t[i] * t[i]);
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sumsq(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

void complex_real_dot(const std::complex<double>* r, const double* s,
                      std::size_t n, double& re, double& im) {
  double ar = 0.0, ai = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ar += r[i].real() * s[i];
    ai += r[i].imag() * s[i];
  }
  re = ar;
  im = ai;
}

}  // namespace scalar

namespace {

Backend detect() {
  const char* env = std::getenv("COOPSENSE_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
#if defined(__x86_64__)
    if (std::strcmp(env, "avx2") == 0) return Backend::Avx2;
#endif
  }
#if defined(__x86_64__)
  if (__builtin_cpu_supports("avx2")) return Backend::Avx2;
#endif
  return Backend::Scalar;
}

}  // namespace

Backend active() {
  static const Backend b = detect();
  return b;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

void exp_scaled_sq(const double* t, double* out, std::size_t n, double scale) {
#if defined(__x86_64__)
  if (active() == Backend::Avx2) return avx2::exp_scaled_sq(t, out, n, scale);
#endif
  scalar::exp_scaled_sq(t, out, n, scale);
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(__x86_64__)
  if (active() == Backend::Avx2) return avx2::dot(a, b, n);
#endif
  return scalar::dot(a, b, n);
}

double sumsq(const double* a, std::size_t n) {
#if defined(__x86_64__)
  if (active() == Backend::Avx2) return avx2::sumsq(a, n);
#endif
  return scalar::sumsq(a, n);
}

void complex_real_dot(const std::complex<double>* r, const double* s,
                      std::size_t n, double& re, double& im) {
#if defined(__x86_64__)
  if (active() == Backend::Avx2) return avx2::complex_real_dot(r, s, n, re, im);
#endif
  scalar::complex_real_dot(r, s, n, re, im);
}

}  // namespace coopsense::kernels
