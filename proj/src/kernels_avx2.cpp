#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>

#include "coopsense/kernels.hpp"

// AVX2 variants. exp uses the Cephes rational approximation after
// range reduction by ln2; accuracy vs std::exp is ~1 ulp, checked by the
// backend-equivalence tests.

namespace coopsense::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// exp(x) for x in [-708, 708]; inputs below -708 must be pre-clamped
// (the caller maps them to 0 via mask).
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

  __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  __m256d rr = _mm256_mul_pd(r, r);
  __m256d px = _mm256_fmadd_pd(p0, rr, p1);
  px = _mm256_fmadd_pd(px, rr, p2);
  px = _mm256_mul_pd(px, r);
  __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
  qx = _mm256_fmadd_pd(qx, rr, q2);
  qx = _mm256_fmadd_pd(qx, rr, q3);
  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  // scale by 2^n through the exponent field
  __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(ni);
  __m256i pow2 =
      _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));
}

}  // namespace

void exp_scaled_sq(const double* t, double* out, std::size_t n, double scale) {
  const __m256d sc = _mm256_set1_pd(scale);
  const __m256d lo = _mm256_set1_pd(-708.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ti = _mm256_loadu_pd(t + i);
    __m256d x = _mm256_mul_pd(sc, _mm256_mul_pd(ti, ti));
    __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    __m256d e = exp_pd(_mm256_max_pd(x, lo));
    e = _mm256_andnot_pd(under, e);
    _mm256_storeu_pd(out + i, e);
  }
  for (; i < n; ++i) {
    double x = scale * t[i] * t[i];
    out[i] = (x < -708.0) ? 0.0 : std::exp(x);
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sumsq(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

void complex_real_dot(const std::complex<double>* r, const double* s,
                      std::size_t n, double& re, double& im) {
  const double* rp = reinterpret_cast<const double*>(r);
  __m256d acc = _mm256_setzero_pd();  // [re, im, re, im]
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d rv = _mm256_loadu_pd(rp + 2 * i);
    __m256d sv = _mm256_set_pd(s[i + 1], s[i + 1], s[i], s[i]);
    acc = _mm256_fmadd_pd(rv, sv, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double ar = lanes[0] + lanes[2];
  double ai = lanes[1] + lanes[3];
  for (; i < n; ++i) {
    ar += r[i].real() * s[i];
    ai += r[i].imag() * s[i];
  }
  re = ar;
  im = ai;
}

}  // namespace coopsense::kernels::avx2

#endif  // __x86_64__
