// AVX2/FMA variants of the arithmetic kernels. exp and cos use the usual
// Cody-Waite range reduction plus Taylor polynomials whose truncation error
// sits below 1e-14; lanes outside the reduction range fall back to libm.

#include "bayesqp/simd/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace bayesqp::simd::detail {

namespace {

constexpr double kMagic = 6755399441055744.0;  // 2^52 + 2^51, int extraction

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// exp(x) for the four lanes. Valid for |x| <= 708; the caller patches more
// extreme inputs with libm.
inline __m256d exp4(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

  const __m256d xc = _mm256_max_pd(_mm256_min_pd(x, _mm256_set1_pd(708.0)),
                                   _mm256_set1_pd(-708.0));
  __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, xc);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  // Taylor series of exp on |r| <= ln2/2, through r^13/13!.
  __m256d p = _mm256_set1_pd(1.6059043836821613e-10);  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.08767569878680989792e-09));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.50521083854417187751e-08));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.75573192239858906526e-07));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.75573192239858924161e-06));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.48015873015873015873e-05));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.98412698412698412698e-04));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.38888888888888894068e-03));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(8.33333333333333321769e-03));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(4.16666666666666666435e-02));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.66666666666666666667e-01));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // Scale by 2^n through the exponent bits; n is within [-1022, 1022] here.
  const __m256i magic_bits = _mm256_set1_epi64x(0x4338000000000000LL);
  const __m256i ni = _mm256_sub_epi64(
      _mm256_castpd_si256(_mm256_add_pd(n, _mm256_set1_pd(kMagic))),
      magic_bits);
  const __m256i exp_bits =
      _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(exp_bits));
}

// cos(x) for the four lanes; accurate for |x| <= 1e6 (the caller patches
// larger inputs with libm).
inline __m256d cos4(__m256d x) {
  const __m256d two_over_pi = _mm256_set1_pd(0.63661977236758134308);
  const __m256d pio2_hi = _mm256_set1_pd(1.57079632673412561417e+00);
  const __m256d pio2_mid = _mm256_set1_pd(6.07710050650619224932e-11);
  const __m256d pio2_lo = _mm256_set1_pd(2.02226624879595063154e-21);

  __m256d k = _mm256_round_pd(_mm256_mul_pd(x, two_over_pi),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, pio2_hi, x);
  r = _mm256_fnmadd_pd(k, pio2_mid, r);
  r = _mm256_fnmadd_pd(k, pio2_lo, r);
  const __m256d r2 = _mm256_mul_pd(r, r);

  // cos on |r| <= pi/4 (fdlibm __kernel_cos coefficients).
  __m256d pc = _mm256_set1_pd(-1.13596475577881948265e-11);
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(2.08757232129817482790e-09));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(-2.75573143513906633035e-07));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(2.48015872894767294178e-05));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(-1.38888888888741095749e-03));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(4.16666666666666019037e-02));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(-0.5));
  pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(1.0));

  // sin on |r| <= pi/4 (fdlibm __kernel_sin coefficients).
  __m256d ps = _mm256_set1_pd(1.58969099521155010221e-10);
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(-2.50507602534068634195e-08));
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(2.75573137070700676789e-06));
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(-1.98412698298579493134e-04));
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(8.33333333332248946124e-03));
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(-1.66666666666666324348e-01));
  ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(1.0));
  ps = _mm256_mul_pd(ps, r);

  // Quadrant q = k mod 4: 0 -> +cos, 1 -> -sin, 2 -> -cos, 3 -> +sin.
  const __m256i ki =
      _mm256_castpd_si256(_mm256_add_pd(k, _mm256_set1_pd(kMagic)));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i use_sin =
      _mm256_cmpeq_epi64(_mm256_and_si256(ki, one), one);
  const __m256i negate = _mm256_cmpeq_epi64(
      _mm256_and_si256(_mm256_add_epi64(ki, one), _mm256_set1_epi64x(2)),
      _mm256_set1_epi64x(2));

  __m256d result =
      _mm256_blendv_pd(pc, ps, _mm256_castsi256_pd(use_sin));
  const __m256d signbit = _mm256_set1_pd(-0.0);
  result = _mm256_xor_pd(
      result, _mm256_and_pd(_mm256_castsi256_pd(negate), signbit));
  return result;
}

void scaled_sqdist_avx2(const double* q, const double* X, const double* w,
                        int d, int n, double* out) {
  for (int j = 0; j < n; ++j) {
    const double* x = X + static_cast<long>(j) * d;
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= d; i += 4) {
      const __m256d diff =
          _mm256_sub_pd(_mm256_loadu_pd(q + i), _mm256_loadu_pd(x + i));
      const __m256d wd = _mm256_mul_pd(_mm256_loadu_pd(w + i), diff);
      acc = _mm256_fmadd_pd(wd, diff, acc);
    }
    double sum = hsum(acc);
    for (; i < d; ++i) {
      const double diff = q[i] - x[i];
      sum += w[i] * diff * diff;
    }
    out[j] = sum;
  }
}

void exp_inplace_avx2(double* x, int n) {
  const __m256d range = _mm256_set1_pd(708.0);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xi = _mm256_loadu_pd(x + i);
    const __m256d big = _mm256_cmp_pd(
        _mm256_andnot_pd(_mm256_set1_pd(-0.0), xi), range, _CMP_GT_OQ);
    __m256d e = exp4(xi);
    if (_mm256_movemask_pd(big) != 0) {
      alignas(32) double xs[4], es[4];
      _mm256_store_pd(xs, xi);
      _mm256_store_pd(es, e);
      const int mask = _mm256_movemask_pd(big);
      for (int lane = 0; lane < 4; ++lane) {
        if (mask & (1 << lane)) es[lane] = std::exp(xs[lane]);
      }
      e = _mm256_load_pd(es);
    }
    _mm256_storeu_pd(x + i, e);
  }
  for (; i < n; ++i) x[i] = std::exp(x[i]);
}

double weighted_cos_sum_avx2(const double* z, const double* w, int n) {
  const __m256d range = _mm256_set1_pd(1e6);
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d zi = _mm256_loadu_pd(z + i);
    const __m256d big = _mm256_cmp_pd(
        _mm256_andnot_pd(_mm256_set1_pd(-0.0), zi), range, _CMP_GT_OQ);
    __m256d c = cos4(zi);
    if (_mm256_movemask_pd(big) != 0) {
      alignas(32) double zs[4], cs[4];
      _mm256_store_pd(zs, zi);
      _mm256_store_pd(cs, c);
      const int mask = _mm256_movemask_pd(big);
      for (int lane = 0; lane < 4; ++lane) {
        if (mask & (1 << lane)) cs[lane] = std::cos(zs[lane]);
      }
      c = _mm256_load_pd(cs);
    }
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), c, acc);
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += w[i] * std::cos(z[i]);
  return sum;
}

}  // namespace

const Kernels* avx2_kernels() {
  static const Kernels k{scaled_sqdist_avx2, exp_inplace_avx2,
                         weighted_cos_sum_avx2};
  return &k;
}

}  // namespace bayesqp::simd::detail

#else

namespace bayesqp::simd::detail {

const Kernels* avx2_kernels() { return nullptr; }

}  // namespace bayesqp::simd::detail

#endif
