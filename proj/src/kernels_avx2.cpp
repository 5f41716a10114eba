// AVX2+FMA backend. The transcendental lanes replay exp_core/log_core
// step for step (same constants, same fma order), so results match the
// scalar backend bitwise; loop tails fall back to the scalar cores.

#include <immintrin.h>

#include "lgcpfuse/detail/math_core.hpp"
#include "kernels_impl.hpp"

namespace lgcpfuse::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double a_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double a = hsum(acc);
  for (; i < n; ++i) a += x[i];
  return a;
}

double a_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double a = hsum(acc);
  for (; i < n; ++i) a = std::fma(x[i], y[i], a);
  return a;
}

double a_sq_norm(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double a = hsum(acc);
  for (; i < n; ++i) a = std::fma(x[i], x[i], a);
  return a;
}

void a_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r =
        _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

// Integer <-> double lane tricks (no 64-bit cvt/srai in AVX2): the
// 2^52 + 2^51 magic constant turns integral-valued doubles into int64 lanes
// and back, valid for |k| < 2^51.
const __m256i kMagicBits = _mm256_set1_epi64x(0x4338000000000000LL);
const __m256d kMagic = _mm256_set1_pd(6755399441055744.0);

inline __m256i to_i64(__m256d kd) {
  return _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(kd, kMagic)),
                          kMagicBits);
}

inline __m256d to_f64(__m256i k) {
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_add_epi64(k, kMagicBits)),
                       kMagic);
}

inline __m256d exp_lanes(__m256d x) {
  const __m256d kd = _mm256_round_pd(
      _mm256_mul_pd(x, _mm256_set1_pd(kLog2E)),
      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fmadd_pd(kd, _mm256_set1_pd(-kLn2Hi), x);
  r = _mm256_fmadd_pd(kd, _mm256_set1_pd(-kLn2Lo), r);
  __m256d p = _mm256_set1_pd(1.6059043836821613e-10);
  const double c[] = {2.08767569878681e-9,    2.505210838544172e-8,
                      2.7557319223985893e-7,  2.755731922398589e-6,
                      2.4801587301587302e-5,  1.984126984126984e-4,
                      1.3888888888888889e-3,  8.333333333333333e-3,
                      4.1666666666666664e-2,  1.6666666666666666e-1,
                      0.5,                    1.0,
                      1.0};
  for (double ci : c) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(ci));
  const __m256i ki = to_i64(kd);
  const __m256d pow2 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1022)), 52));
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(2.0), p), pow2);
  const __m256d lo = _mm256_cmp_pd(x, _mm256_set1_pd(kExpLo), _CMP_LT_OQ);
  const __m256d hi = _mm256_cmp_pd(x, _mm256_set1_pd(kExpHi), _CMP_GT_OQ);
  y = _mm256_andnot_pd(lo, y);
  y = _mm256_blendv_pd(y, _mm256_set1_pd(
      std::numeric_limits<double>::infinity()), hi);
  return y;
}

inline __m256d log_lanes(__m256d x) {
  const __m256i ix = _mm256_castpd_si256(x);
  const __m256i off = _mm256_set1_epi64x(0x3fe6a09e667f3bcdLL);
  // arithmetic >>52 built from the logical shift plus 12-bit sign extension
  __m256i e = _mm256_srli_epi64(_mm256_sub_epi64(ix, off), 52);
  const __m256i sbit = _mm256_set1_epi64x(0x800);
  e = _mm256_sub_epi64(_mm256_xor_si256(e, sbit), sbit);
  const __m256d m =
      _mm256_castsi256_pd(_mm256_sub_epi64(ix, _mm256_slli_epi64(e, 52)));
  const __m256d ed = to_f64(e);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d z = _mm256_mul_pd(s, s);
  __m256d q = _mm256_set1_pd(2.0 / 21.0);
  const double c[] = {2.0 / 19.0, 2.0 / 17.0, 2.0 / 15.0, 2.0 / 13.0,
                      2.0 / 11.0, 2.0 / 9.0,  2.0 / 7.0,  2.0 / 5.0,
                      2.0 / 3.0};
  for (double ci : c) q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(ci));
  const __m256d logm =
      _mm256_fmadd_pd(_mm256_mul_pd(s, z), q,
                      _mm256_mul_pd(_mm256_set1_pd(2.0), s));
  return _mm256_fmadd_pd(
      ed, _mm256_set1_pd(kLn2Hi),
      _mm256_fmadd_pd(ed, _mm256_set1_pd(kLn2Lo), logm));
}

inline __m256d log1p_lanes(__m256d u) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d w = _mm256_add_pd(one, u);
  const __m256d c =
      _mm256_div_pd(_mm256_sub_pd(u, _mm256_sub_pd(w, one)), w);
  return _mm256_add_pd(log_lanes(w), c);
}

void a_vexp(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, exp_lanes(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = exp_core(x[i]);
}

double a_vexp_sum(const double* x, double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = exp_lanes(_mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, v);
    acc = _mm256_add_pd(acc, v);
  }
  double a = hsum(acc);
  for (; i < n; ++i) {
    y[i] = exp_core(x[i]);
    a += y[i];
  }
  return a;
}

void a_vexpit(const double* x, double* y, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t =
        exp_lanes(_mm256_sub_pd(_mm256_setzero_pd(), _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, _mm256_div_pd(one, _mm256_add_pd(one, t)));
  }
  for (; i < n; ++i) y[i] = expit_core(x[i]);
}

void a_vsoftplus(const double* x, double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d nabs = _mm256_min_pd(v, _mm256_sub_pd(zero, v));
    const __m256d l = log1p_lanes(exp_lanes(nabs));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_max_pd(v, zero), l));
  }
  for (; i < n; ++i) y[i] = softplus_core(x[i]);
}

}  // namespace

const Backend* avx2_backend() {
  static const Backend b{"avx2", a_sum,      a_dot,    a_sq_norm,
                         a_axpy, a_vexp,     a_vexp_sum,
                         a_vexpit, a_vsoftplus};
  return &b;
}

}  // namespace lgcpfuse::kernels::detail
