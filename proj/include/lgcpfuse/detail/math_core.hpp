#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

// Shared scalar cores for the elementwise kernels. The AVX2 backend executes
// the same operations laneswise (same constants, same fma order), which is
// what makes scalar/AVX2 results bit-identical for vexp/vexpit/vsoftplus.

namespace lgcpfuse::kernels::detail {

inline constexpr double kLog2E = 1.4426950408889634074;     // 1/ln 2
inline constexpr double kLn2Hi = 6.93147180369123816490e-1; // ln 2, high bits
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kExpLo = -708.0;  // below: exp underflows to 0
inline constexpr double kExpHi = 709.78;  // above: exp overflows to +inf

// exp(x) via k = round(x/ln2), Cody-Waite reduced r, degree-13 Taylor Horner.
// Truncation error of the polynomial is below one ulp for |r| <= ln2/2.
inline double exp_core(double x) {
  if (x < kExpLo) return 0.0;
  if (x > kExpHi) return std::numeric_limits<double>::infinity();
  const double kd = std::nearbyint(x * kLog2E);
  double r = std::fma(kd, -kLn2Hi, x);
  r = std::fma(kd, -kLn2Lo, r);
  double p = 1.6059043836821613e-10;            // 1/13!
  p = std::fma(p, r, 2.08767569878681e-9);      // 1/12!
  p = std::fma(p, r, 2.505210838544172e-8);     // 1/11!
  p = std::fma(p, r, 2.7557319223985893e-7);    // 1/10!
  p = std::fma(p, r, 2.755731922398589e-6);     // 1/9!
  p = std::fma(p, r, 2.4801587301587302e-5);    // 1/8!
  p = std::fma(p, r, 1.984126984126984e-4);     // 1/7!
  p = std::fma(p, r, 1.3888888888888889e-3);    // 1/6!
  p = std::fma(p, r, 8.333333333333333e-3);     // 1/5!
  p = std::fma(p, r, 4.1666666666666664e-2);    // 1/4!
  p = std::fma(p, r, 1.6666666666666666e-1);    // 1/3!
  p = std::fma(p, r, 0.5);
  p = std::fma(p, r, 1.0);
  p = std::fma(p, r, 1.0);
  // scale by 2^k through direct exponent construction; k is in [-1021, 1024]
  // here, so 2^(k-1) always has a normal-range exponent pattern
  const auto ki = static_cast<std::int64_t>(kd);
  const double pow2 = std::bit_cast<double>((ki + 1022) << 52);
  return (2.0 * p) * pow2;
}

// log(x) for finite x > 0: reduce to m in [sqrt(1/2), sqrt(2)), then the
// atanh series in s = (m-1)/(m+1) with odd powers up to s^21.
inline double log_core(double x) {
  const std::int64_t ix = std::bit_cast<std::int64_t>(x);
  const std::int64_t e = (ix - 0x3fe6a09e667f3bcdLL) >> 52;
  const double m = std::bit_cast<double>(ix - (e << 52));
  const double ed = static_cast<double>(e);
  const double s = (m - 1.0) / (m + 1.0);
  const double z = s * s;
  double q = 2.0 / 21.0;
  q = std::fma(q, z, 2.0 / 19.0);
  q = std::fma(q, z, 2.0 / 17.0);
  q = std::fma(q, z, 2.0 / 15.0);
  q = std::fma(q, z, 2.0 / 13.0);
  q = std::fma(q, z, 2.0 / 11.0);
  q = std::fma(q, z, 2.0 / 9.0);
  q = std::fma(q, z, 2.0 / 7.0);
  q = std::fma(q, z, 2.0 / 5.0);
  q = std::fma(q, z, 2.0 / 3.0);
  const double logm = std::fma(s * z, q, 2.0 * s);
  return std::fma(ed, kLn2Hi, std::fma(ed, kLn2Lo, logm));
}

// log(1+u) for u >= 0, with a correction term for the rounding in 1+u.
// (At u ~ 0 this reduces to log_core(1) + u = u, so no special case needed.)
inline double log1p_core(double u) {
  const double w = 1.0 + u;
  const double c = (u - (w - 1.0)) / w;
  return log_core(w) + c;
}

// log(1 + exp(x)), stable on both tails.
inline double softplus_core(double x) {
  const double t = exp_core(x > 0.0 ? -x : x);
  const double l = log1p_core(t);
  return (x > 0.0 ? x : 0.0) + l;
}

inline double expit_core(double x) {
  const double t = exp_core(-x);
  return 1.0 / (1.0 + t);
}

}  // namespace lgcpfuse::kernels::detail
