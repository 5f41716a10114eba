#pragma once

#include <cstddef>

// Data-parallel arithmetic kernels used by the likelihood and field inner
// loops. Every kernel has a scalar reference implementation and, on x86-64
// with AVX2+FMA, a vectorized variant; the backend is chosen once at startup
// (override with LGCPFUSE_KERNELS=scalar|avx2 or force_backend()).
//
// The elementwise transcendentals (vexp, vexpit, vsoftplus) evaluate the same
// polynomial in both backends, so scalar and AVX2 agree bit for bit; the
// reductions differ only by summation order.
//
// vexp underflows to 0 for x < -708 and overflows to +inf above 709.8.

namespace lgcpfuse::kernels {

// Active backend name: "scalar" or "avx2".
const char* active_backend();

// Force a backend by name; throws on unknown or unsupported names.
void force_backend(const char* name);

double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sq_norm(const double* x, std::size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

// y = exp(x)
void vexp(const double* x, double* y, std::size_t n);

// y = exp(x), returns sum(y)
double vexp_sum(const double* x, double* y, std::size_t n);

// y = 1 / (1 + exp(-x))
void vexpit(const double* x, double* y, std::size_t n);

// y = log(1 + exp(x))
void vsoftplus(const double* x, double* y, std::size_t n);

}  // namespace lgcpfuse::kernels
