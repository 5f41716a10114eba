#include "lgcpfuse/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace lgcpfuse::kernels {
namespace {

using detail::Backend;

const Backend* pick_default() {
  if (const char* env = std::getenv("LGCPFUSE_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &detail::scalar_backend();
    if (std::strcmp(env, "avx2") == 0 && detail::avx2_runtime_ok())
      return detail::avx2_backend();
    // unknown or unsupported value: fall through to autodetect
  }
  if (detail::avx2_runtime_ok())
    if (const Backend* b = detail::avx2_backend()) return b;
  return &detail::scalar_backend();
}

const Backend*& active() {
  static const Backend* b = pick_default();
  return b;
}

}  // namespace

const char* active_backend() { return active()->name; }

void force_backend(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    active() = &detail::scalar_backend();
    return;
  }
  if (std::strcmp(name, "avx2") == 0) {
    if (!detail::avx2_runtime_ok() || !detail::avx2_backend())
      throw std::runtime_error("avx2 kernels unavailable on this machine");
    active() = detail::avx2_backend();
    return;
  }
  throw std::runtime_error("unknown kernel backend: " + std::string(name));
}

double sum(const double* x, std::size_t n) { return active()->sum(x, n); }
double dot(const double* x, const double* y, std::size_t n) {
  return active()->dot(x, y, n);
}
double sq_norm(const double* x, std::size_t n) {
  return active()->sq_norm(x, n);
}
void axpy(double a, const double* x, double* y, std::size_t n) {
  active()->axpy(a, x, y, n);
}
void vexp(const double* x, double* y, std::size_t n) {
  active()->vexp(x, y, n);
}
double vexp_sum(const double* x, double* y, std::size_t n) {
  return active()->vexp_sum(x, y, n);
}
void vexpit(const double* x, double* y, std::size_t n) {
  active()->vexpit(x, y, n);
}
void vsoftplus(const double* x, double* y, std::size_t n) {
  active()->vsoftplus(x, y, n);
}

}  // namespace lgcpfuse::kernels

namespace lgcpfuse::kernels::detail {

bool avx2_runtime_ok() {
#if defined(__x86_64__) && defined(LGCPFUSE_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace lgcpfuse::kernels::detail
