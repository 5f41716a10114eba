#include "lgcpfuse/detail/math_core.hpp"
#include "kernels_impl.hpp"

namespace lgcpfuse::kernels::detail {
namespace {

double s_sum(const double* x, std::size_t n) {
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) a += x[i];
  return a;
}

double s_dot(const double* x, const double* y, std::size_t n) {
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) a = std::fma(x[i], y[i], a);
  return a;
}

double s_sq_norm(const double* x, std::size_t n) {
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) a = std::fma(x[i], x[i], a);
  return a;
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void s_vexp(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = exp_core(x[i]);
}

double s_vexp_sum(const double* x, double* y, std::size_t n) {
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = exp_core(x[i]);
    a += y[i];
  }
  return a;
}

void s_vexpit(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = expit_core(x[i]);
}

void s_vsoftplus(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = softplus_core(x[i]);
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend b{"scalar", s_sum,      s_dot,    s_sq_norm,
                         s_axpy,   s_vexp,     s_vexp_sum,
                         s_vexpit, s_vsoftplus};
  return b;
}

}  // namespace lgcpfuse::kernels::detail
