#pragma once

#include <cstddef>

// Backend vtable shared by the dispatcher and the per-ISA translation units.

namespace lgcpfuse::kernels::detail {

struct Backend {
  const char* name;
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*sq_norm)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*vexp)(const double*, double*, std::size_t);
  double (*vexp_sum)(const double*, double*, std::size_t);
  void (*vexpit)(const double*, double*, std::size_t);
  void (*vsoftplus)(const double*, double*, std::size_t);
};

const Backend& scalar_backend();

// Null when the binary was built without AVX2 support.
const Backend* avx2_backend();

// True when the running CPU can execute the AVX2 backend.
bool avx2_runtime_ok();

}  // namespace lgcpfuse::kernels::detail
