// Stub linked when the toolchain cannot target AVX2.

#include "kernels_impl.hpp"

namespace lgcpfuse::kernels::detail {

const Backend* avx2_backend() { return nullptr; }

}  // namespace lgcpfuse::kernels::detail
