#include "secvar/cli/runtime.hpp"

#include <unistd.h>

#include <cstdlib>

#include "secvar/spectral.hpp"

namespace secvar::cli {

void ensure_reliable_lapack(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
  if (lapack_kernels_consistent()) return;
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  if (!__builtin_cpu_supports("avx2")) return;
  if (setenv("OPENBLAS_CORETYPE", "Haswell", 1) != 0) return;
  execv("/proc/self/exe", argv);
  unsetenv("OPENBLAS_CORETYPE");
#endif
}

}  // namespace secvar::cli
