#pragma once

namespace secvar::cli {

/// If the linked LAPACK/BLAS fails its self-check and OPENBLAS_CORETYPE is
/// unset, re-executes the current program with OPENBLAS_CORETYPE=Haswell
/// (AVX2 hosts only). Returns normally when no restart is needed or possible.
void ensure_reliable_lapack(char** argv);

}  // namespace secvar::cli
