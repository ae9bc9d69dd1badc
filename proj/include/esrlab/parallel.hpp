#pragma once

// OpenMP loop macros; expand to nothing in serial builds.
#if defined(ESRLAB_USE_OPENMP)
#include <omp.h>
#define ESRLAB_OMP_STATIC_LOOP _Pragma("omp parallel for schedule(static)")
#define ESRLAB_OMP_DYNAMIC_LOOP _Pragma("omp parallel for schedule(dynamic, 1)")
#else
#define ESRLAB_OMP_STATIC_LOOP
#define ESRLAB_OMP_DYNAMIC_LOOP
#endif

namespace esrlab {

inline int max_threads() {
#if defined(ESRLAB_USE_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace esrlab
