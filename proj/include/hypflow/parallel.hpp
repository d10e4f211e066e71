#pragma once

// Execution policy for the heavy inner loops.  Every parallel kernel in this
// project has a plain serial twin used as the reference implementation; tests
// compare the two and tools/bench times them.  Thread count comes from
// OMP_NUM_THREADS only.

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hypflow {

enum class ExecPolicy { Serial, Parallel };

inline int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace hypflow
