#include "confsplat/parallel.hpp"

#ifdef CONFSPLAT_HAVE_OPENMP
#include <omp.h>
#endif

namespace confsplat {

int thread_count() {
#ifdef CONFSPLAT_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_thread_count(int n) {
#ifdef CONFSPLAT_HAVE_OPENMP
  omp_set_num_threads(n < 1 ? omp_get_num_procs() : n);
#else
  (void)n;
#endif
}

}  // namespace confsplat
