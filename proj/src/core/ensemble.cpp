#include "cqed/ensemble.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cqed {

Execution default_execution() {
#ifdef _OPENMP
  return Execution::Parallel;
#else
  return Execution::Serial;
#endif
}

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

} // namespace cqed
