#include "gridshape/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace gridshape {

int thread_limit() {
  if (const char* env = std::getenv("GRIDSHAPE_THREADS")) {
    try {
      int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
      // fall through to the OpenMP default
    }
  }
  return omp_get_max_threads();
}

}  // namespace gridshape
