#include "airyproc/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace airyproc {

int set_threads(int requested) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv(kThreadsEnv)) {
      try {
        n = std::stoi(env);
      } catch (...) {
        n = 0;
      }
    }
  }
  if (n <= 0) n = omp_get_num_procs();
  omp_set_num_threads(n);
  return n;
}

int current_threads() { return omp_get_max_threads(); }

}  // namespace airyproc
