#include "chromamix/parallel.hpp"

#include <omp.h>

namespace chromamix {

namespace {
int g_max_threads = 0; // 0 = runtime default
}

void set_max_threads(int n) {
  g_max_threads = n > 0 ? n : 0;
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return g_max_threads > 0 ? g_max_threads : omp_get_max_threads(); }

} // namespace chromamix
