#ifndef CHROMAMIX_PARALLEL_HPP
#define CHROMAMIX_PARALLEL_HPP

namespace chromamix {

// Caps OpenMP worker count for all parallel kernels (CLI --jobs).
// n <= 0 restores the runtime default.
void set_max_threads(int n);
int max_threads();

} // namespace chromamix

#endif
