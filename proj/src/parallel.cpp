#include "rddi/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rddi {

namespace {
int g_max_threads = 0;
}

void set_max_threads(int threads) { g_max_threads = threads > 0 ? threads : 0; }

int max_threads() {
#ifdef _OPENMP
    return g_max_threads > 0 ? g_max_threads : omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace rddi
