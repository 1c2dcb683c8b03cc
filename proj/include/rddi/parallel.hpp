#pragma once

namespace rddi {

// Worker cap for the OpenMP regions in this library (dataset generation,
// batch gradients, attribution). 0 means the OpenMP default. Every
// parallel routine is bit-identical for any worker count; the cap only
// trades wall time.
void set_max_threads(int threads);
int max_threads();

}  // namespace rddi
