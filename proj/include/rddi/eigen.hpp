#pragma once

#include <complex>
#include <vector>

#include "rddi/kernel.hpp"

namespace rddi {

struct EigenSpectrum {
    std::vector<complexd> eigenvalues;  // unsorted, as produced by the solver
    std::vector<double> decay_rates;    // -2 Re(lambda), ascending
    std::vector<double> shifts;         // Im(lambda), co-sorted with decay_rates
};

// All eigenvalues of a dense complex matrix (row-major, n x n):
// balancing, Householder reduction to upper Hessenberg, then shifted QR
// with Wilkinson shifts and deflation. Eigenvalues only.
// max_sweeps <= 0 selects the default 30*n. Throws on non-convergence,
// naming the stuck deflation window.
std::vector<complexd> eigenvalues_dense(std::vector<complexd> a, int n, double tol = 1e-12,
                                        int max_sweeps = 0);

EigenSpectrum decay_spectrum(const InteractionKernel& kernel);

// Independent small-matrix oracle (n <= 4): Faddeev-LeVerrier
// characteristic-polynomial coefficients plus closed-form or
// Durand-Kerner root finding. Shares no code with eigenvalues_dense.
std::vector<complexd> charpoly_oracle(const std::vector<complexd>& a, int n);

}  // namespace rddi
