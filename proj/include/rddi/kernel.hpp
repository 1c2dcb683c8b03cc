#pragma once

#include <complex>
#include <vector>

#include "rddi/geometry.hpp"

namespace rddi {

using complexd = std::complex<double>;

// Pairwise decay rate and frequency shift, both in units of gamma.
struct GreensPair {
    double f = 0.0;
    double g = 0.0;
};

// F(xi) and G(xi) for dimensionless separation xi = |k_L| r and
// projection cos_theta = p-hat . r-hat. Throws on xi <= 0; the
// coincident-atom case is handled by the kernel diagonal, never here.
GreensPair pairwise_rates(double xi, double cos_theta, double gamma);

// N x N complex symmetric interaction matrix, row-major.
struct InteractionKernel {
    std::vector<complexd> matrix;
    DipoleGeometry geometry;

    int size() const { return geometry.n_atoms; }
    complexd at(int mu, int nu) const { return matrix[static_cast<size_t>(mu) * size() + nu]; }
};

// Two-channel real view: channel 0 = Re(M), channel 1 = Im(M).
struct KernelImage {
    int n = 0;
    std::vector<double> channel0;
    std::vector<double> channel1;

    size_t pixels() const { return static_cast<size_t>(n) * n; }
    // Flat pixel index across both channels, channel-major.
    double pixel(size_t i) const { return i < pixels() ? channel0[i] : channel1[i - pixels()]; }
};

InteractionKernel build_kernel(const DipoleGeometry& geometry);
InteractionKernel noninteracting_baseline(int n_atoms, double gamma);

KernelImage to_image(const InteractionKernel& kernel);
KernelImage baseline_image(int n_atoms, double gamma);

// Reassembles channel0 + i*channel1; exact inverse of to_image.
std::vector<complexd> from_image(const KernelImage& image);

}  // namespace rddi
