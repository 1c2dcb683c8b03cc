#include "rddi/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rddi {

namespace {

// cos(xi)/xi^2 - sin(xi)/xi^3 and sin(xi)/xi^2 + cos(xi)/xi^3.
// The first suffers catastrophic cancellation for small xi, so below
// the seam both switch to series; seam placed where the branches agree
// to ~1e-13 (direct rounding ~eps/xi^2 dominates closer to zero).
constexpr double kSeriesSeam = 0.05;

double cos2_minus_sin3(double xi) {
    if (xi < kSeriesSeam) {
        const double x2 = xi * xi;
        return -1.0 / 3.0 +
               x2 * (1.0 / 30.0 + x2 * (-1.0 / 840.0 + x2 * (1.0 / 45360.0 - x2 / 3991680.0)));
    }
    return std::cos(xi) / (xi * xi) - std::sin(xi) / (xi * xi * xi);
}

double sin2_plus_cos3(double xi) {
    if (xi < kSeriesSeam) {
        const double x2 = xi * xi;
        const double regular =
            xi * (-1.0 / 8.0 + x2 * (1.0 / 144.0 + x2 * (-1.0 / 5760.0 + x2 / 403200.0)));
        return 1.0 / (xi * xi * xi) + 1.0 / (2.0 * xi) + regular;
    }
    return std::sin(xi) / (xi * xi) + std::cos(xi) / (xi * xi * xi);
}

}  // namespace

GreensPair pairwise_rates(double xi, double cos_theta, double gamma) {
    if (!(xi > 0.0))
        throw std::domain_error("pairwise_rates: xi must be > 0");
    const double c2 = cos_theta * cos_theta;
    const double perp = 1.0 - c2;
    const double axial = 1.0 - 3.0 * c2;
    GreensPair out;
    out.f = 1.5 * gamma * (perp * std::sin(xi) / xi + axial * cos2_minus_sin3(xi));
    out.g = 0.75 * gamma * (-perp * std::cos(xi) / xi + axial * sin2_plus_cos3(xi));
    return out;
}

InteractionKernel build_kernel(const DipoleGeometry& geometry) {
    geometry.validate();
    const int n = geometry.n_atoms;
    const double c = geometry.cos_theta();
    const double two_pi = 2.0 * std::numbers::pi;

    InteractionKernel kernel;
    kernel.geometry = geometry;
    kernel.matrix.assign(static_cast<size_t>(n) * n, complexd{0.0, 0.0});

    // One GreensPair per separation |mu - nu|, then filled symmetrically.
    std::vector<complexd> off(static_cast<size_t>(n));
    for (int k = 1; k < n; ++k) {
        const GreensPair p = pairwise_rates(two_pi * geometry.spacing * k, c, geometry.gamma);
        off[static_cast<size_t>(k)] = complexd{-0.5 * p.f, p.g};
    }

    const complexd diag{-0.5 * geometry.gamma, 0.0};
    for (int mu = 0; mu < n; ++mu) {
        kernel.matrix[static_cast<size_t>(mu) * n + mu] = diag;
        for (int nu = mu + 1; nu < n; ++nu) {
            const complexd m = off[static_cast<size_t>(nu - mu)];
            kernel.matrix[static_cast<size_t>(mu) * n + nu] = m;
            kernel.matrix[static_cast<size_t>(nu) * n + mu] = m;
        }
    }
    return kernel;
}

InteractionKernel noninteracting_baseline(int n_atoms, double gamma) {
    if (n_atoms < 1)
        throw std::invalid_argument("noninteracting_baseline: n_atoms must be >= 1");
    InteractionKernel kernel;
    kernel.geometry.n_atoms = n_atoms;
    kernel.geometry.gamma = gamma;
    kernel.geometry.spacing = std::numeric_limits<double>::infinity();
    kernel.matrix.assign(static_cast<size_t>(n_atoms) * n_atoms, complexd{0.0, 0.0});
    for (int mu = 0; mu < n_atoms; ++mu)
        kernel.matrix[static_cast<size_t>(mu) * n_atoms + mu] = complexd{-0.5 * gamma, 0.0};
    return kernel;
}

KernelImage to_image(const InteractionKernel& kernel) {
    const int n = kernel.size();
    KernelImage image;
    image.n = n;
    image.channel0.resize(static_cast<size_t>(n) * n);
    image.channel1.resize(static_cast<size_t>(n) * n);
    for (size_t i = 0; i < kernel.matrix.size(); ++i) {
        image.channel0[i] = kernel.matrix[i].real();
        image.channel1[i] = kernel.matrix[i].imag();
    }
    return image;
}

KernelImage baseline_image(int n_atoms, double gamma) {
    return to_image(noninteracting_baseline(n_atoms, gamma));
}

std::vector<complexd> from_image(const KernelImage& image) {
    std::vector<complexd> out(image.pixels());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = complexd{image.channel0[i], image.channel1[i]};
    return out;
}

}  // namespace rddi
