#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rddi/eigen.hpp"
#include "rddi/kernel.hpp"

using namespace rddi;

namespace {

constexpr double kPi = std::numbers::pi;

// Straight transcription of the closed forms, no small-argument care.
// Independent of the library's series-switching implementation.
double f_direct(double xi, double c) {
    const double c2 = c * c;
    return 1.5 * ((1.0 - c2) * std::sin(xi) / xi +
                  (1.0 - 3.0 * c2) * (std::cos(xi) / (xi * xi) - std::sin(xi) / (xi * xi * xi)));
}

double g_direct(double xi, double c) {
    const double c2 = c * c;
    return 0.75 * (-(1.0 - c2) * std::cos(xi) / xi +
                   (1.0 - 3.0 * c2) * (std::sin(xi) / (xi * xi) + std::cos(xi) / (xi * xi * xi)));
}

}  // namespace

TEST_CASE("pairwise_rates matches direct substitution at xi = 2 pi") {
    const GreensPair p = pairwise_rates(2.0 * kPi, 0.0, 1.0);
    CHECK(p.f == doctest::Approx(3.0 / (8.0 * kPi * kPi)).epsilon(1e-12));
    CHECK(p.g ==
          doctest::Approx(0.75 * (-1.0 / (2.0 * kPi) + 1.0 / (8.0 * kPi * kPi * kPi))).epsilon(1e-12));
}

TEST_CASE("F approaches gamma as xi -> 0, for every dipole projection") {
    // Oracle: evaluate at decreasing xi and confirm convergence to 1.
    double prev_err = 1.0;
    for (double xi : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const double err = std::abs(pairwise_rates(xi, 0.0, 1.0).f - 1.0);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(std::abs(pairwise_rates(1e-4, 0.0, 1.0).f - 1.0) < 1e-7);
    for (double c = -1.0; c <= 1.0; c += 0.125)
        CHECK(std::abs(pairwise_rates(1e-4, c, 1.0).f - 1.0) < 1e-6);
}

TEST_CASE("pairwise_rates rejects xi <= 0") {
    CHECK_THROWS_AS(pairwise_rates(0.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(pairwise_rates(-1.0, 0.0, 1.0), std::domain_error);
}

TEST_CASE("series and direct branches agree through the seam") {
    for (double c : {0.0, 0.3, 1.0}) {
        for (double xi = 0.02; xi < 0.2; xi += 0.004) {
            const GreensPair p = pairwise_rates(xi, c, 1.0);
            CHECK(p.f == doctest::Approx(f_direct(xi, c)).epsilon(5e-13));
            CHECK(p.g == doctest::Approx(g_direct(xi, c)).epsilon(5e-13));
        }
    }
}

TEST_CASE("far-field term-by-term bound on |F|") {
    for (double xi = 1.0; xi < 50.0; xi += 0.37) {
        for (double c : {0.0, 0.5, 1.0}) {
            const double bound = 1.5 / xi * (1.0 + 3.0 / xi + 3.0 / (xi * xi));
            CHECK(std::abs(pairwise_rates(xi, c, 1.0).f) <= bound);
        }
    }
}

TEST_CASE("build_kernel basics") {
    SUBCASE("single atom") {
        DipoleGeometry g;
        g.n_atoms = 1;
        const InteractionKernel k = build_kernel(g);
        CHECK(k.matrix.size() == 1);
        CHECK(k.at(0, 0) == complexd{-0.5, 0.0});
    }
    SUBCASE("two atoms, perpendicular dipole") {
        DipoleGeometry g;
        g.n_atoms = 2;
        g.spacing = 0.25;
        const InteractionKernel k = build_kernel(g);
        const GreensPair p = pairwise_rates(kPi / 2.0, 0.0, 1.0);
        CHECK(k.at(0, 1).real() == doctest::Approx(-0.5 * p.f).epsilon(1e-15));
        CHECK(k.at(0, 1).imag() == doctest::Approx(p.g).epsilon(1e-15));
        CHECK(k.at(0, 1) == k.at(1, 0));
    }
    SUBCASE("trace identity and exact structure") {
        DipoleGeometry g;
        g.n_atoms = 17;
        g.spacing = 0.31;
        const InteractionKernel k = build_kernel(g);
        complexd trace{0.0, 0.0};
        for (int i = 0; i < g.n_atoms; ++i) trace += k.at(i, i);
        CHECK(trace == complexd{-0.5 * g.n_atoms, 0.0});
        for (int i = 0; i < g.n_atoms; ++i) {
            CHECK(k.at(i, i) == complexd{-0.5, 0.0});
            for (int j = 0; j < g.n_atoms; ++j) CHECK(k.at(i, j) == k.at(j, i));
        }
    }
    SUBCASE("Toeplitz structure: entries depend only on |mu - nu|") {
        DipoleGeometry g;
        g.n_atoms = 9;
        g.spacing = 0.4;
        const InteractionKernel k = build_kernel(g);
        for (int i = 0; i + 1 < g.n_atoms; ++i)
            for (int j = 0; j + 1 < g.n_atoms; ++j) CHECK(k.at(i, j) == k.at(i + 1, j + 1));
    }
}

TEST_CASE("geometry validation") {
    DipoleGeometry g;
    g.n_atoms = 0;
    CHECK_THROWS_AS(build_kernel(g), std::invalid_argument);
    g.n_atoms = 2;
    g.spacing = -1.0;
    CHECK_THROWS_AS(build_kernel(g), std::invalid_argument);
    g.spacing = 0.5;
    g.dipole = {0.0, 0.0, 2.0};
    CHECK_THROWS_AS(build_kernel(g), std::invalid_argument);
}

TEST_CASE("full decay matrix F is positive semidefinite") {
    for (double spacing : {0.1, 0.2, 0.35, 0.6, 0.9}) {
        DipoleGeometry g;
        g.n_atoms = 12;
        g.spacing = spacing;
        const InteractionKernel k = build_kernel(g);
        // F_{mu nu} = -2 Re(M_{mu nu}) off-diagonal, gamma on the diagonal.
        std::vector<complexd> f(k.matrix.size());
        for (int i = 0; i < g.n_atoms; ++i)
            for (int j = 0; j < g.n_atoms; ++j)
                f[static_cast<size_t>(i) * g.n_atoms + j] =
                    (i == j) ? complexd{1.0, 0.0} : complexd{-2.0 * k.at(i, j).real(), 0.0};
        const auto eig = eigenvalues_dense(f, g.n_atoms);
        for (const complexd& lambda : eig) CHECK(lambda.real() >= -1e-8);
    }
}

TEST_CASE("noninteracting baseline") {
    const InteractionKernel base = noninteracting_baseline(2, 1.0);
    CHECK(base.at(0, 0) == complexd{-0.5, 0.0});
    CHECK(base.at(1, 1) == complexd{-0.5, 0.0});
    CHECK(base.at(0, 1) == complexd{0.0, 0.0});

    SUBCASE("spectrum of the baseline is flat at gamma") {
        const EigenSpectrum s = decay_spectrum(noninteracting_baseline(7, 1.0));
        for (double rate : s.decay_rates) CHECK(rate == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("baseline is the far-spacing limit of build_kernel") {
        DipoleGeometry g;
        g.n_atoms = 6;
        g.spacing = 1e4;
        const InteractionKernel far = build_kernel(g);
        const InteractionKernel b = noninteracting_baseline(6, 1.0);
        for (size_t i = 0; i < far.matrix.size(); ++i)
            CHECK(std::abs(far.matrix[i] - b.matrix[i]) < 1e-4);
    }
}

TEST_CASE("image round trip is lossless") {
    DipoleGeometry g;
    g.n_atoms = 5;
    g.spacing = 0.27;
    const InteractionKernel k = build_kernel(g);
    const KernelImage image = to_image(k);
    CHECK(from_image(image) == k.matrix);
    for (int i = 0; i < g.n_atoms; ++i)
        CHECK(image.channel1[static_cast<size_t>(i) * g.n_atoms + i] == 0.0);

    const KernelImage single = to_image(noninteracting_baseline(1, 1.0));
    CHECK(single.channel0 == std::vector<double>{-0.5});
    CHECK(single.channel1 == std::vector<double>{0.0});
}
