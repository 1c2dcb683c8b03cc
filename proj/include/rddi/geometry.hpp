#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace rddi {

// Physical configuration of one 1-D equidistant atomic array.
// Spacing is the lattice constant in units of the transition wavelength.
struct DipoleGeometry {
    int n_atoms = 1;
    double spacing = 0.5;
    std::array<double, 3> axis{1.0, 0.0, 0.0};
    std::array<double, 3> dipole{0.0, 0.0, 1.0};
    double gamma = 1.0;

    void validate() const {
        if (n_atoms < 1)
            throw std::invalid_argument("DipoleGeometry: n_atoms must be >= 1");
        if (!(spacing > 0.0))
            throw std::invalid_argument("DipoleGeometry: spacing must be > 0");
        if (!(gamma > 0.0))
            throw std::invalid_argument("DipoleGeometry: gamma must be > 0");
        if (std::abs(norm(axis) - 1.0) > 1e-12)
            throw std::invalid_argument("DipoleGeometry: axis must be unit norm");
        if (std::abs(norm(dipole) - 1.0) > 1e-12)
            throw std::invalid_argument("DipoleGeometry: dipole must be unit norm");
    }

    // p-hat . r-hat; constant for every pair of an equidistant line.
    double cos_theta() const {
        return axis[0] * dipole[0] + axis[1] * dipole[1] + axis[2] * dipole[2];
    }

    static double norm(const std::array<double, 3>& v) {
        return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
};

}  // namespace rddi
