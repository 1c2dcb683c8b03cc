#include "rddi/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace rddi {

namespace {

inline complexd& elem(std::vector<complexd>& a, int n, int i, int j) {
    return a[static_cast<size_t>(i) * n + j];
}

// Diagonal similarity scaling by powers of two; leaves eigenvalues
// unchanged and improves the conditioning of the QR iteration.
void balance(std::vector<complexd>& a, int n) {
    constexpr double radix = 2.0;
    bool converged = false;
    while (!converged) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(elem(a, n, j, i));
                r += std::abs(elem(a, n, i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / radix) {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while (c > r * radix) {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if ((c + r) < 0.95 * s && f != 1.0) {
                converged = false;
                for (int j = 0; j < n; ++j) elem(a, n, i, j) /= f;
                for (int j = 0; j < n; ++j) elem(a, n, j, i) *= f;
            }
        }
    }
}

void hessenberg_reduce(std::vector<complexd>& a, int n) {
    std::vector<complexd> v(static_cast<size_t>(n));
    for (int k = 0; k + 2 < n; ++k) {
        double beta = 0.0;
        for (int i = k + 1; i < n; ++i) beta += std::norm(elem(a, n, i, k));
        beta = std::sqrt(beta);
        if (beta == 0.0) continue;

        const complexd x0 = elem(a, n, k + 1, k);
        const complexd alpha = (x0 == complexd{0.0, 0.0}) ? complexd{-beta, 0.0}
                                                          : -(x0 / std::abs(x0)) * beta;
        double tau = 0.0;
        for (int i = k + 1; i < n; ++i) v[static_cast<size_t>(i)] = elem(a, n, i, k);
        v[static_cast<size_t>(k + 1)] -= alpha;
        for (int i = k + 1; i < n; ++i) tau += std::norm(v[static_cast<size_t>(i)]);
        if (tau == 0.0) continue;

        // Left: rows k+1..n-1, columns k..n-1.
        for (int j = k; j < n; ++j) {
            complexd dot{0.0, 0.0};
            for (int i = k + 1; i < n; ++i)
                dot += std::conj(v[static_cast<size_t>(i)]) * elem(a, n, i, j);
            dot *= 2.0 / tau;
            for (int i = k + 1; i < n; ++i) elem(a, n, i, j) -= dot * v[static_cast<size_t>(i)];
        }
        // Right: columns k+1..n-1, all rows.
        for (int i = 0; i < n; ++i) {
            complexd dot{0.0, 0.0};
            for (int j = k + 1; j < n; ++j)
                dot += elem(a, n, i, j) * v[static_cast<size_t>(j)];
            dot *= 2.0 / tau;
            for (int j = k + 1; j < n; ++j)
                elem(a, n, i, j) -= dot * std::conj(v[static_cast<size_t>(j)]);
        }
        elem(a, n, k + 1, k) = alpha;
        for (int i = k + 2; i < n; ++i) elem(a, n, i, k) = complexd{0.0, 0.0};
    }
}

// Both roots of lambda^2 - (p+s)lambda + (ps - qr) for the 2x2
// [[p, q], [r, s]], with the cancellation-safe quadratic form.
std::pair<complexd, complexd> roots_2x2(complexd p, complexd q, complexd r, complexd s) {
    const complexd tr = p + s;
    const complexd det = p * s - q * r;
    complexd disc = std::sqrt(tr * tr - 4.0 * det);
    if (std::real(std::conj(tr) * disc) < 0.0) disc = -disc;
    const complexd r1 = 0.5 * (tr + disc);
    const complexd r2 = (r1 == complexd{0.0, 0.0}) ? tr - r1 : det / r1;
    return {r1, r2};
}

}  // namespace

std::vector<complexd> eigenvalues_dense(std::vector<complexd> a, int n, double tol,
                                        int max_sweeps) {
    if (n < 1 || a.size() != static_cast<size_t>(n) * n)
        throw std::invalid_argument("eigenvalues_dense: matrix must be square, n >= 1");
    if (!(tol > 0.0)) tol = 1e-12;
    if (max_sweeps <= 0) max_sweeps = 30 * n;

    std::vector<complexd> eig(static_cast<size_t>(n));
    if (n == 1) {
        eig[0] = a[0];
        return eig;
    }

    balance(a, n);
    hessenberg_reduce(a, n);

    std::vector<complexd> rot_x(static_cast<size_t>(n));
    std::vector<complexd> rot_y(static_cast<size_t>(n));

    int en = n - 1;
    int its = 0;
    int total_its = 0;
    while (en >= 0) {
        // Find the start of the active unreduced window.
        int l = en;
        while (l > 0) {
            double s = std::abs(elem(a, n, l - 1, l - 1)) + std::abs(elem(a, n, l, l));
            if (s == 0.0) s = 1.0;
            if (std::abs(elem(a, n, l, l - 1)) <= tol * s) {
                elem(a, n, l, l - 1) = complexd{0.0, 0.0};
                break;
            }
            --l;
        }
        if (l == en) {
            eig[static_cast<size_t>(en)] = elem(a, n, en, en);
            --en;
            its = 0;
            continue;
        }
        if (l == en - 1) {
            const auto [r1, r2] = roots_2x2(elem(a, n, l, l), elem(a, n, l, en),
                                            elem(a, n, en, l), elem(a, n, en, en));
            eig[static_cast<size_t>(en)] = r1;
            eig[static_cast<size_t>(l)] = r2;
            en -= 2;
            its = 0;
            continue;
        }
        if (++total_its > max_sweeps) {
            std::ostringstream msg;
            msg << "eigenvalues_dense: QR iteration failed to converge after " << max_sweeps
                << " sweeps; stuck deflation window [" << l << ", " << en << "]";
            throw std::runtime_error(msg.str());
        }

        // Wilkinson shift from the trailing 2x2, exceptional every 10 steps.
        complexd shift;
        if (++its % 10 == 0) {
            shift = complexd{std::abs(elem(a, n, en, en - 1).real()) +
                                 std::abs(elem(a, n, en - 1, en - 2).real()),
                             std::abs(elem(a, n, en, en - 1).imag()) +
                                 std::abs(elem(a, n, en - 1, en - 2).imag())};
        } else {
            const auto [r1, r2] = roots_2x2(elem(a, n, en - 1, en - 1), elem(a, n, en - 1, en),
                                            elem(a, n, en, en - 1), elem(a, n, en, en));
            const complexd d = elem(a, n, en, en);
            shift = (std::abs(r1 - d) < std::abs(r2 - d)) ? r1 : r2;
        }

        for (int i = l; i <= en; ++i) elem(a, n, i, i) -= shift;

        // QR factorization of the shifted window by Givens rotations...
        for (int i = l; i < en; ++i) {
            const complexd x = elem(a, n, i, i);
            const complexd y = elem(a, n, i + 1, i);
            const double r = std::sqrt(std::norm(x) + std::norm(y));
            if (r == 0.0) {
                rot_x[static_cast<size_t>(i)] = complexd{1.0, 0.0};
                rot_y[static_cast<size_t>(i)] = complexd{0.0, 0.0};
                continue;
            }
            rot_x[static_cast<size_t>(i)] = x / r;
            rot_y[static_cast<size_t>(i)] = y / r;
            // G = (1/r) [[conj(x), conj(y)], [-y, x]] zeroes the subdiagonal.
            for (int j = i; j <= en; ++j) {
                const complexd u = elem(a, n, i, j);
                const complexd w = elem(a, n, i + 1, j);
                elem(a, n, i, j) = (std::conj(x) * u + std::conj(y) * w) / r;
                elem(a, n, i + 1, j) = (-y * u + x * w) / r;
            }
            elem(a, n, i + 1, i) = complexd{0.0, 0.0};
        }

        // ...then RQ: apply the conjugated rotations from the right.
        for (int i = l; i < en; ++i) {
            const complexd xr = rot_x[static_cast<size_t>(i)];
            const complexd yr = rot_y[static_cast<size_t>(i)];
            const int bottom = std::min(i + 1, en);
            for (int j = l; j <= bottom; ++j) {
                const complexd u = elem(a, n, j, i);
                const complexd w = elem(a, n, j, i + 1);
                elem(a, n, j, i) = u * xr + w * yr;
                elem(a, n, j, i + 1) = -u * std::conj(yr) + w * std::conj(xr);
            }
        }

        for (int i = l; i <= en; ++i) elem(a, n, i, i) += shift;
    }
    return eig;
}

EigenSpectrum decay_spectrum(const InteractionKernel& kernel) {
    const int n = kernel.size();
    EigenSpectrum spectrum;
    spectrum.eigenvalues = eigenvalues_dense(kernel.matrix, n);

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const auto& ev = spectrum.eigenvalues;
    std::sort(order.begin(), order.end(), [&ev](int i, int j) {
        const double gi = -2.0 * ev[static_cast<size_t>(i)].real();
        const double gj = -2.0 * ev[static_cast<size_t>(j)].real();
        if (gi != gj) return gi < gj;
        const double si = ev[static_cast<size_t>(i)].imag();
        const double sj = ev[static_cast<size_t>(j)].imag();
        if (si != sj) return si < sj;
        return i < j;
    });
    spectrum.decay_rates.reserve(static_cast<size_t>(n));
    spectrum.shifts.reserve(static_cast<size_t>(n));
    for (int idx : order) {
        spectrum.decay_rates.push_back(-2.0 * ev[static_cast<size_t>(idx)].real());
        spectrum.shifts.push_back(ev[static_cast<size_t>(idx)].imag());
    }
    return spectrum;
}

namespace {

// Monic polynomial roots by Durand-Kerner; coeffs[k] multiplies z^k,
// coeffs.back() == 1.
std::vector<complexd> durand_kerner(const std::vector<complexd>& coeffs) {
    const int deg = static_cast<int>(coeffs.size()) - 1;
    double scale = 0.0;
    for (int k = 0; k < deg; ++k) scale = std::max(scale, std::abs(coeffs[static_cast<size_t>(k)]));
    scale = std::max(1.0, scale);

    std::vector<complexd> z(static_cast<size_t>(deg));
    const complexd seed{0.4, 0.9};
    complexd p{1.0, 0.0};
    for (int k = 0; k < deg; ++k) {
        p *= seed;
        z[static_cast<size_t>(k)] = p * scale;
    }

    auto eval = [&coeffs](complexd x) {
        complexd v{1.0, 0.0};
        for (int k = static_cast<int>(coeffs.size()) - 2; k >= 0; --k)
            v = v * x + coeffs[static_cast<size_t>(k)];
        return v;
    };

    for (int iter = 0; iter < 500; ++iter) {
        double step = 0.0;
        for (int i = 0; i < deg; ++i) {
            complexd denom{1.0, 0.0};
            for (int j = 0; j < deg; ++j)
                if (j != i) denom *= z[static_cast<size_t>(i)] - z[static_cast<size_t>(j)];
            if (denom == complexd{0.0, 0.0}) denom = complexd{1e-30, 0.0};
            const complexd delta = eval(z[static_cast<size_t>(i)]) / denom;
            z[static_cast<size_t>(i)] -= delta;
            step = std::max(step, std::abs(delta));
        }
        if (step < 1e-15 * scale) break;
    }
    return z;
}

}  // namespace

std::vector<complexd> charpoly_oracle(const std::vector<complexd>& a, int n) {
    if (n < 1 || n > 4)
        throw std::invalid_argument("charpoly_oracle: only n in [1, 4] supported");
    if (a.size() != static_cast<size_t>(n) * n)
        throw std::invalid_argument("charpoly_oracle: matrix must be n x n");

    if (n == 1) return {a[0]};

    // Faddeev-LeVerrier: p(z) = z^n + c[1] z^(n-1) + ... + c[n].
    std::vector<complexd> c(static_cast<size_t>(n) + 1);
    std::vector<complexd> m(a);
    c[0] = complexd{1.0, 0.0};
    for (int k = 1; k <= n; ++k) {
        if (k > 1) {
            // m <- a * (m + c[k-1] I)
            std::vector<complexd> t(m);
            for (int i = 0; i < n; ++i) t[static_cast<size_t>(i) * n + i] += c[static_cast<size_t>(k - 1)];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    complexd s{0.0, 0.0};
                    for (int p = 0; p < n; ++p)
                        s += a[static_cast<size_t>(i) * n + p] * t[static_cast<size_t>(p) * n + j];
                    m[static_cast<size_t>(i) * n + j] = s;
                }
        }
        complexd tr{0.0, 0.0};
        for (int i = 0; i < n; ++i) tr += m[static_cast<size_t>(i) * n + i];
        c[static_cast<size_t>(k)] = -tr / static_cast<double>(k);
    }

    if (n == 2) {
        // Closed-form quadratic: z^2 + c1 z + c2.
        const complexd b = c[1], q = c[2];
        complexd disc = std::sqrt(b * b - 4.0 * q);
        if (std::real(std::conj(b) * disc) > 0.0) disc = -disc;
        const complexd r1 = 0.5 * (-b + disc);
        const complexd r2 = (r1 == complexd{0.0, 0.0}) ? -b - r1 : q / r1;
        return {r1, r2};
    }

    // Durand-Kerner wants ascending coefficients of the monic polynomial.
    std::vector<complexd> coeffs(static_cast<size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) coeffs[static_cast<size_t>(k)] = c[static_cast<size_t>(n - k)];
    return durand_kerner(coeffs);
}

}  // namespace rddi
