#include "rddi/attribution.hpp"

#include <cmath>
#include <stdexcept>

namespace rddi {

AttributionMap integrated_gradients(const Model& model, const KernelImage& input,
                                    const KernelImage& baseline, int target_index, int steps,
                                    ObjectiveScale scale) {
    if (input.n != baseline.n)
        throw std::invalid_argument("integrated_gradients: input/baseline shape mismatch");
    if (input.n != model.config.n_atoms)
        throw std::invalid_argument("integrated_gradients: image does not match model");
    if (target_index < 0 || target_index >= model.config.output_size())
        throw std::out_of_range("integrated_gradients: target_index out of range");
    if (steps < 1) throw std::invalid_argument("integrated_gradients: steps must be >= 1");

    const size_t pixels = input.pixels();
    const size_t dim = 2 * pixels;
    std::vector<double> x(dim), xp(dim);
    for (size_t i = 0; i < dim; ++i) {
        x[i] = input.pixel(i);
        xp[i] = baseline.pixel(i);
    }

    const double f_input = forward_flat(model, x)[static_cast<size_t>(target_index)];
    const double reference =
        scale == ObjectiveScale::rate ? std::exp(f_input) : f_input;

    std::vector<double> ig(dim, 0.0);
    std::vector<double> z(dim);
    for (int k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) / steps;
        for (size_t i = 0; i < dim; ++i) z[i] = xp[i] + t * (x[i] - xp[i]);
        std::vector<double> grad;
        if (scale == ObjectiveScale::log_rate) {
            grad = input_gradient_flat(model, z, target_index, reference);
        } else {
            // dF/dz = -2 (r(z) - r(x)) r(z) df_t/dz with r = exp(f_t).
            // Asking input_gradient for reference f_t(z) + 1/2 yields the
            // bare df_t/dz, which is then rescaled.
            const double fz = forward_flat(model, z)[static_cast<size_t>(target_index)];
            grad = input_gradient_flat(model, z, target_index, fz + 0.5);
            const double factor = -2.0 * (std::exp(fz) - reference) * std::exp(fz);
            for (double& g : grad) g *= factor;
        }
        for (size_t i = 0; i < dim; ++i) ig[i] += grad[i] * (x[i] - xp[i]) / steps;
    }

    auto objective = [&](const std::vector<double>& v) {
        double g = forward_flat(model, v)[static_cast<size_t>(target_index)];
        if (scale == ObjectiveScale::rate) g = std::exp(g);
        const double d = g - reference;
        return -d * d;
    };
    double ig_sum = 0.0;
    for (double v : ig) ig_sum += v;
    const double delta = objective(x) - objective(xp);

    AttributionMap map;
    map.n = input.n;
    map.target_index = target_index;
    map.steps = steps;
    map.baseline_id = "noninteracting";
    map.completeness_residual = std::abs(ig_sum - delta);
    map.channel0.assign(ig.begin(), ig.begin() + static_cast<int64_t>(pixels));
    map.channel1.assign(ig.begin() + static_cast<int64_t>(pixels), ig.end());
    map.collapsed.resize(pixels);
    for (size_t i = 0; i < pixels; ++i) map.collapsed[i] = map.channel0[i] + map.channel1[i];
    return map;
}

CrossoverIndices crossover_indices(const EigenSpectrum& spectrum, double gamma) {
    const int n = static_cast<int>(spectrum.decay_rates.size());
    if (n < 1) throw std::invalid_argument("crossover_indices: empty spectrum");
    int best = 0;
    double best_dist = std::abs(spectrum.decay_rates[0] - gamma);
    for (int m = 1; m < n; ++m) {
        const double dist = std::abs(spectrum.decay_rates[static_cast<size_t>(m)] - gamma);
        if (dist < best_dist) {
            best = m;
            best_dist = dist;
        }
    }
    return CrossoverIndices{1, best + 1, n};
}

double band_fraction(const AttributionMap& map, int bandwidth) {
    if (bandwidth < 0) throw std::invalid_argument("band_fraction: bandwidth must be >= 0");
    double band = 0.0, total = 0.0;
    for (int i = 0; i < map.n; ++i)
        for (int j = 0; j < map.n; ++j) {
            const double v = std::abs(map.collapsed[static_cast<size_t>(i) * map.n + j]);
            total += v;
            if (std::abs(i - j) <= bandwidth) band += v;
        }
    return total == 0.0 ? 1.0 : band / total;
}

std::vector<double> magnitude_summary(const std::vector<AttributionMap>& maps) {
    if (maps.empty()) throw std::invalid_argument("magnitude_summary: no maps");
    std::vector<double> out;
    out.reserve(maps.size());
    for (const AttributionMap& map : maps) {
        double peak = 0.0;
        for (double v : map.collapsed) peak = std::max(peak, std::abs(v));
        out.push_back(peak);
    }
    return out;
}

}  // namespace rddi
