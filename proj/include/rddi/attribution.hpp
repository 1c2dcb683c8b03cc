#pragma once

#include <string>
#include <vector>

#include "rddi/eigen.hpp"
#include "rddi/kernel.hpp"
#include "rddi/neuralnet.hpp"

namespace rddi {

struct AttributionMap {
    int n = 0;
    std::vector<double> channel0;   // N x N, row-major
    std::vector<double> channel1;   // N x N, row-major
    std::vector<double> collapsed;  // channel0 + channel1, elementwise
    int target_index = 0;
    int steps = 0;
    std::string baseline_id;
    double completeness_residual = 0.0;
};

// Scale on which the attribution objective compares predictions: the raw
// model output (log decay rate) or the decay rate itself, exp(output).
// Magnitude comparisons between sub- and superradiant targets are only
// meaningful on the rate scale, where the label compression of the
// logarithm is undone.
enum class ObjectiveScale { log_rate, rate };

// Right-endpoint Riemann integrated gradients from baseline to input for
// F(z) = -(g_t(z) - g_t(input))^2, where g_t is the target output on the
// chosen scale. Records the completeness residual
// |sum IG - (F(input) - F(baseline))| on the map.
AttributionMap integrated_gradients(const Model& model, const KernelImage& input,
                                    const KernelImage& baseline, int target_index,
                                    int steps = 1000,
                                    ObjectiveScale scale = ObjectiveScale::log_rate);

// (most subradiant, closest to the natural rate, most superradiant),
// 1-based; first index wins ties on |Gamma_m - gamma|.
struct CrossoverIndices {
    int subradiant = 1;
    int crossover = 1;
    int superradiant = 1;
};
CrossoverIndices crossover_indices(const EigenSpectrum& spectrum, double gamma = 1.0);

// Fraction of total |collapsed| attribution within |i - j| <= bandwidth
// of the diagonal; 1 when the map is identically zero.
double band_fraction(const AttributionMap& map, int bandwidth);

// Max |collapsed| value per map.
std::vector<double> magnitude_summary(const std::vector<AttributionMap>& maps);

}  // namespace rddi
