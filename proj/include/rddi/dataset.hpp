#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rddi/geometry.hpp"
#include "rddi/kernel.hpp"

namespace rddi {

// One training pair: two-channel kernel image and the natural log of the
// ascending eigen-decay rates, in units of gamma.
struct Sample {
    KernelImage image;
    std::vector<double> label;
    double spacing = 0.0;
};

struct DatasetHeader {
    static constexpr char kMagic[8] = {'R', 'D', 'D', 'I', 'D', 'S', '0', '1'};
    static constexpr uint32_t kVersion = 1;
    static constexpr char kLabelTransform[16] = "log_e";  // natural log, zero padded

    uint32_t n_atoms = 0;
    uint64_t count = 0;
    double spacing_min = 0.0;
    double spacing_max = 0.0;
    uint64_t seed = 0;
};

struct Dataset {
    DatasetHeader header;
    std::vector<Sample> samples;
};

// Seeded corpus over spacings drawn uniformly in [spacing_min, spacing_max].
// The spacing list is drawn sequentially; spectra are computed in parallel.
// Byte-identical output for identical arguments.
Dataset generate(int n_atoms, uint64_t count, double spacing_min, double spacing_max,
                 uint64_t seed, const DipoleGeometry& prototype = {});

// Seeded shuffle into disjoint, exhaustive train/test partitions.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, uint64_t seed);

// Little-endian 64-bit floats; header, then per sample channel0, channel1,
// label, spacing. Lossless round trip.
void save(const Dataset& dataset, const std::string& path);
Dataset load(const std::string& path);

}  // namespace rddi
