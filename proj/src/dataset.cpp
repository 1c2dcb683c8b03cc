#include "rddi/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rddi/eigen.hpp"
#include "rddi/parallel.hpp"
#include "rddi/rng.hpp"

namespace rddi {

static_assert(std::endian::native == std::endian::little,
              "dataset format assumes a little-endian host");

Dataset generate(int n_atoms, uint64_t count, double spacing_min, double spacing_max,
                 uint64_t seed, const DipoleGeometry& prototype) {
    if (n_atoms < 1) throw std::invalid_argument("generate: n_atoms must be >= 1");
    if (count < 1) throw std::invalid_argument("generate: count must be >= 1");
    if (!(spacing_min > 0.0) || !(spacing_min <= spacing_max))
        throw std::invalid_argument("generate: need 0 < spacing_min <= spacing_max");

    Dataset ds;
    ds.header.n_atoms = static_cast<uint32_t>(n_atoms);
    ds.header.count = count;
    ds.header.spacing_min = spacing_min;
    ds.header.spacing_max = spacing_max;
    ds.header.seed = seed;

    // Spacings first, sequentially, so the draw order is independent of
    // how the spectra below are scheduled.
    Rng rng(seed);
    std::vector<double> spacings(count);
    for (auto& s : spacings) s = rng.uniform(spacing_min, spacing_max);

    ds.samples.resize(count);
    std::string failure;
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
    for (int64_t i = 0; i < static_cast<int64_t>(count); ++i) {
        DipoleGeometry geom = prototype;
        geom.n_atoms = n_atoms;
        geom.spacing = spacings[static_cast<size_t>(i)];
        try {
            const InteractionKernel kernel = build_kernel(geom);
            const EigenSpectrum spectrum = decay_spectrum(kernel);
            Sample& sample = ds.samples[static_cast<size_t>(i)];
            sample.image = to_image(kernel);
            sample.spacing = geom.spacing;
            sample.label.resize(static_cast<size_t>(n_atoms));
            for (int m = 0; m < n_atoms; ++m)
                sample.label[static_cast<size_t>(m)] =
                    std::log(spectrum.decay_rates[static_cast<size_t>(m)]);
        } catch (const std::exception& e) {
#pragma omp critical
            if (failure.empty()) {
                std::ostringstream msg;
                msg << "generate: eigensolver failed at spacing " << geom.spacing << ": "
                    << e.what();
                failure = msg.str();
            }
        }
    }
    if (!failure.empty()) throw std::runtime_error(failure);
    return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw std::invalid_argument("split: train_fraction must be in (0, 1)");
    const uint64_t count = dataset.header.count;
    const auto n_train = static_cast<uint64_t>(std::llround(train_fraction * static_cast<double>(count)));
    if (n_train == 0 || n_train == count)
        throw std::invalid_argument("split: a partition would be empty");

    std::vector<uint64_t> order(count);
    for (uint64_t i = 0; i < count; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    Dataset train, test;
    train.header = dataset.header;
    test.header = dataset.header;
    train.header.count = n_train;
    test.header.count = count - n_train;
    train.samples.reserve(n_train);
    test.samples.reserve(count - n_train);
    for (uint64_t i = 0; i < count; ++i) {
        const Sample& s = dataset.samples[order[i]];
        (i < n_train ? train : test).samples.push_back(s);
    }
    return {std::move(train), std::move(test)};
}

namespace {

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace

void save(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save: cannot open " + path);

    const DatasetHeader& h = dataset.header;
    out.write(DatasetHeader::kMagic, sizeof(DatasetHeader::kMagic));
    const uint32_t version = DatasetHeader::kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&h.n_atoms), sizeof(h.n_atoms));
    out.write(reinterpret_cast<const char*>(&h.count), sizeof(h.count));
    out.write(reinterpret_cast<const char*>(&h.spacing_min), sizeof(h.spacing_min));
    out.write(reinterpret_cast<const char*>(&h.spacing_max), sizeof(h.spacing_max));
    out.write(reinterpret_cast<const char*>(&h.seed), sizeof(h.seed));
    out.write(DatasetHeader::kLabelTransform, sizeof(DatasetHeader::kLabelTransform));

    for (const Sample& s : dataset.samples) {
        write_doubles(out, s.image.channel0);
        write_doubles(out, s.image.channel1);
        write_doubles(out, s.label);
        out.write(reinterpret_cast<const char*>(&s.spacing), sizeof(s.spacing));
    }
    if (!out) throw std::runtime_error("save: write failed for " + path);
}

Dataset load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load: cannot open " + path);

    char magic[sizeof(DatasetHeader::kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, DatasetHeader::kMagic, sizeof(magic)) != 0)
        throw std::runtime_error("load: bad magic in " + path);

    uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != DatasetHeader::kVersion)
        throw std::runtime_error("load: unsupported dataset version in " + path);

    Dataset ds;
    DatasetHeader& h = ds.header;
    in.read(reinterpret_cast<char*>(&h.n_atoms), sizeof(h.n_atoms));
    in.read(reinterpret_cast<char*>(&h.count), sizeof(h.count));
    in.read(reinterpret_cast<char*>(&h.spacing_min), sizeof(h.spacing_min));
    in.read(reinterpret_cast<char*>(&h.spacing_max), sizeof(h.spacing_max));
    in.read(reinterpret_cast<char*>(&h.seed), sizeof(h.seed));
    char transform[sizeof(DatasetHeader::kLabelTransform)];
    in.read(transform, sizeof(transform));
    if (!in) throw std::runtime_error("load: truncated header in " + path);
    if (std::memcmp(transform, DatasetHeader::kLabelTransform, sizeof(transform)) != 0)
        throw std::runtime_error("load: unknown label transform in " + path);
    if (h.n_atoms < 1) throw std::runtime_error("load: invalid n_atoms in " + path);

    const int n = static_cast<int>(h.n_atoms);
    const size_t pixels = static_cast<size_t>(n) * n;
    ds.samples.resize(h.count);
    for (Sample& s : ds.samples) {
        s.image.n = n;
        s.image.channel0.resize(pixels);
        s.image.channel1.resize(pixels);
        s.label.resize(static_cast<size_t>(n));
        read_doubles(in, s.image.channel0);
        read_doubles(in, s.image.channel1);
        read_doubles(in, s.label);
        in.read(reinterpret_cast<char*>(&s.spacing), sizeof(s.spacing));
        if (!in) throw std::runtime_error("load: payload shorter than header count in " + path);
    }
    in.peek();
    if (!in.eof()) throw std::runtime_error("load: payload longer than header count in " + path);
    return ds;
}

}  // namespace rddi
