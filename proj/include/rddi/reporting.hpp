#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rddi::report {

// Plain key=value run configuration ('#' starts a comment). Unknown keys
// are rejected; every command writes its fully resolved config next to
// its outputs. RDDI_OUTPUT_DIR overrides output_dir.
struct RunConfig {
    int n_atoms = 32;
    double spacing = 0.25;
    double spacing_min = 0.1;
    double spacing_max = 1.0;
    int spacing_points = 50;
    std::string axis = "1,0,0";
    std::string dipole = "0,0,1";
    double gamma = 1.0;
    uint64_t count = 20000;
    double train_fraction = 0.9;
    std::string dataset_path;     // default: <output_dir>/dataset.bin
    std::string checkpoint_path;  // default: <output_dir>/model.ckpt
    std::string output_dir = "out";
    double learning_rate = 1e-3;
    int batch_size = 64;
    int epochs = 60;
    int ig_steps = 1000;
    int bandwidth = 2;
    std::string targets;  // comma-separated 1-based indices; empty = crossover triple
    uint64_t seed = 1;
    int threads = 0;

    static const std::vector<std::string>& keys();
    void apply(const std::string& key, const std::string& value);
    static RunConfig from_file(const std::string& path);
    std::string serialized() const;
    void write(const std::string& path) const;

    std::string resolved_dataset_path() const;
    std::string resolved_checkpoint_path() const;
};

uint64_t fnv1a_file(const std::string& path);

// Plain (P3) portable pixmap through a blue/mid-gray/red diverging ramp,
// linear in value / max|value|, zero at mid-gray.
void write_ppm(const std::string& path, const std::vector<double>& values, int n);

void cmd_spectrum(const RunConfig& config);
void cmd_dataset(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_eval(const RunConfig& config);
void cmd_attribute(const RunConfig& config);
void cmd_report(const RunConfig& config);

}  // namespace rddi::report
