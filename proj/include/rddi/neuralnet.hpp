#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rddi/dataset.hpp"
#include "rddi/kernel.hpp"

namespace rddi {

// Conv layer with filters spanning the whole two-channel image, so the
// conv stage is 4N weighted sums of the input; then two dense layers of
// width 2N and a linear output head of width N. ReLU everywhere except
// the head.
struct ModelConfig {
    int n_atoms = 0;
    uint64_t init_seed = 0;

    int input_size() const { return 2 * n_atoms * n_atoms; }
    int conv_filters() const { return 4 * n_atoms; }
    int dense_width() const { return 2 * n_atoms; }
    int output_size() const { return n_atoms; }

    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

struct Model {
    ModelConfig config;
    std::vector<double> w1, b1;  // conv: filters x input, filters
    std::vector<double> w2, b2;  // dense 1
    std::vector<double> w3, b3;  // dense 2
    std::vector<double> w4, b4;  // output head

    // He-style fan-in scaled uniform weights, zero biases.
    static Model init(const ModelConfig& config);
    static Model zeros(const ModelConfig& config);

    size_t parameter_count() const;
};

// Same shapes as Model; used for both gradients and optimizer moments.
struct Gradients {
    std::vector<double> w1, b1, w2, b2, w3, b3, w4, b4;

    static Gradients zeros(const ModelConfig& config);
    void clear();
    void add(const Gradients& other);
    void scale(double s);
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 64;
    int epochs = 50;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    uint64_t shuffle_seed = 0;

    void validate() const;
};

struct TrainResult {
    std::vector<double> train_loss;  // per epoch, averaged over batches
    std::vector<double> test_loss;   // per epoch; empty when no test set
};

std::vector<double> forward(const Model& model, const KernelImage& image);
std::vector<double> forward_flat(const Model& model, const std::vector<double>& input);

// Mean squared error over the N outputs.
double loss(const std::vector<double>& prediction, const std::vector<double>& label);

// Analytic gradients of loss(forward(image), label) for every parameter.
void backward(const Model& model, const KernelImage& image, const std::vector<double>& label,
              Gradients& grads);

// Gradient of F(z) = -(f_t(z) - reference_value)^2 with respect to every
// input pixel, flattened channel-major (channel 0 then channel 1).
std::vector<double> input_gradient(const Model& model, const KernelImage& image, int target_index,
                                   double reference_value);
std::vector<double> input_gradient_flat(const Model& model, const std::vector<double>& input,
                                        int target_index, double reference_value);

// Batch-gradient accumulation used by train(); exposed for the benchmark
// and the serial/parallel equivalence tests. The batch is split into a
// fixed number of chunks accumulated independently and reduced in chunk
// order, so the result is bit-identical for any worker count.
// Returns the mean per-sample loss of the batch.
double accumulate_batch(const Model& model, const Dataset& data, const std::vector<uint64_t>& batch,
                        Gradients& grads);

// Plain one-sample-at-a-time reference for the routine above.
double accumulate_batch_reference(const Model& model, const Dataset& data,
                                  const std::vector<uint64_t>& batch, Gradients& grads);

// Seeded mini-batch Adam. Throws if the loss becomes non-finite, naming
// the epoch. Deterministic for fixed seeds and any worker count.
TrainResult train(Model& model, const Dataset& train_set, const Dataset* test_set,
                  const TrainConfig& config);

double mean_loss(const Model& model, const Dataset& data);

void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace rddi
