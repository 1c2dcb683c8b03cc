// Wall-time comparison of the serial and OpenMP paths for the two hot
// loops: spectrum batch generation and batch-gradient accumulation.
// Both paths must produce bit-identical results; verified here as well.

#include <chrono>
#include <cstdio>

#include "rddi/dataset.hpp"
#include "rddi/neuralnet.hpp"
#include "rddi/parallel.hpp"

using namespace rddi;

namespace {

double seconds(auto fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

bool same_dataset(const Dataset& a, const Dataset& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i].image.channel0 != b.samples[i].image.channel0 ||
            a.samples[i].image.channel1 != b.samples[i].image.channel1 ||
            a.samples[i].label != b.samples[i].label)
            return false;
    return true;
}

bool same_grads(const Gradients& a, const Gradients& b) {
    return a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2 && a.w3 == b.w3 &&
           a.b3 == b.b3 && a.w4 == b.w4 && a.b4 == b.b4;
}

}  // namespace

int main() {
    constexpr int n_atoms = 32;
    constexpr uint64_t n_samples = 2000;

    set_max_threads(1);
    const int workers = [] {
        set_max_threads(0);
        return max_threads();
    }();
    std::printf("workers available: %d\n\n", workers);

    Dataset serial_ds, parallel_ds;
    set_max_threads(1);
    const double t_gen_serial =
        seconds([&] { serial_ds = generate(n_atoms, n_samples, 0.1, 1.0, 42); });
    set_max_threads(0);
    const double t_gen_parallel =
        seconds([&] { parallel_ds = generate(n_atoms, n_samples, 0.1, 1.0, 42); });
    std::printf("spectrum batch (%llu kernels, N=%d)\n",
                static_cast<unsigned long long>(n_samples), n_atoms);
    std::printf("  serial   %8.3f s\n", t_gen_serial);
    std::printf("  parallel %8.3f s   speedup %.2fx   bit-identical: %s\n\n",
                t_gen_parallel, t_gen_serial / t_gen_parallel,
                same_dataset(serial_ds, parallel_ds) ? "yes" : "NO");

    const Model model = Model::init(ModelConfig{n_atoms, 7});
    std::vector<uint64_t> batch(parallel_ds.samples.size());
    for (size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    Gradients gs = Gradients::zeros(model.config);
    Gradients gp = Gradients::zeros(model.config);

    set_max_threads(1);
    const double t_grad_serial =
        seconds([&] { accumulate_batch(model, parallel_ds, batch, gs); });
    set_max_threads(0);
    const double t_grad_parallel =
        seconds([&] { accumulate_batch(model, parallel_ds, batch, gp); });
    std::printf("batch gradients (%zu samples, %zu parameters)\n", batch.size(),
                model.parameter_count());
    std::printf("  serial   %8.3f s\n", t_grad_serial);
    std::printf("  parallel %8.3f s   speedup %.2fx   bit-identical: %s\n",
                t_grad_parallel, t_grad_serial / t_grad_parallel,
                same_grads(gs, gp) ? "yes" : "NO");

    return same_dataset(serial_ds, parallel_ds) && same_grads(gs, gp) ? 0 : 1;
}
