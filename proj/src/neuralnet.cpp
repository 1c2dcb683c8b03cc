#include "rddi/neuralnet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rddi/parallel.hpp"
#include "rddi/rng.hpp"

namespace rddi {

void ModelConfig::validate() const {
    if (n_atoms < 1) throw std::invalid_argument("ModelConfig: n_atoms must be >= 1");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
        throw std::invalid_argument("TrainConfig: moment decays must be in (0, 1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("TrainConfig: epsilon must be > 0");
}

namespace {

struct Shapes {
    int in, c1, d, out;
    explicit Shapes(const ModelConfig& c)
        : in(c.input_size()), c1(c.conv_filters()), d(c.dense_width()), out(c.output_size()) {}
};

void alloc_like(const ModelConfig& config, std::vector<double>& w1, std::vector<double>& b1,
                std::vector<double>& w2, std::vector<double>& b2, std::vector<double>& w3,
                std::vector<double>& b3, std::vector<double>& w4, std::vector<double>& b4) {
    const Shapes s(config);
    w1.assign(static_cast<size_t>(s.c1) * s.in, 0.0);
    b1.assign(static_cast<size_t>(s.c1), 0.0);
    w2.assign(static_cast<size_t>(s.d) * s.c1, 0.0);
    b2.assign(static_cast<size_t>(s.d), 0.0);
    w3.assign(static_cast<size_t>(s.d) * s.d, 0.0);
    b3.assign(static_cast<size_t>(s.d), 0.0);
    w4.assign(static_cast<size_t>(s.out) * s.d, 0.0);
    b4.assign(static_cast<size_t>(s.out), 0.0);
}

// y = W x + b, row-major W (rows x cols).
void affine(const std::vector<double>& w, const std::vector<double>& b, int rows, int cols,
            const double* x, double* y) {
    for (int i = 0; i < rows; ++i) {
        const double* row = w.data() + static_cast<size_t>(i) * cols;
        double acc = b[static_cast<size_t>(i)];
        for (int j = 0; j < cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

// x += W^T g.
void affine_transpose_add(const std::vector<double>& w, int rows, int cols, const double* g,
                          double* x) {
    for (int i = 0; i < rows; ++i) {
        const double* row = w.data() + static_cast<size_t>(i) * cols;
        const double gi = g[i];
        if (gi == 0.0) continue;
        for (int j = 0; j < cols; ++j) x[j] += row[j] * gi;
    }
}

void relu_inplace(std::vector<double>& v) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
}

struct Cache {
    std::vector<double> x, z1, z2, z3, y;  // z* kept post-activation; sign decides relu'
};

void run_forward(const Model& model, const std::vector<double>& input, Cache& c) {
    const Shapes s(model.config);
    if (static_cast<int>(input.size()) != s.in)
        throw std::invalid_argument("forward: input size does not match model");
    c.x = input;
    c.z1.resize(static_cast<size_t>(s.c1));
    c.z2.resize(static_cast<size_t>(s.d));
    c.z3.resize(static_cast<size_t>(s.d));
    c.y.resize(static_cast<size_t>(s.out));
    affine(model.w1, model.b1, s.c1, s.in, c.x.data(), c.z1.data());
    relu_inplace(c.z1);
    affine(model.w2, model.b2, s.d, s.c1, c.z1.data(), c.z2.data());
    relu_inplace(c.z2);
    affine(model.w3, model.b3, s.d, s.d, c.z2.data(), c.z3.data());
    relu_inplace(c.z3);
    affine(model.w4, model.b4, s.out, s.d, c.z3.data(), c.y.data());
}

// Backpropagates gy = dObjective/dy. Accumulates parameter gradients into
// grads (when given) and writes the input gradient into gx (when given).
void backprop(const Model& model, const Cache& c, const std::vector<double>& gy, Gradients* grads,
              std::vector<double>* gx) {
    const Shapes s(model.config);
    std::vector<double> g3(static_cast<size_t>(s.d), 0.0);
    std::vector<double> g2(static_cast<size_t>(s.d), 0.0);
    std::vector<double> g1(static_cast<size_t>(s.c1), 0.0);

    if (grads) {
        for (int i = 0; i < s.out; ++i) {
            grads->b4[static_cast<size_t>(i)] += gy[static_cast<size_t>(i)];
            double* row = grads->w4.data() + static_cast<size_t>(i) * s.d;
            const double gi = gy[static_cast<size_t>(i)];
            for (int j = 0; j < s.d; ++j) row[j] += gi * c.z3[static_cast<size_t>(j)];
        }
    }
    affine_transpose_add(model.w4, s.out, s.d, gy.data(), g3.data());
    for (int j = 0; j < s.d; ++j)
        if (c.z3[static_cast<size_t>(j)] <= 0.0) g3[static_cast<size_t>(j)] = 0.0;

    if (grads) {
        for (int i = 0; i < s.d; ++i) {
            grads->b3[static_cast<size_t>(i)] += g3[static_cast<size_t>(i)];
            double* row = grads->w3.data() + static_cast<size_t>(i) * s.d;
            const double gi = g3[static_cast<size_t>(i)];
            if (gi == 0.0) continue;
            for (int j = 0; j < s.d; ++j) row[j] += gi * c.z2[static_cast<size_t>(j)];
        }
    }
    affine_transpose_add(model.w3, s.d, s.d, g3.data(), g2.data());
    for (int j = 0; j < s.d; ++j)
        if (c.z2[static_cast<size_t>(j)] <= 0.0) g2[static_cast<size_t>(j)] = 0.0;

    if (grads) {
        for (int i = 0; i < s.d; ++i) {
            grads->b2[static_cast<size_t>(i)] += g2[static_cast<size_t>(i)];
            double* row = grads->w2.data() + static_cast<size_t>(i) * s.c1;
            const double gi = g2[static_cast<size_t>(i)];
            if (gi == 0.0) continue;
            for (int j = 0; j < s.c1; ++j) row[j] += gi * c.z1[static_cast<size_t>(j)];
        }
    }
    affine_transpose_add(model.w2, s.d, s.c1, g2.data(), g1.data());
    for (int j = 0; j < s.c1; ++j)
        if (c.z1[static_cast<size_t>(j)] <= 0.0) g1[static_cast<size_t>(j)] = 0.0;

    if (grads) {
        for (int i = 0; i < s.c1; ++i) {
            grads->b1[static_cast<size_t>(i)] += g1[static_cast<size_t>(i)];
            double* row = grads->w1.data() + static_cast<size_t>(i) * s.in;
            const double gi = g1[static_cast<size_t>(i)];
            if (gi == 0.0) continue;
            for (int j = 0; j < s.in; ++j) row[j] += gi * c.x[static_cast<size_t>(j)];
        }
    }
    if (gx) {
        gx->assign(static_cast<size_t>(s.in), 0.0);
        affine_transpose_add(model.w1, s.c1, s.in, g1.data(), gx->data());
    }
}

std::vector<double> flatten(const KernelImage& image) {
    std::vector<double> x;
    x.reserve(2 * image.pixels());
    x.insert(x.end(), image.channel0.begin(), image.channel0.end());
    x.insert(x.end(), image.channel1.begin(), image.channel1.end());
    return x;
}

}  // namespace

Model Model::zeros(const ModelConfig& config) {
    config.validate();
    Model m;
    m.config = config;
    alloc_like(config, m.w1, m.b1, m.w2, m.b2, m.w3, m.b3, m.w4, m.b4);
    return m;
}

Model Model::init(const ModelConfig& config) {
    Model m = zeros(config);
    Rng rng(config.init_seed);
    auto fill = [&rng](std::vector<double>& w, int fan_in) {
        const double limit = std::sqrt(6.0 / fan_in);
        for (double& v : w) v = rng.uniform(-limit, limit);
    };
    const Shapes s(config);
    fill(m.w1, s.in);
    fill(m.w2, s.c1);
    fill(m.w3, s.d);
    fill(m.w4, s.d);
    return m;
}

size_t Model::parameter_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size() + w4.size() +
           b4.size();
}

Gradients Gradients::zeros(const ModelConfig& config) {
    Gradients g;
    alloc_like(config, g.w1, g.b1, g.w2, g.b2, g.w3, g.b3, g.w4, g.b4);
    return g;
}

namespace {

template <typename T>
std::array<std::vector<double> T::*, 8> param_members() {
    return {&T::w1, &T::b1, &T::w2, &T::b2, &T::w3, &T::b3, &T::w4, &T::b4};
}

}  // namespace

void Gradients::clear() {
    for (auto member : param_members<Gradients>()) std::fill((this->*member).begin(), (this->*member).end(), 0.0);
}

void Gradients::add(const Gradients& other) {
    for (auto member : param_members<Gradients>()) {
        auto& dst = this->*member;
        const auto& src = other.*member;
        for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
}

void Gradients::scale(double s) {
    for (auto member : param_members<Gradients>())
        for (double& v : this->*member) v *= s;
}

std::vector<double> forward_flat(const Model& model, const std::vector<double>& input) {
    Cache c;
    run_forward(model, input, c);
    return c.y;
}

std::vector<double> forward(const Model& model, const KernelImage& image) {
    return forward_flat(model, flatten(image));
}

double loss(const std::vector<double>& prediction, const std::vector<double>& label) {
    if (prediction.size() != label.size())
        throw std::invalid_argument("loss: prediction/label length mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < prediction.size(); ++i) {
        const double d = prediction[i] - label[i];
        acc += d * d;
    }
    return acc / static_cast<double>(prediction.size());
}

void backward(const Model& model, const KernelImage& image, const std::vector<double>& label,
              Gradients& grads) {
    if (static_cast<int>(label.size()) != model.config.output_size())
        throw std::invalid_argument("backward: label length does not match model");
    grads.clear();
    Cache c;
    run_forward(model, flatten(image), c);
    const int out = model.config.output_size();
    std::vector<double> gy(static_cast<size_t>(out));
    for (int i = 0; i < out; ++i)
        gy[static_cast<size_t>(i)] =
            2.0 * (c.y[static_cast<size_t>(i)] - label[static_cast<size_t>(i)]) / out;
    backprop(model, c, gy, &grads, nullptr);
}

std::vector<double> input_gradient_flat(const Model& model, const std::vector<double>& input,
                                        int target_index, double reference_value) {
    const int out = model.config.output_size();
    if (target_index < 0 || target_index >= out)
        throw std::out_of_range("input_gradient: target_index out of range");
    Cache c;
    run_forward(model, input, c);
    std::vector<double> gy(static_cast<size_t>(out), 0.0);
    // F(z) = -(f_t(z) - r)^2, so dF/df_t = -2 (f_t - r).
    gy[static_cast<size_t>(target_index)] =
        -2.0 * (c.y[static_cast<size_t>(target_index)] - reference_value);
    std::vector<double> gx;
    backprop(model, c, gy, nullptr, &gx);
    return gx;
}

std::vector<double> input_gradient(const Model& model, const KernelImage& image, int target_index,
                                   double reference_value) {
    return input_gradient_flat(model, flatten(image), target_index, reference_value);
}

namespace {

double accumulate_chunk(const Model& model, const Dataset& data,
                        const std::vector<uint64_t>& batch, size_t lo, size_t hi,
                        Gradients& grads) {
    Cache c;
    const int out = model.config.output_size();
    std::vector<double> gy(static_cast<size_t>(out));
    double loss_sum = 0.0;
    for (size_t k = lo; k < hi; ++k) {
        const Sample& sample = data.samples[batch[k]];
        run_forward(model, flatten(sample.image), c);
        double l = 0.0;
        for (int i = 0; i < out; ++i) {
            const double d = c.y[static_cast<size_t>(i)] - sample.label[static_cast<size_t>(i)];
            l += d * d;
            gy[static_cast<size_t>(i)] = 2.0 * d / out;
        }
        loss_sum += l / out;
        backprop(model, c, gy, &grads, nullptr);
    }
    return loss_sum;
}

constexpr size_t kBatchChunks = 16;

}  // namespace

double accumulate_batch_reference(const Model& model, const Dataset& data,
                                  const std::vector<uint64_t>& batch, Gradients& grads) {
    grads.clear();
    const double loss_sum = accumulate_chunk(model, data, batch, 0, batch.size(), grads);
    grads.scale(1.0 / static_cast<double>(batch.size()));
    return loss_sum / static_cast<double>(batch.size());
}

double accumulate_batch(const Model& model, const Dataset& data,
                        const std::vector<uint64_t>& batch, Gradients& grads) {
    grads.clear();
    if (batch.empty()) throw std::invalid_argument("accumulate_batch: empty batch");
    const size_t chunks = std::min(kBatchChunks, batch.size());
    std::vector<Gradients> partial;
    partial.reserve(chunks);
    for (size_t i = 0; i < chunks; ++i) partial.push_back(Gradients::zeros(model.config));
    std::vector<double> losses(chunks, 0.0);

#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int64_t ci = 0; ci < static_cast<int64_t>(chunks); ++ci) {
        const size_t lo = batch.size() * static_cast<size_t>(ci) / chunks;
        const size_t hi = batch.size() * (static_cast<size_t>(ci) + 1) / chunks;
        losses[static_cast<size_t>(ci)] =
            accumulate_chunk(model, data, batch, lo, hi, partial[static_cast<size_t>(ci)]);
    }

    // Fixed reduction order keeps the sum worker-count independent.
    double loss_sum = 0.0;
    for (size_t i = 0; i < chunks; ++i) {
        grads.add(partial[i]);
        loss_sum += losses[i];
    }
    grads.scale(1.0 / static_cast<double>(batch.size()));
    return loss_sum / static_cast<double>(batch.size());
}

double mean_loss(const Model& model, const Dataset& data) {
    if (data.samples.empty()) throw std::invalid_argument("mean_loss: empty dataset");
    const size_t count = data.samples.size();
    const size_t chunks = std::min<size_t>(64, count);
    std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int64_t ci = 0; ci < static_cast<int64_t>(chunks); ++ci) {
        const size_t lo = count * static_cast<size_t>(ci) / chunks;
        const size_t hi = count * (static_cast<size_t>(ci) + 1) / chunks;
        double acc = 0.0;
        for (size_t i = lo; i < hi; ++i) {
            const Sample& s = data.samples[i];
            acc += loss(forward(model, s.image), s.label);
        }
        partial[static_cast<size_t>(ci)] = acc;
    }
    double acc = 0.0;
    for (double p : partial) acc += p;
    return acc / static_cast<double>(count);
}

TrainResult train(Model& model, const Dataset& train_set, const Dataset* test_set,
                  const TrainConfig& config) {
    config.validate();
    if (train_set.samples.empty()) throw std::invalid_argument("train: empty training set");

    Gradients g = Gradients::zeros(model.config);
    Gradients m1 = Gradients::zeros(model.config);
    Gradients m2 = Gradients::zeros(model.config);

    std::vector<uint64_t> order(train_set.samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(config.shuffle_seed);

    const auto members = param_members<Gradients>();
    const auto model_members = param_members<Model>();

    TrainResult result;
    int64_t step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        size_t n_batches = 0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
            const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
            const std::vector<uint64_t> batch(order.begin() + static_cast<int64_t>(start),
                                              order.begin() + static_cast<int64_t>(end));
            epoch_loss += accumulate_batch(model, train_set, batch, g);
            ++n_batches;

            ++step;
            const double corr1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            for (size_t a = 0; a < members.size(); ++a) {
                auto& gv = g.*members[a];
                auto& mv = m1.*members[a];
                auto& vv = m2.*members[a];
                auto& pv = model.*model_members[a];
                for (size_t i = 0; i < gv.size(); ++i) {
                    mv[i] = config.beta1 * mv[i] + (1.0 - config.beta1) * gv[i];
                    vv[i] = config.beta2 * vv[i] + (1.0 - config.beta2) * gv[i] * gv[i];
                    pv[i] -= config.learning_rate * (mv[i] / corr1) /
                             (std::sqrt(vv[i] / corr2) + config.epsilon);
                }
            }
        }
        epoch_loss /= static_cast<double>(n_batches);
        if (!std::isfinite(epoch_loss)) {
            std::ostringstream msg;
            msg << "train: loss diverged (non-finite) at epoch " << epoch;
            throw std::runtime_error(msg.str());
        }
        result.train_loss.push_back(epoch_loss);
        if (test_set) result.test_loss.push_back(mean_loss(model, *test_set));
    }
    return result;
}

namespace {
constexpr char kCheckpointMagic[8] = {'R', 'D', 'D', 'I', 'C', 'P', '0', '1'};
constexpr uint32_t kCheckpointVersion = 1;
}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    out.write(reinterpret_cast<const char*>(&kCheckpointVersion), sizeof(kCheckpointVersion));
    const uint32_t n_atoms = static_cast<uint32_t>(model.config.n_atoms);
    out.write(reinterpret_cast<const char*>(&n_atoms), sizeof(n_atoms));
    out.write(reinterpret_cast<const char*>(&model.config.init_seed), sizeof(model.config.init_seed));
    for (auto member : param_members<Model>()) {
        const auto& v = model.*member;
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[sizeof(kCheckpointMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kCheckpointVersion)
        throw std::runtime_error("load_checkpoint: unsupported version in " + path);
    uint32_t n_atoms = 0;
    uint64_t init_seed = 0;
    in.read(reinterpret_cast<char*>(&n_atoms), sizeof(n_atoms));
    in.read(reinterpret_cast<char*>(&init_seed), sizeof(init_seed));
    if (!in || n_atoms < 1) throw std::runtime_error("load_checkpoint: invalid header in " + path);

    Model model = Model::zeros(ModelConfig{static_cast<int>(n_atoms), init_seed});
    for (auto member : param_members<Model>()) {
        auto& v = model.*member;
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!in) throw std::runtime_error("load_checkpoint: truncated parameters in " + path);
    }
    in.peek();
    if (!in.eof()) throw std::runtime_error("load_checkpoint: trailing bytes in " + path);
    return model;
}

}  // namespace rddi
