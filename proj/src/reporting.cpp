#include "rddi/reporting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "rddi/attribution.hpp"
#include "rddi/dataset.hpp"
#include "rddi/eigen.hpp"
#include "rddi/kernel.hpp"
#include "rddi/neuralnet.hpp"
#include "rddi/parallel.hpp"

namespace fs = std::filesystem;

namespace rddi::report {

namespace {

std::string format_double(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

std::array<double, 3> parse_vec3(const std::string& text, const std::string& key) {
    std::array<double, 3> v{};
    std::istringstream in(text);
    std::string part;
    for (int i = 0; i < 3; ++i) {
        if (!std::getline(in, part, ','))
            throw std::invalid_argument("config: " + key + " needs three comma-separated values");
        v[static_cast<size_t>(i)] = std::stod(part);
    }
    if (std::getline(in, part, ','))
        throw std::invalid_argument("config: " + key + " has more than three components");
    return v;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) out.push_back(std::stoi(part));
    return out;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

DipoleGeometry geometry_from(const RunConfig& c, double spacing) {
    DipoleGeometry g;
    g.n_atoms = c.n_atoms;
    g.spacing = spacing;
    g.axis = parse_vec3(c.axis, "axis");
    g.dipole = parse_vec3(c.dipole, "dipole");
    g.gamma = c.gamma;
    g.validate();
    return g;
}

// Seed derivation: one master seed fans out to the per-stage generators.
uint64_t data_seed(const RunConfig& c) { return c.seed; }
uint64_t split_seed(const RunConfig& c) { return c.seed + 1; }
uint64_t init_seed(const RunConfig& c) { return c.seed + 2; }
uint64_t shuffle_seed(const RunConfig& c) { return c.seed + 3; }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

void prepare(const RunConfig& config, const char* command) {
    set_max_threads(config.threads);
    fs::create_directories(config.output_dir);
    config.write(config.output_dir + "/" + command + "_config.txt");
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k = {
        "n_atoms",       "spacing",     "spacing_min",     "spacing_max", "spacing_points",
        "axis",          "dipole",      "gamma",           "count",       "train_fraction",
        "dataset_path",  "checkpoint_path", "output_dir",  "learning_rate", "batch_size",
        "epochs",        "ig_steps",    "bandwidth",       "targets",     "seed",
        "threads"};
    return k;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "n_atoms") n_atoms = std::stoi(value);
    else if (key == "spacing") spacing = std::stod(value);
    else if (key == "spacing_min") spacing_min = std::stod(value);
    else if (key == "spacing_max") spacing_max = std::stod(value);
    else if (key == "spacing_points") spacing_points = std::stoi(value);
    else if (key == "axis") axis = value;
    else if (key == "dipole") dipole = value;
    else if (key == "gamma") gamma = std::stod(value);
    else if (key == "count") count = std::stoull(value);
    else if (key == "train_fraction") train_fraction = std::stod(value);
    else if (key == "dataset_path") dataset_path = value;
    else if (key == "checkpoint_path") checkpoint_path = value;
    else if (key == "output_dir") output_dir = value;
    else if (key == "learning_rate") learning_rate = std::stod(value);
    else if (key == "batch_size") batch_size = std::stoi(value);
    else if (key == "epochs") epochs = std::stoi(value);
    else if (key == "ig_steps") ig_steps = std::stoi(value);
    else if (key == "bandwidth") bandwidth = std::stoi(value);
    else if (key == "targets") targets = value;
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "threads") threads = std::stoi(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    RunConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: " + path + ":" + std::to_string(line_no) +
                                        ": expected key=value");
        config.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    if (const char* env = std::getenv("RDDI_OUTPUT_DIR")) config.output_dir = env;
    return config;
}

std::string RunConfig::serialized() const {
    std::ostringstream out;
    out << "n_atoms = " << n_atoms << "\n";
    out << "spacing = " << format_double(spacing) << "\n";
    out << "spacing_min = " << format_double(spacing_min) << "\n";
    out << "spacing_max = " << format_double(spacing_max) << "\n";
    out << "spacing_points = " << spacing_points << "\n";
    out << "axis = " << axis << "\n";
    out << "dipole = " << dipole << "\n";
    out << "gamma = " << format_double(gamma) << "\n";
    out << "count = " << count << "\n";
    out << "train_fraction = " << format_double(train_fraction) << "\n";
    out << "dataset_path = " << resolved_dataset_path() << "\n";
    out << "checkpoint_path = " << resolved_checkpoint_path() << "\n";
    out << "output_dir = " << output_dir << "\n";
    out << "learning_rate = " << format_double(learning_rate) << "\n";
    out << "batch_size = " << batch_size << "\n";
    out << "epochs = " << epochs << "\n";
    out << "ig_steps = " << ig_steps << "\n";
    out << "bandwidth = " << bandwidth << "\n";
    out << "targets = " << targets << "\n";
    out << "seed = " << seed << "\n";
    out << "threads = " << threads << "\n";
    return out.str();
}

void RunConfig::write(const std::string& path) const {
    auto out = open_out(path);
    out << "# resolved run configuration\n" << serialized();
}

std::string RunConfig::resolved_dataset_path() const {
    return dataset_path.empty() ? output_dir + "/dataset.bin" : dataset_path;
}

std::string RunConfig::resolved_checkpoint_path() const {
    return checkpoint_path.empty() ? output_dir + "/model.ckpt" : checkpoint_path;
}

uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("fnv1a_file: cannot open " + path);
    uint64_t hash = 0xcbf29ce484222325ULL;
    char buffer[1 << 16];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    return hash;
}

void write_ppm(const std::string& path, const std::vector<double>& values, int n) {
    if (values.size() != static_cast<size_t>(n) * n)
        throw std::invalid_argument("write_ppm: values must be n x n");
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, std::abs(v));

    auto out = open_out(path);
    out << "P3\n";
    out << "# diverging ramp: -1 blue (0,0,255), 0 mid-gray (128,128,128), +1 red (255,0,0);"
           " linear in value/max|value|\n";
    out << n << " " << n << "\n255\n";
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = peak == 0.0 ? 0.0 : values[static_cast<size_t>(i) * n + j] / peak;
            int r = 128, g = 128, b = 128;
            if (v > 0.0) {
                r = static_cast<int>(std::lround(128 + v * 127));
                g = static_cast<int>(std::lround(128 - v * 128));
                b = g;
            } else if (v < 0.0) {
                b = static_cast<int>(std::lround(128 - v * 127));
                g = static_cast<int>(std::lround(128 + v * 128));
                r = g;
            }
            out << r << " " << g << " " << b << (j + 1 < n ? " " : "\n");
        }
    }
    if (!out) throw std::runtime_error("write_ppm: write failed for " + path);
}

void cmd_spectrum(const RunConfig& config) {
    prepare(config, "spectrum");
    if (config.spacing_points < 1)
        throw std::invalid_argument("spectrum: spacing_points must be >= 1");

    auto out = open_out(config.output_dir + "/spectrum.csv");
    out << "# schema: spectrum v1\n";
    out << "spacing,m,Gamma_m,shift_m\n";
    out << std::setprecision(17);
    for (int p = 0; p < config.spacing_points; ++p) {
        const double spacing =
            config.spacing_points == 1
                ? config.spacing_min
                : config.spacing_min + (config.spacing_max - config.spacing_min) * p /
                                           (config.spacing_points - 1);
        EigenSpectrum spectrum;
        try {
            spectrum = decay_spectrum(build_kernel(geometry_from(config, spacing)));
        } catch (const std::exception& e) {
            throw std::runtime_error("spectrum: solver failed at spacing " +
                                     format_double(spacing) + ": " + e.what());
        }
        for (int m = 0; m < config.n_atoms; ++m)
            out << spacing << "," << (m + 1) << "," << spectrum.decay_rates[static_cast<size_t>(m)]
                << "," << spectrum.shifts[static_cast<size_t>(m)] << "\n";
    }
}

void cmd_dataset(const RunConfig& config) {
    prepare(config, "dataset");
    DipoleGeometry prototype = geometry_from(config, config.spacing_min);
    const Dataset ds = generate(config.n_atoms, config.count, config.spacing_min,
                                config.spacing_max, data_seed(config), prototype);
    save(ds, config.resolved_dataset_path());
}

void cmd_train(const RunConfig& config) {
    prepare(config, "train");
    const Dataset full = load(config.resolved_dataset_path());
    const auto [train_set, test_set] = split(full, config.train_fraction, split_seed(config));

    ModelConfig mc{static_cast<int>(full.header.n_atoms), init_seed(config)};
    Model model = Model::init(mc);
    TrainConfig tc;
    tc.learning_rate = config.learning_rate;
    tc.batch_size = config.batch_size;
    tc.epochs = config.epochs;
    tc.shuffle_seed = shuffle_seed(config);
    const TrainResult history = train(model, train_set, &test_set, tc);

    save_checkpoint(model, config.resolved_checkpoint_path());
    auto out = open_out(config.output_dir + "/loss_history.csv");
    out << "# schema: loss_history v1\n";
    out << "epoch,train_loss,test_loss\n";
    out << std::setprecision(17);
    for (size_t e = 0; e < history.train_loss.size(); ++e)
        out << (e + 1) << "," << history.train_loss[e] << "," << history.test_loss[e] << "\n";
}

void cmd_eval(const RunConfig& config) {
    prepare(config, "eval");
    const Dataset full = load(config.resolved_dataset_path());
    const auto [train_set, test_set] = split(full, config.train_fraction, split_seed(config));
    const Model model = load_checkpoint(config.resolved_checkpoint_path());
    if (model.config.n_atoms != static_cast<int>(full.header.n_atoms))
        throw std::runtime_error("eval: checkpoint and dataset disagree on n_atoms");

    auto out = open_out(config.output_dir + "/eval.csv");
    out << "# schema: eval v1\n";
    out << "spacing,m,true_log_rate,predicted_log_rate\n";
    out << std::setprecision(17);
    for (const Sample& sample : test_set.samples) {
        const std::vector<double> pred = forward(model, sample.image);
        for (int m = 0; m < model.config.n_atoms; ++m)
            out << sample.spacing << "," << (m + 1) << "," << sample.label[static_cast<size_t>(m)]
                << "," << pred[static_cast<size_t>(m)] << "\n";
    }
}

void cmd_attribute(const RunConfig& config) {
    prepare(config, "attribute");
    const Model model = load_checkpoint(config.resolved_checkpoint_path());
    if (model.config.n_atoms != config.n_atoms)
        throw std::runtime_error("attribute: checkpoint n_atoms does not match config");

    const InteractionKernel kernel = build_kernel(geometry_from(config, config.spacing));
    const KernelImage input = to_image(kernel);
    const KernelImage baseline = baseline_image(config.n_atoms, config.gamma);

    std::vector<int> target_list;  // 0-based
    if (config.targets.empty()) {
        const CrossoverIndices ci = crossover_indices(decay_spectrum(kernel), config.gamma);
        target_list = {ci.subradiant - 1, ci.crossover - 1, ci.superradiant - 1};
    } else {
        for (int t : parse_int_list(config.targets)) target_list.push_back(t - 1);
    }
    for (int t : target_list)
        if (t < 0 || t >= config.n_atoms)
            throw std::out_of_range("attribute: target index out of range");

    std::vector<AttributionMap> maps(target_list.size());
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
    for (int64_t i = 0; i < static_cast<int64_t>(target_list.size()); ++i)
        maps[static_cast<size_t>(i)] = integrated_gradients(
            model, input, baseline, target_list[static_cast<size_t>(i)], config.ig_steps);

    const std::vector<double> peaks = magnitude_summary(maps);
    auto metrics = open_out(config.output_dir + "/attribution_metrics.csv");
    metrics << "# schema: attribution_metrics v1\n";
    metrics << "target_m,band_fraction,max_abs_attribution,completeness_residual\n";
    metrics << std::setprecision(17);

    for (size_t i = 0; i < maps.size(); ++i) {
        const AttributionMap& map = maps[i];
        const int m1 = map.target_index + 1;
        const std::string stem = config.output_dir + "/attribution_m" + std::to_string(m1);
        auto csv = open_out(stem + ".csv");
        csv << "# schema: attribution v1\n";
        csv << "i,j,channel0,channel1,collapsed\n";
        csv << std::setprecision(17);
        for (int r = 0; r < map.n; ++r)
            for (int c = 0; c < map.n; ++c) {
                const size_t idx = static_cast<size_t>(r) * map.n + c;
                csv << (r + 1) << "," << (c + 1) << "," << map.channel0[idx] << ","
                    << map.channel1[idx] << "," << map.collapsed[idx] << "\n";
            }
        write_ppm(stem + ".ppm", map.collapsed, map.n);
        metrics << m1 << "," << band_fraction(map, config.bandwidth) << "," << peaks[i] << ","
                << map.completeness_residual << "\n";
    }
}

void cmd_report(const RunConfig& config) {
    prepare(config, "report");
    const std::string manifest_path = config.output_dir + "/manifest.txt";
    auto manifest = open_out(manifest_path);
    manifest << "# rddi report manifest v1 (fnv1a-64)\n";

    struct Stage {
        const char* name;
        std::function<void()> run;
        std::vector<std::string> outputs;
    };
    const std::string dir = config.output_dir;
    std::vector<std::string> attr_outputs = {dir + "/attribute_config.txt",
                                             dir + "/attribution_metrics.csv"};
    {
        std::vector<int> target_list;
        if (config.targets.empty()) {
            const CrossoverIndices ci = crossover_indices(
                decay_spectrum(build_kernel(geometry_from(config, config.spacing))), config.gamma);
            target_list = {ci.subradiant, ci.crossover, ci.superradiant};
        } else {
            target_list = parse_int_list(config.targets);
        }
        for (int m1 : target_list) {
            attr_outputs.push_back(dir + "/attribution_m" + std::to_string(m1) + ".csv");
            attr_outputs.push_back(dir + "/attribution_m" + std::to_string(m1) + ".ppm");
        }
    }

    std::vector<Stage> stages = {
        {"spectrum", [&] { cmd_spectrum(config); },
         {dir + "/spectrum_config.txt", dir + "/spectrum.csv"}},
        {"dataset", [&] { cmd_dataset(config); },
         {dir + "/dataset_config.txt", config.resolved_dataset_path()}},
        {"train", [&] { cmd_train(config); },
         {dir + "/train_config.txt", config.resolved_checkpoint_path(),
          dir + "/loss_history.csv"}},
        {"eval", [&] { cmd_eval(config); }, {dir + "/eval_config.txt", dir + "/eval.csv"}},
        {"attribute", [&] { cmd_attribute(config); }, attr_outputs},
    };

    for (Stage& stage : stages) {
        try {
            stage.run();
        } catch (const std::exception& e) {
            manifest << "stage " << stage.name << " failed: " << e.what() << "\n";
            manifest.flush();
            throw;
        }
        manifest << "stage " << stage.name << " ok\n";
        for (const std::string& path : stage.outputs) {
            std::ostringstream hex;
            hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a_file(path);
            manifest << "file " << hex.str() << " " << path << "\n";
        }
        manifest.flush();
    }
}

}  // namespace rddi::report
