#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rddi/reporting.hpp"

namespace {

using rddi::report::RunConfig;

// Each subcommand takes --config plus one flag per RunConfig key; flags
// override the file.
void add_common(CLI::App* cmd, std::string& config_path,
                std::map<std::string, std::string>& overrides) {
    cmd->add_option("--config", config_path, "key=value configuration file");
    for (const std::string& key : RunConfig::keys())
        cmd->add_option_function<std::string>(
            "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; });
}

RunConfig resolve(const std::string& config_path,
                  const std::map<std::string, std::string>& overrides) {
    RunConfig config;
    if (!config_path.empty()) config = RunConfig::from_file(config_path);
    else if (const char* env = std::getenv("RDDI_OUTPUT_DIR"))
        config.output_dir = env;
    for (const auto& [key, value] : overrides) config.apply(key, value);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RDDI kernels, collective decay spectra, regression and attribution"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        void (*run)(const RunConfig&);
    };
    const Entry entries[] = {
        {"spectrum", "Eigen-decay spectrum scan over a spacing range (CSV)",
         rddi::report::cmd_spectrum},
        {"dataset", "Generate and serialize a (kernel image, log decay rate) corpus",
         rddi::report::cmd_dataset},
        {"train", "Train the conv+dense regressor on a dataset file", rddi::report::cmd_train},
        {"eval", "Evaluate a checkpoint on the held-out test split (CSV)",
         rddi::report::cmd_eval},
        {"attribute", "Integrated-gradients attribution maps and metrics",
         rddi::report::cmd_attribute},
        {"report", "Run spectrum, dataset, train, eval and attribute; emit a manifest",
         rddi::report::cmd_report},
    };

    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::function<void(const RunConfig&)> selected;
    for (const Entry& entry : entries) {
        CLI::App* cmd = app.add_subcommand(entry.name, entry.help);
        add_common(cmd, config_path, overrides);
        cmd->callback([&selected, &entry] { selected = entry.run; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        selected(resolve(config_path, overrides));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
