#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "rddi/kernel.hpp"
#include "rddi/reporting.hpp"

namespace fs = std::filesystem;
using rddi::report::RunConfig;

namespace {

struct TempDir {
    fs::path dir;
    explicit TempDir(const char* name) {
        dir = fs::temp_directory_path() / name;
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

size_t count_lines(const std::string& text) {
    size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

RunConfig tiny_config(const TempDir& tmp) {
    RunConfig c;
    c.n_atoms = 4;
    c.count = 30;
    c.spacing_points = 5;
    c.epochs = 3;
    c.batch_size = 8;
    c.ig_steps = 20;
    c.spacing = 0.3;
    c.output_dir = tmp / "out";
    return c;
}

}  // namespace

TEST_CASE("config file parsing") {
    TempDir tmp("rddi_cfg_test");
    {
        std::ofstream out(tmp / "run.cfg");
        out << "# a comment line\n";
        out << "n_atoms = 8\n";
        out << "spacing_min = 0.2   # trailing comment\n";
        out << "targets = 1,3,8\n";
        out << "\n";
    }
    const RunConfig c = RunConfig::from_file(tmp / "run.cfg");
    CHECK(c.n_atoms == 8);
    CHECK(c.spacing_min == 0.2);
    CHECK(c.targets == "1,3,8");
    CHECK(c.spacing_max == 1.0);  // untouched default

    SUBCASE("unknown keys are rejected") {
        std::ofstream out(tmp / "bad.cfg");
        out << "atoms = 8\n";
        out.close();
        CHECK_THROWS_WITH_AS(RunConfig::from_file(tmp / "bad.cfg"),
                             doctest::Contains("unknown key"), std::invalid_argument);
    }
    SUBCASE("malformed lines are rejected") {
        std::ofstream out(tmp / "bad2.cfg");
        out << "n_atoms 8\n";
        out.close();
        CHECK_THROWS_AS(RunConfig::from_file(tmp / "bad2.cfg"), std::invalid_argument);
    }
    SUBCASE("environment variable overrides output_dir") {
        setenv("RDDI_OUTPUT_DIR", "/tmp/from_env", 1);
        const RunConfig env_cfg = RunConfig::from_file(tmp / "run.cfg");
        unsetenv("RDDI_OUTPUT_DIR");
        CHECK(env_cfg.output_dir == "/tmp/from_env");
    }
}

TEST_CASE("ppm writer") {
    TempDir tmp("rddi_ppm_test");
    SUBCASE("zero map is uniform mid-gray") {
        rddi::report::write_ppm(tmp / "zero.ppm", std::vector<double>(9, 0.0), 3);
        const std::string text = slurp(tmp / "zero.ppm");
        CHECK(text.starts_with("P3\n"));
        CHECK(text.find("3 3\n255\n") != std::string::npos);
        std::istringstream tokens(text.substr(text.find("255\n") + 4));
        std::string tok;
        size_t count = 0;
        while (tokens >> tok) {
            CHECK(tok == "128");
            ++count;
        }
        CHECK(count == 27);
    }
    SUBCASE("extremes map to red and blue") {
        rddi::report::write_ppm(tmp / "pm.ppm", {1.0, -1.0, 0.0, 0.5}, 2);
        const std::string text = slurp(tmp / "pm.ppm");
        CHECK(text.find("255 0 0") != std::string::npos);
        CHECK(text.find("0 0 255") != std::string::npos);
    }
    SUBCASE("shape mismatch rejected") {
        CHECK_THROWS_AS(rddi::report::write_ppm(tmp / "x.ppm", {1.0, 2.0}, 3),
                        std::invalid_argument);
    }
}

TEST_CASE("spectrum command") {
    TempDir tmp("rddi_spectrum_test");
    RunConfig c = tiny_config(tmp);

    SUBCASE("single atom gives a flat gamma column") {
        c.n_atoms = 1;
        c.spacing_points = 4;
        rddi::report::cmd_spectrum(c);
        std::ifstream in(c.output_dir + "/spectrum.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "# schema: spectrum v1");
        std::getline(in, line);
        CHECK(line == "spacing,m,Gamma_m,shift_m");
        int rows = 0;
        while (std::getline(in, line)) {
            ++rows;
            std::istringstream parts(line);
            std::string spacing, m, gamma;
            std::getline(parts, spacing, ',');
            std::getline(parts, m, ',');
            std::getline(parts, gamma, ',');
            CHECK(std::stod(gamma) == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(rows == 4);  // points x N
    }
    SUBCASE("two atoms match the analytic pair") {
        c.n_atoms = 2;
        c.spacing_points = 3;
        rddi::report::cmd_spectrum(c);
        std::ifstream in(c.output_dir + "/spectrum.csv");
        std::string line;
        std::getline(in, line);
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::istringstream parts(line);
            std::string field;
            std::getline(parts, field, ',');
            const double spacing = std::stod(field);
            std::getline(parts, field, ',');
            const int m = std::stoi(field);
            std::getline(parts, field, ',');
            const double gamma_m = std::stod(field);
            const double f12 =
                rddi::pairwise_rates(2.0 * 3.14159265358979323846 * spacing, 0.0, 1.0).f;
            // Rows are sorted by decay rate, so m=1 is the smaller branch.
            const double lo = std::min(1.0 - f12, 1.0 + f12);
            const double hi = std::max(1.0 - f12, 1.0 + f12);
            CHECK(gamma_m == doctest::Approx(m == 1 ? lo : hi).epsilon(1e-9));
        }
    }
    SUBCASE("resolved config is written next to outputs") {
        rddi::report::cmd_spectrum(c);
        const std::string cfg = slurp(c.output_dir + "/spectrum_config.txt");
        CHECK(cfg.find("n_atoms = 4") != std::string::npos);
    }
}

TEST_CASE("dataset, train, eval, attribute pipeline on a tiny profile") {
    TempDir tmp("rddi_pipeline_test");
    RunConfig c = tiny_config(tmp);

    rddi::report::cmd_dataset(c);
    CHECK(fs::exists(c.resolved_dataset_path()));

    rddi::report::cmd_train(c);
    CHECK(fs::exists(c.resolved_checkpoint_path()));
    const std::string history = slurp(c.output_dir + "/loss_history.csv");
    CHECK(count_lines(history) == 2 + 3);  // schema + header + epochs

    rddi::report::cmd_eval(c);
    const std::string eval_text = slurp(c.output_dir + "/eval.csv");
    // 10% of 30 samples held out, N rows each.
    CHECK(count_lines(eval_text) == 2 + 3 * 4);

    SUBCASE("eval is reproducible byte for byte") {
        rddi::report::cmd_eval(c);
        CHECK(slurp(c.output_dir + "/eval.csv") == eval_text);
    }

    rddi::report::cmd_attribute(c);
    CHECK(fs::exists(c.output_dir + "/attribution_metrics.csv"));
    const std::string metrics = slurp(c.output_dir + "/attribution_metrics.csv");
    CHECK(count_lines(metrics) >= 2 + 1);
    // Default targets: the crossover triple; sub- and superradiant maps exist.
    CHECK(fs::exists(c.output_dir + "/attribution_m1.csv"));
    CHECK(fs::exists(c.output_dir + "/attribution_m1.ppm"));
    CHECK(fs::exists(c.output_dir + "/attribution_m4.ppm"));

    SUBCASE("explicit out-of-range target is rejected") {
        RunConfig bad = c;
        bad.targets = "9";
        CHECK_THROWS_AS(rddi::report::cmd_attribute(bad), std::out_of_range);
    }
}

TEST_CASE("commands fail loudly on missing inputs") {
    TempDir tmp("rddi_missing_test");
    RunConfig c = tiny_config(tmp);
    CHECK_THROWS_AS(rddi::report::cmd_train(c), std::runtime_error);
    CHECK_THROWS_AS(rddi::report::cmd_eval(c), std::runtime_error);
    CHECK_THROWS_AS(rddi::report::cmd_attribute(c), std::runtime_error);
}

TEST_CASE("report runs the full chain and manifests every artifact") {
    TempDir tmp("rddi_report_test");
    RunConfig c = tiny_config(tmp);
    rddi::report::cmd_report(c);

    const std::string manifest = slurp(c.output_dir + "/manifest.txt");
    for (const char* stage : {"spectrum", "dataset", "train", "eval", "attribute"})
        CHECK(manifest.find(std::string("stage ") + stage + " ok") != std::string::npos);
    std::istringstream lines(manifest);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.starts_with("file ")) continue;
        const std::string path = line.substr(line.rfind(' ') + 1);
        CHECK(fs::exists(path));
    }

    SUBCASE("a failing stage is recorded before the error propagates") {
        RunConfig broken = c;
        broken.output_dir = tmp / "broken";
        broken.count = 0;  // dataset stage cannot generate an empty corpus
        CHECK_THROWS(rddi::report::cmd_report(broken));
        const std::string partial = slurp(broken.output_dir + "/manifest.txt");
        CHECK(partial.find("stage spectrum ok") != std::string::npos);
        CHECK(partial.find("stage dataset failed") != std::string::npos);
        CHECK(partial.find("stage train") == std::string::npos);
    }
}
