// Command-line front end: experiment runs, the XOR benchmark and selftests.

#include <qens/qens.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

namespace {

void print_summary(const std::vector<qens::RunResult>& results) {
    std::printf("%-28s %-6s %-8s %2s %-7s %4s  %-15s %-15s %-15s %-9s\n", "dataset", "norm", "kind", "d", "mode",
                "runs", "single", "internal", "ensemble", "p_select");
    for (const auto& s : qens::summarize(results)) {
        auto cell = [](const qens::Stat& st) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f +- %.3f", st.mean, st.std);
            return std::string(buf);
        };
        std::printf("%-28s %-6s %-8s %2d %-7s %4d  %-15s %-15s %-15s %.4f\n", s.dataset.c_str(),
                    qens::to_string(s.normalization).c_str(), qens::to_string(s.kind).c_str(), s.d,
                    qens::to_string(s.mode).c_str(), s.runs, cell(s.acc_single).c_str(),
                    cell(s.acc_internal_mean).c_str(), cell(s.acc_ensemble).c_str(), s.selection_success.mean);
    }
}

void write_results(const std::vector<qens::RunResult>& results, const std::string& output, const std::string& format) {
    if (output.empty() || output == "-") {
        if (format == "csv") qens::write_csv(std::cout, results);
        else qens::write_json(std::cout, results);
    } else {
        qens::emit_results(results, output, format);
        std::fprintf(stderr, "wrote %s\n", output.c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted quantum ensemble classifiers on a statevector simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Monte Carlo cross-validation experiment from a config file");
    std::string config_path;
    bool quiet = false;
    run->add_option("--config", config_path, "key = value experiment file")->required();
    run->add_flag("--quiet", quiet, "Skip the summary table");

    auto* xor_cmd = app.add_subcommand("bench-xor", "XOR non-linearity benchmark (all kinds, exact mode)");
    std::uint64_t xor_seed = 7;
    std::size_t xor_size = 60;
    int xor_runs = 10, xor_d = 3;
    std::string xor_output, xor_format = "csv";
    xor_cmd->add_option("--seed", xor_seed, "Master seed");
    xor_cmd->add_option("--size", xor_size, "Number of points")->check(CLI::Range(8, 4096));
    xor_cmd->add_option("--runs", xor_runs, "Cross-validation runs")->check(CLI::PositiveNumber);
    xor_cmd->add_option("-d", xor_d, "Control register size")->check(CLI::Range(0, 8));
    xor_cmd->add_option("--output", xor_output, "Result file (omit for the summary only)");
    xor_cmd->add_option("--format", xor_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* self = app.add_subcommand("selftest", "Randomized invariant suites");
    std::uint64_t self_seed = 2024;
    self->add_option("--seed", self_seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(qens::ErrorCategory::usage);
    }

    try {
        if (*run) {
            const auto cfg = qens::load_experiment_config(config_path);
            const auto results = qens::monte_carlo_cv(cfg);
            write_results(results, cfg.output, cfg.format);
            if (!quiet && !cfg.output.empty()) print_summary(results);
        } else if (*xor_cmd) {
            qens::ExperimentConfig cfg;
            cfg.normalizations = {qens::NormalizationKind::none};
            cfg.kinds = {qens::ClassifierKind::cosine, qens::ClassifierKind::distance, qens::ClassifierKind::swap};
            cfg.d_values = {xor_d};
            cfg.runs = xor_runs;
            cfg.seed = xor_seed;
            const std::vector<qens::NamedDataset> data{{"xor", qens::xor_benchmark(xor_seed, xor_size)}};
            const auto results = qens::monte_carlo_cv(cfg, data);
            if (!xor_output.empty()) write_results(results, xor_output, xor_format);
            print_summary(results);
        } else if (*self) {
            bool ok = true;
            for (const auto& r : qens::selftest::run_all(self_seed)) {
                std::printf("%s  %-42s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
                ok = ok && r.passed;
            }
            return ok ? 0 : 1;
        }
    } catch (const qens::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
