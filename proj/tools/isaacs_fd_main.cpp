// Batch experiment driver: runs one study from a JSON config and writes the
// CSV results plus a JSON manifest. Set ISAACS_FD_MAX_THREADS to cap worker
// parallelism.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "isaacs/experiment.hpp"

namespace {

struct StudyArgs {
    std::string config;
    std::string out;
};

int run_study(const char* expected_kind, const StudyArgs& args) {
    std::ifstream in(args.config);
    if (!in) {
        std::cerr << "error: cannot read config file " << args.config << "\n";
        return 1;
    }
    nlohmann::json config;
    try {
        in >> config;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: config field '<root>': invalid JSON: " << e.what() << "\n";
        return 2;
    }

    std::string out = args.out;
    if (out.empty()) {
        // --out beats the config's output field; "results" is the fallback.
        out = config.contains("output") && config["output"].is_string()
                  ? config["output"].get<std::string>()
                  : "results";
    }

    try {
        const auto declared = config.contains("study") && config["study"].contains("kind")
                                  ? config["study"]["kind"].get<std::string>()
                                  : std::string();
        if (declared != expected_kind)
            throw isaacs::ConfigParseError(
                "study.kind", "config declares '" + declared + "' but the '" +
                                  expected_kind + "' subcommand was invoked");
        const auto outcome = isaacs::run_config_json(config, out);
        std::cout << "wrote " << outcome.csv_path.string() << " and "
                  << outcome.manifest_path.string() << "\n";
        return 0;
    } catch (const isaacs::ConfigParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const isaacs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Finite-difference solver and experiment harness for parabolic Isaacs equations"};
    app.require_subcommand(1);

    StudyArgs args;
    const char* kinds[] = {"solve", "rates", "kgap", "regularity"};
    const char* blurbs[] = {
        "solve once and dump the full grid",
        "sup-error convergence study over a list of steps",
        "upper/lower truncation gap study over a list of bounds",
        "interior Hölder-seminorm diagnostic over a list of margins"};
    for (int i = 0; i < 4; ++i) {
        auto* sub = app.add_subcommand(kinds[i], blurbs[i]);
        sub->add_option("--config", args.config, "JSON experiment config")->required();
        sub->add_option("--out", args.out,
                        "output directory (default: the config's output field, else 'results')");
    }

    CLI11_PARSE(app, argc, argv);
    for (const char* kind : kinds)
        if (app.get_subcommand(kind)->parsed()) return run_study(kind, args);
    return 1;
}
