#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "fraclab/runner.hpp"
#include "fraclab/verify.hpp"

namespace {

int pretty_print(const std::string& outdir) {
    std::ifstream in(outdir + "/report.json");
    if (!in) {
        std::cerr << "no report.json under " << outdir << "\n";
        return 2;
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        std::cerr << "unreadable report: " << e.what() << "\n";
        return 2;
    }
    std::function<void(const nlohmann::json&, int)> walk = [&](const nlohmann::json& node,
                                                               int indent) {
        const std::string pad(static_cast<size_t>(indent) * 2, ' ');
        if (node.is_object()) {
            if (node.contains("value") && node.contains("provenance") && node.size() == 2) {
                std::cout << node["value"].dump() << "   (" << node["provenance"].get<std::string>()
                          << ")\n";
                return;
            }
            std::cout << "\n";
            for (auto it = node.begin(); it != node.end(); ++it) {
                std::cout << pad << it.key() << ": ";
                walk(it.value(), indent + 1);
            }
        } else if (node.is_array()) {
            std::cout << "\n";
            for (const auto& el : node) {
                std::cout << pad << "- ";
                walk(el, indent + 1);
            }
        } else {
            std::cout << node.dump() << "\n";
        }
    };
    std::cout << "report " << outdir << ":";
    walk(j, 1);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fraclab: a numerical laboratory for the fractional conductivity equation"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "path to the config file")->required();

    bool full = false;
    std::string verify_outdir = "out";
    unsigned long seed = 0;
    auto* verify = app.add_subcommand("verify", "run the bundled invariant suite");
    verify->add_flag("--full", full, "add 2D and refinement sweeps");
    verify->add_option("--outdir", verify_outdir, "report directory");
    verify->add_option("--seed", seed, "random seed");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "pretty-print a report directory");
    report->add_option("outdir", report_dir, "report directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return fraclab::run_config_file(config_path);
    if (verify->parsed()) {
        fraclab::ExperimentConfig cfg;
        cfg.experiment = "verify";
        cfg.level = full ? "full" : "fast";
        cfg.outdir = verify_outdir;
        cfg.seed = seed;
        if (const char* env = std::getenv("FRACLAB_DETERMINISTIC"))
            cfg.deterministic = std::string(env) == "1" || cfg.deterministic;
        return fraclab::run_experiment(cfg);
    }
    if (report->parsed()) return pretty_print(report_dir);
    return 2;
}
