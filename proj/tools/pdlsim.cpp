// pdlsim: scenario runner, replayer, report browser and chain verifier.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pdl/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kParseError = 2;
constexpr int kInvariantError = 3;
constexpr int kIoError = 4;

int exit_code_for(pdl::Err e) {
    switch (e) {
        case pdl::Err::IoError:
            return kIoError;
        case pdl::Err::InvariantViolation:
            return kInvariantError;
        default:
            return kParseError;
    }
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, std::optional<pdl::Tick> until) {
    auto sc = pdl::harness::Scenario::load(scenario_path);
    if (!sc) {
        std::cerr << "error: " << sc.error().message << "\n";
        return exit_code_for(sc.code());
    }
    if (seed) sc.value().seed = *seed;
    pdl::harness::Engine engine(std::move(sc).take());
    auto result = engine.run(out_dir, until);
    if (!result) {
        std::cerr << "error: " << result.error().message << "\n";
        return exit_code_for(result.code());
    }
    std::cout << result.value().metrics.to_json().dump(2) << "\n";
    return kOk;
}

int cmd_replay(const std::string& log_path) {
    auto text = pdl::harness::read_file(log_path);
    if (!text) {
        std::cerr << "error: " << text.error().message << "\n";
        return kIoError;
    }
    auto metrics = pdl::harness::replay(text.value());
    if (!metrics) {
        std::cerr << "error: " << metrics.error().message << "\n";
        return exit_code_for(metrics.code());
    }
    std::cout << metrics.value().to_json().dump(2) << "\n";
    return kOk;
}

int cmd_report_ls(const std::string& dir) {
    auto ids = pdl::reports::ReportStore::list_directory(dir);
    if (!ids) {
        std::cerr << "error: " << ids.error().message << "\n";
        return exit_code_for(ids.code());
    }
    for (const auto& id : ids.value()) std::cout << id << "\n";
    return kOk;
}

int cmd_report_show(const std::string& path) {
    auto body = pdl::reports::ReportStore::load_file(path);
    if (!body) {
        std::cerr << "error: " << body.error().message << "\n";
        return exit_code_for(body.code());
    }
    std::cout << body.value().dump(2) << "\n";
    return kOk;
}

int cmd_verify(const std::string& path) {
    auto text = pdl::harness::read_file(path);
    if (!text) {
        std::cerr << "error: " << text.error().message << "\n";
        return kIoError;
    }
    auto verdict = pdl::ledger::Ledger::verify_export(text.value());
    if (!verdict.intact) {
        std::cout << "corrupt at height "
                  << (verdict.bad_height ? std::to_string(*verdict.bad_height) : "?") << "\n";
        return kInvariantError;
    }
    std::cout << "intact\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PDL-backed SLA lifecycle simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, log_path, report_dir, report_path, chain_path;
    std::optional<std::uint64_t> seed;
    std::optional<pdl::Tick> until;

    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("scenario", scenario_path, "Scenario file")->required();
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--until", until, "Stop after this tick");

    auto* replay = app.add_subcommand("replay", "Recompute metrics from an event log");
    replay->add_option("log", log_path, "Event log file")->required();

    auto* report = app.add_subcommand("report", "Browse run reports");
    auto* ls = report->add_subcommand("ls", "List reports in a directory");
    ls->add_option("dir", report_dir, "Reports directory")->required();
    auto* show = report->add_subcommand("show", "Print one report");
    show->add_option("file", report_path, "Report file")->required();
    report->require_subcommand(1);

    auto* verify = app.add_subcommand("verify", "Verify an exported chain");
    verify->add_option("chain", chain_path, "Chain export file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kParseError;
    }

    if (run->parsed()) return cmd_run(scenario_path, out_dir, seed, until);
    if (replay->parsed()) return cmd_replay(log_path);
    if (report->parsed()) {
        if (ls->parsed()) return cmd_report_ls(report_dir);
        return cmd_report_show(report_path);
    }
    if (verify->parsed()) return cmd_verify(chain_path);
    return kParseError;
}
