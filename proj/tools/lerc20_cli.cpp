#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lerc20/scenario.hpp"
#include "lerc20/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSchemaError = 2;
constexpr int kExitDomainError = 3;

namespace fs = std::filesystem;

// Outputs land whole or not at all: write a sibling temp file, then rename.
void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush())
            throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

int run_command(const std::string& scenario_path, const std::string& out_dir) {
    std::ifstream in(scenario_path);
    if (!in) {
        std::cerr << "error: cannot read scenario file '" << scenario_path << "'\n";
        return kExitSchemaError;
    }
    nlohmann::json scenario_json;
    try {
        scenario_json = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "error: scenario is not valid JSON: " << e.what() << '\n';
        return kExitSchemaError;
    }

    lerc20::ScenarioRun run = [&] {
        lerc20::Scenario scenario = lerc20::parse_scenario(scenario_json);
        return lerc20::run_scenario(scenario);
    }();

    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    write_file_atomic(dir / "report.json", lerc20::report_to_json(run.report).dump(2) + "\n");
    write_file_atomic(dir / "locks.csv", lerc20::lock_series_to_csv(run.report.lock_series));
    write_file_atomic(dir / "events.csv", lerc20::events_to_csv(run.ledger.events()));
    write_file_atomic(dir / "throughput.csv", lerc20::throughput_to_csv(run.gas_report));

    std::cout << "session " << run.report.session_id << ": " << run.report.orders.size()
              << " orders, " << run.report.trades.size() << " trades, closed at block "
              << run.report.closed_at_block << "; outputs in " << out_dir << '\n';
    return kExitOk;
}

int gas_report_command(const std::string& out_path, const lerc20::gas::GasParams& params,
                       std::uint64_t session_seconds, std::uint64_t resolution_blocks) {
    lerc20::gas::OverheadReport report =
        lerc20::gas::overhead_report(params, session_seconds, resolution_blocks);
    fs::path path(out_path);
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    if (path.extension() == ".json")
        write_file_atomic(path, lerc20::overhead_report_to_json(report).dump(2) + "\n");
    else
        write_file_atomic(path, lerc20::throughput_to_csv(report));
    std::cout << "gas report written to " << out_path << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lockable token ledger and P2P energy market session simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string run_out_dir;
    CLI::App* run = app.add_subcommand("run", "Run a market scenario end to end");
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--out", run_out_dir, "Output directory")->required();

    std::string gas_out;
    std::string gas_config;
    std::uint64_t gas_limit = lerc20::gas::kDefaultBlockGasLimit;
    std::uint64_t block_time_s = lerc20::gas::kDefaultBlockTimeSeconds;
    std::uint64_t session_seconds = 4 * 3600;
    std::uint64_t resolution_blocks = 1;
    CLI::App* gas_report =
        app.add_subcommand("gas-report", "Emit the order throughput model (.csv or .json)");
    gas_report->add_option("--out", gas_out, "Output file")->required();
    CLI::Option* opt_limit = gas_report->add_option("--gas-limit", gas_limit, "Block gas limit");
    CLI::Option* opt_block_time =
        gas_report->add_option("--block-time-s", block_time_s, "Seconds per block");
    CLI::Option* opt_session =
        gas_report->add_option("--session-seconds", session_seconds, "Session length in seconds");
    CLI::Option* opt_resolution =
        gas_report->add_option("--resolution-blocks", resolution_blocks, "Blocks per table row");
    gas_report->add_option("--config", gas_config,
                           "JSON file with block_gas_limit / block_time_s / session_seconds / "
                           "resolution_blocks; flags win over the file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(scenario_path, run_out_dir);
        if (!gas_config.empty()) {
            std::ifstream in(gas_config);
            if (!in) {
                std::cerr << "error: cannot read config file '" << gas_config << "'\n";
                return kExitSchemaError;
            }
            nlohmann::json config = nlohmann::json::parse(in, nullptr, false);
            if (config.is_discarded() || !config.is_object()) {
                std::cerr << "error: config is not a JSON object\n";
                return kExitSchemaError;
            }
            const std::set<std::string> known = {"block_gas_limit", "block_time_s",
                                                 "session_seconds", "resolution_blocks"};
            for (const auto& [key, value] : config.items())
                if (!known.contains(key))
                    throw lerc20::DomainError(lerc20::ErrorCode::SchemaError,
                                              "unknown config field '" + key + "'");
            auto load = [&](const char* key, const CLI::Option* flag, std::uint64_t& value) {
                if (!config.contains(key) || flag->count() > 0)
                    return;
                const nlohmann::json& v = config[key];
                if (v.is_number_unsigned())
                    value = v.get<std::uint64_t>();
                else if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
                    value = static_cast<std::uint64_t>(v.get<std::int64_t>());
                else
                    throw lerc20::DomainError(lerc20::ErrorCode::SchemaError,
                                              std::string(key) +
                                                  " must be a non-negative integer");
            };
            load("block_gas_limit", opt_limit, gas_limit);
            load("block_time_s", opt_block_time, block_time_s);
            load("session_seconds", opt_session, session_seconds);
            load("resolution_blocks", opt_resolution, resolution_blocks);
        }
        lerc20::gas::GasParams params;
        params.block_gas_limit = gas_limit;
        params.block_time_s = block_time_s;
        return gas_report_command(gas_out, params, session_seconds, resolution_blocks);
    } catch (const lerc20::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == lerc20::ErrorCode::SchemaError ? kExitSchemaError : kExitDomainError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomainError;
    }
}
