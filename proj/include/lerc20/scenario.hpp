#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lerc20/gas.hpp"
#include "lerc20/ledger.hpp"
#include "lerc20/market.hpp"

namespace lerc20 {

/// The engine / escrow / genesis-distributor address of scenario runs.
/// Scenario accounts may not use it.
constexpr const char* kMarketAddress = "market";

struct ScenarioAccount {
    Address address;
    Amount initial_balance = 0;
    Amount approve_market = 0;
};

struct ScenarioOrder {
    BlockNumber block_offset = 0;
    Address account;
    Side side = Side::Sell;
    EnergyQuantity energy_wh = 0;
    Price price = 0;
};

struct ScenarioDelivery {
    std::uint64_t trade_id = 0;
    EnergyQuantity delivered_wh = 0;
};

struct Scenario {
    std::vector<ScenarioAccount> accounts;
    BlockNumber duration_blocks = 0;
    std::uint64_t block_time_s = Ledger::kDefaultBlockTimeSeconds;
    std::vector<ScenarioOrder> orders;
    std::vector<ScenarioDelivery> deliveries;
    gas::GasParams gas_params;
    std::uint64_t gas_session_seconds = 4 * 3600;
    std::uint64_t gas_resolution_blocks = 1;
};

/// Strict parse: unknown fields, malformed values, reserved or duplicate
/// addresses all raise SchemaError before any ledger is touched.
Scenario parse_scenario(const nlohmann::json& j);

struct ScenarioRun {
    Ledger ledger;
    SessionReport report;
    gas::OverheadReport gas_report;
};

/// Drives one session end to end: fund accounts, place orders at their block
/// offsets, advance to session end, match, settle deliveries (missing ones
/// default to full delivery), close. Deterministic in the scenario alone.
ScenarioRun run_scenario(const Scenario& scenario);

} // namespace lerc20
