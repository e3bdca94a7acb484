#include "lerc20/scenario.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "lerc20/serialize.hpp"

namespace lerc20 {

using nlohmann::json;

namespace {

void reject_unknown_fields(const json& j, const std::set<std::string>& known,
                           const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.contains(key))
            throw DomainError(ErrorCode::SchemaError,
                              "unknown field '" + key + "' in " + where);
}

std::uint64_t parse_u64_field(const json& j, const std::string& field) {
    if (j.is_number_unsigned())
        return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    throw DomainError(ErrorCode::SchemaError, field + " must be a non-negative integer");
}

Amount parse_amount_field(const json& j, const std::string& field) {
    if (j.is_string())
        return amount_from_string(j.get<std::string>());
    if (j.is_number())
        return parse_u64_field(j, field);
    throw DomainError(ErrorCode::SchemaError,
                      field + " must be a non-negative integer or decimal string");
}

const json& require_field(const json& j, const std::string& field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end())
        throw DomainError(ErrorCode::SchemaError,
                          "missing field '" + field + "' in " + where);
    return *it;
}

bool address_char_ok(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.' || c == ':';
}

Address parse_address_field(const json& j, const std::string& field) {
    if (!j.is_string())
        throw DomainError(ErrorCode::SchemaError, field + " must be a string");
    Address a = j.get<std::string>();
    if (a.empty() || !std::all_of(a.begin(), a.end(), address_char_ok))
        throw DomainError(ErrorCode::SchemaError,
                          field + " must be non-empty and use [A-Za-z0-9_.:-] only");
    return a;
}

Side parse_side_field(const json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "sell")
            return Side::Sell;
        if (s == "buy")
            return Side::Buy;
    }
    throw DomainError(ErrorCode::SchemaError, "side must be \"sell\" or \"buy\"");
}

} // namespace

Scenario parse_scenario(const json& j) {
    if (!j.is_object())
        throw DomainError(ErrorCode::SchemaError, "scenario must be a JSON object");
    reject_unknown_fields(j, {"accounts", "session", "orders", "deliveries", "gas"}, "scenario");

    Scenario scenario;

    const json& accounts = require_field(j, "accounts", "scenario");
    if (!accounts.is_array())
        throw DomainError(ErrorCode::SchemaError, "accounts must be an array");
    std::set<Address> seen;
    for (const json& entry : accounts) {
        reject_unknown_fields(entry, {"address", "initial_balance", "approve_market"},
                              "accounts[]");
        ScenarioAccount account;
        account.address = parse_address_field(require_field(entry, "address", "accounts[]"),
                                              "account address");
        if (account.address == kMarketAddress)
            throw DomainError(ErrorCode::SchemaError,
                              std::string("'") + kMarketAddress + "' is reserved for the engine");
        if (!seen.insert(account.address).second)
            throw DomainError(ErrorCode::SchemaError,
                              "duplicate account '" + account.address + "'");
        account.initial_balance = parse_amount_field(
            require_field(entry, "initial_balance", "accounts[]"), "initial_balance");
        account.approve_market = parse_amount_field(
            require_field(entry, "approve_market", "accounts[]"), "approve_market");
        scenario.accounts.push_back(std::move(account));
    }

    const json& session = require_field(j, "session", "scenario");
    reject_unknown_fields(session, {"duration_blocks", "block_time_s"}, "session");
    scenario.duration_blocks =
        parse_u64_field(require_field(session, "duration_blocks", "session"), "duration_blocks");
    if (session.contains("block_time_s")) {
        scenario.block_time_s = parse_u64_field(session["block_time_s"], "block_time_s");
        if (scenario.block_time_s == 0)
            throw DomainError(ErrorCode::SchemaError, "block_time_s must be positive");
    }

    const json& orders = require_field(j, "orders", "scenario");
    if (!orders.is_array())
        throw DomainError(ErrorCode::SchemaError, "orders must be an array");
    for (const json& entry : orders) {
        reject_unknown_fields(entry, {"block_offset", "account", "side", "energy_wh", "price"},
                              "orders[]");
        ScenarioOrder order;
        order.block_offset =
            parse_u64_field(require_field(entry, "block_offset", "orders[]"), "block_offset");
        order.account =
            parse_address_field(require_field(entry, "account", "orders[]"), "order account");
        if (!seen.contains(order.account))
            throw DomainError(ErrorCode::SchemaError,
                              "order references undeclared account '" + order.account + "'");
        order.side = parse_side_field(require_field(entry, "side", "orders[]"));
        order.energy_wh =
            parse_u64_field(require_field(entry, "energy_wh", "orders[]"), "energy_wh");
        order.price = parse_u64_field(require_field(entry, "price", "orders[]"), "price");
        scenario.orders.push_back(std::move(order));
    }

    if (j.contains("deliveries")) {
        const json& deliveries = j["deliveries"];
        if (!deliveries.is_array())
            throw DomainError(ErrorCode::SchemaError, "deliveries must be an array");
        std::set<std::uint64_t> delivered_ids;
        for (const json& entry : deliveries) {
            reject_unknown_fields(entry, {"trade_id", "pair", "delivered_wh"}, "deliveries[]");
            ScenarioDelivery delivery;
            bool has_id = entry.contains("trade_id");
            bool has_pair = entry.contains("pair");
            if (has_id == has_pair)
                throw DomainError(ErrorCode::SchemaError,
                                  "each delivery needs exactly one of trade_id or pair");
            if (has_id) {
                delivery.trade_id = parse_u64_field(entry["trade_id"], "trade_id");
                if (delivery.trade_id == 0)
                    throw DomainError(ErrorCode::SchemaError, "trade ids start at 1");
            } else {
                // pair is the 0-based index into the trade list
                delivery.trade_id = checked_add(parse_u64_field(entry["pair"], "pair"), 1);
            }
            if (!delivered_ids.insert(delivery.trade_id).second)
                throw DomainError(ErrorCode::SchemaError,
                                  "duplicate delivery for trade " +
                                      std::to_string(delivery.trade_id));
            delivery.delivered_wh = parse_u64_field(
                require_field(entry, "delivered_wh", "deliveries[]"), "delivered_wh");
            scenario.deliveries.push_back(delivery);
        }
    }

    if (j.contains("gas")) {
        const json& gas_j = j["gas"];
        reject_unknown_fields(
            gas_j, {"block_gas_limit", "block_time_s", "session_seconds", "resolution_blocks"},
            "gas");
        if (gas_j.contains("block_gas_limit"))
            scenario.gas_params.block_gas_limit =
                parse_u64_field(gas_j["block_gas_limit"], "block_gas_limit");
        if (gas_j.contains("block_time_s"))
            scenario.gas_params.block_time_s =
                parse_u64_field(gas_j["block_time_s"], "gas block_time_s");
        if (gas_j.contains("session_seconds"))
            scenario.gas_session_seconds =
                parse_u64_field(gas_j["session_seconds"], "session_seconds");
        if (gas_j.contains("resolution_blocks"))
            scenario.gas_resolution_blocks =
                parse_u64_field(gas_j["resolution_blocks"], "resolution_blocks");
        if (scenario.gas_params.block_gas_limit == 0 || scenario.gas_params.block_time_s == 0 ||
            scenario.gas_resolution_blocks == 0)
            throw DomainError(ErrorCode::SchemaError, "gas overrides must be positive");
    }

    return scenario;
}

ScenarioRun run_scenario(const Scenario& scenario) {
    Amount total = 0;
    for (const ScenarioAccount& account : scenario.accounts)
        total = checked_add(total, account.initial_balance);

    Ledger ledger(kMarketAddress, total, 0, scenario.block_time_s);
    for (const ScenarioAccount& account : scenario.accounts) {
        if (account.initial_balance > 0)
            ledger.transfer(kMarketAddress, account.address, account.initial_balance);
        if (account.approve_market > 0)
            ledger.approve(account.address, kMarketAddress, account.approve_market);
    }

    MarketEngine engine;
    engine.open_session(ledger, 1, scenario.duration_blocks, kMarketAddress);

    std::vector<std::size_t> order_indices(scenario.orders.size());
    for (std::size_t i = 0; i < order_indices.size(); ++i)
        order_indices[i] = i;
    std::stable_sort(order_indices.begin(), order_indices.end(),
                     [&](std::size_t a, std::size_t b) {
                         return scenario.orders[a].block_offset < scenario.orders[b].block_offset;
                     });

    BlockNumber opened = engine.session().opened_at_block;
    for (std::size_t idx : order_indices) {
        const ScenarioOrder& order = scenario.orders[idx];
        BlockNumber target = checked_add(opened, order.block_offset);
        if (target > ledger.current_block())
            ledger.advance_block(target - ledger.current_block());
        try {
            engine.place_order(ledger, order.account, order.side, order.energy_wh, order.price);
        } catch (const DomainError& e) {
            throw DomainError(e.code(), "order " + std::to_string(idx + 1) + " (" +
                                            order.account + "): " + e.detail());
        }
    }

    BlockNumber end = engine.session().end_block();
    if (ledger.current_block() < end)
        ledger.advance_block(end - ledger.current_block());

    std::vector<Trade> trades = engine.run_matching(ledger);

    std::map<std::uint64_t, EnergyQuantity> delivered;
    for (const ScenarioDelivery& delivery : scenario.deliveries) {
        if (delivery.trade_id > trades.size())
            throw DomainError(ErrorCode::TradeNotFound,
                              "delivery references trade " + std::to_string(delivery.trade_id) +
                                  " but only " + std::to_string(trades.size()) + " formed");
        delivered[delivery.trade_id] = delivery.delivered_wh;
    }
    for (const Trade& trade : trades) {
        auto it = delivered.find(trade.id);
        EnergyQuantity amount = it != delivered.end() ? it->second : trade.energy;
        engine.settle_trade(ledger, MeterReading{trade.id, amount});
    }

    SessionReport report = engine.close_session(ledger);
    gas::OverheadReport gas_report = gas::overhead_report(
        scenario.gas_params, scenario.gas_session_seconds, scenario.gas_resolution_blocks);
    return ScenarioRun{std::move(ledger), std::move(report), std::move(gas_report)};
}

} // namespace lerc20
