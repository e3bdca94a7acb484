#include "lerc20/serialize.hpp"

#include <limits>
#include <sstream>

namespace lerc20 {

using nlohmann::json;

std::string amount_to_string(Amount a) { return std::to_string(a); }

Amount amount_from_string(const std::string& s) {
    if (s.empty() || s.size() > 20)
        throw DomainError(ErrorCode::SchemaError, "bad amount '" + s + "'");
    unsigned __int128 value = 0;
    for (char c : s) {
        if (c < '0' || c > '9')
            throw DomainError(ErrorCode::SchemaError, "bad amount '" + s + "'");
        value = value * 10 + static_cast<unsigned>(c - '0');
        if (value > std::numeric_limits<Amount>::max())
            throw DomainError(ErrorCode::SchemaError, "amount '" + s + "' out of range");
    }
    return static_cast<Amount>(value);
}

namespace {

std::uint64_t u64_from_json(const json& j, const std::string& field) {
    if (j.is_number_unsigned())
        return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    throw DomainError(ErrorCode::SchemaError, field + " must be a non-negative integer");
}

Amount amount_from_json(const json& j, const std::string& field) {
    if (j.is_string())
        return amount_from_string(j.get<std::string>());
    if (j.is_number())
        return u64_from_json(j, field);
    throw DomainError(ErrorCode::SchemaError,
                      field + " must be a non-negative integer or decimal string");
}

std::string address_from_json(const json& j, const std::string& field) {
    if (!j.is_string() || j.get<std::string>().empty())
        throw DomainError(ErrorCode::SchemaError, field + " must be a non-empty string");
    return j.get<std::string>();
}

const json& require_field(const json& j, const std::string& field) {
    auto it = j.find(field);
    if (it == j.end())
        throw DomainError(ErrorCode::SchemaError, "missing field '" + field + "'");
    return *it;
}

} // namespace

/// Snapshot codec; the only path that constructs a Ledger from raw parts.
struct LedgerCodec {
    static json to_json(const Ledger& ledger) {
        json balances = json::object();
        for (const auto& [addr, amount] : ledger.balances())
            balances[addr] = amount_to_string(amount);

        json locked = json::object();
        for (const auto& [addr, amount] : ledger.locked_balances())
            locked[addr] = amount_to_string(amount);

        json allowances = json::array();
        for (const auto& [key, amount] : ledger.allowances())
            allowances.push_back({{"owner", key.first},
                                  {"spender", key.second},
                                  {"amount", amount_to_string(amount)}});

        json locks = json::array();
        for (const auto& [key, entity] : ledger.locks())
            locks.push_back({{"unlocking_address", key.first},
                             {"locking_address", key.second},
                             {"owner", entity.owner},
                             {"amount", amount_to_string(entity.amount)},
                             {"block_no", entity.block_no},
                             {"is_active", entity.is_active}});

        json events = json::array();
        for (const LockEventRecord& e : ledger.events())
            events.push_back({{"owner", e.owner},
                              {"locking_address", e.locking_address},
                              {"amount", amount_to_string(e.amount)},
                              {"no_blocks", e.no_blocks},
                              {"unlocking_address", e.unlocking_address},
                              {"status", static_cast<unsigned>(e.status)},
                              {"timestamp", e.timestamp},
                              {"hour", e.hour},
                              {"min", e.min}});

        return json{{"name", Ledger::kName},
                    {"symbol", Ledger::kSymbol},
                    {"total_supply", amount_to_string(ledger.total_supply())},
                    {"current_block", ledger.current_block()},
                    {"genesis_time", ledger.genesis_time()},
                    {"block_time_s", ledger.block_time_s()},
                    {"balances", balances},
                    {"locked_balances", locked},
                    {"allowances", allowances},
                    {"locks", locks},
                    {"events", events}};
    }

    static Ledger from_json(const json& j) {
        if (!j.is_object())
            throw DomainError(ErrorCode::SchemaError, "snapshot must be a JSON object");
        Ledger ledger;
        ledger.total_supply_ = amount_from_json(require_field(j, "total_supply"), "total_supply");
        ledger.current_block_ = u64_from_json(require_field(j, "current_block"), "current_block");
        ledger.genesis_time_ = u64_from_json(require_field(j, "genesis_time"), "genesis_time");
        ledger.block_time_s_ = u64_from_json(require_field(j, "block_time_s"), "block_time_s");
        if (ledger.block_time_s_ == 0)
            throw DomainError(ErrorCode::SchemaError, "block_time_s must be positive");

        for (const auto& [addr, amount] : require_field(j, "balances").items()) {
            if (addr.empty())
                throw DomainError(ErrorCode::SchemaError, "empty address in balances");
            ledger.balances_[addr] = amount_from_json(amount, "balance");
        }
        for (const auto& [addr, amount] : require_field(j, "locked_balances").items())
            ledger.locked_balances_[addr] = amount_from_json(amount, "locked balance");
        for (const json& entry : require_field(j, "allowances")) {
            auto owner = address_from_json(require_field(entry, "owner"), "allowance owner");
            auto spender = address_from_json(require_field(entry, "spender"), "allowance spender");
            ledger.allowances_[{owner, spender}] =
                amount_from_json(require_field(entry, "amount"), "allowance amount");
        }
        for (const json& entry : require_field(j, "locks")) {
            auto unlocking = address_from_json(require_field(entry, "unlocking_address"),
                                               "lock unlocking_address");
            auto locking = address_from_json(require_field(entry, "locking_address"),
                                             "lock locking_address");
            LockedEntity entity;
            entity.owner = address_from_json(require_field(entry, "owner"), "lock owner");
            entity.amount = amount_from_json(require_field(entry, "amount"), "lock amount");
            entity.block_no = u64_from_json(require_field(entry, "block_no"), "lock block_no");
            entity.is_active = require_field(entry, "is_active").get<bool>();
            ledger.locks_[{unlocking, locking}] = entity;
        }
        for (const json& entry : require_field(j, "events")) {
            LockEventRecord e;
            e.owner = address_from_json(require_field(entry, "owner"), "event owner");
            e.locking_address = address_from_json(require_field(entry, "locking_address"),
                                                  "event locking_address");
            e.amount = amount_from_json(require_field(entry, "amount"), "event amount");
            e.no_blocks = u64_from_json(require_field(entry, "no_blocks"), "event no_blocks");
            e.unlocking_address = address_from_json(require_field(entry, "unlocking_address"),
                                                    "event unlocking_address");
            auto status = u64_from_json(require_field(entry, "status"), "event status");
            if (status > 2)
                throw DomainError(ErrorCode::SchemaError, "event status must be 0, 1 or 2");
            e.status = static_cast<LockStatus>(status);
            e.timestamp = u64_from_json(require_field(entry, "timestamp"), "event timestamp");
            e.hour = static_cast<unsigned>(u64_from_json(require_field(entry, "hour"), "hour"));
            e.min = static_cast<unsigned>(u64_from_json(require_field(entry, "min"), "min"));
            ledger.event_log_.push_back(std::move(e));
        }

        validate(ledger);
        return ledger;
    }

    static void validate(const Ledger& ledger) {
        Amount balance_sum = 0;
        for (const auto& [addr, amount] : ledger.balances())
            balance_sum = checked_add(balance_sum, amount);
        if (balance_sum != ledger.total_supply())
            throw DomainError(ErrorCode::SchemaError, "balances do not sum to total supply");

        std::map<Address, Amount> from_locks;
        for (const auto& [key, entity] : ledger.locks()) {
            if (entity.is_active && entity.amount == 0)
                throw DomainError(ErrorCode::SchemaError, "active lock with zero amount");
            if (entity.is_active)
                from_locks[entity.owner] = checked_add(from_locks[entity.owner], entity.amount);
        }
        for (const auto& [addr, amount] : ledger.locked_balances()) {
            if (amount > ledger.balance_of(addr))
                throw DomainError(ErrorCode::SchemaError,
                                  "locked balance of " + addr + " exceeds balance");
            if (amount != from_locks[addr])
                throw DomainError(ErrorCode::SchemaError,
                                  "locked balance of " + addr + " does not match lock entries");
            from_locks.erase(addr);
        }
        for (const auto& [addr, amount] : from_locks)
            if (amount != 0)
                throw DomainError(ErrorCode::SchemaError,
                                  "lock entries for " + addr + " lack a locked balance");
    }
};

json ledger_to_json(const Ledger& ledger) { return LedgerCodec::to_json(ledger); }

Ledger ledger_from_json(const json& j) { return LedgerCodec::from_json(j); }

std::string events_to_csv(const std::vector<LockEventRecord>& events) {
    std::ostringstream out;
    out << "seq,owner,locking_address,amount,no_blocks,unlocking_address,status,timestamp,hour,min\n";
    std::size_t seq = 0;
    for (const LockEventRecord& e : events) {
        out << seq++ << ',' << e.owner << ',' << e.locking_address << ',' << e.amount << ','
            << e.no_blocks << ',' << e.unlocking_address << ','
            << static_cast<unsigned>(e.status) << ',' << e.timestamp << ',' << e.hour << ','
            << e.min << '\n';
    }
    return out.str();
}

std::string lock_series_to_csv(const std::vector<LockSeriesPoint>& series) {
    std::ostringstream out;
    out << "block,active_locks\n";
    for (const LockSeriesPoint& p : series)
        out << p.block << ',' << p.active_locks << '\n';
    return out.str();
}

json report_to_json(const SessionReport& report) {
    json accounts = json::object();
    for (const auto& [addr, flow] : report.flows) {
        std::string net = flow.inflow >= flow.outflow
                              ? amount_to_string(flow.inflow - flow.outflow)
                              : "-" + amount_to_string(flow.outflow - flow.inflow);
        accounts[addr] = {{"inflow", amount_to_string(flow.inflow)},
                          {"outflow", amount_to_string(flow.outflow)},
                          {"net", net}};
    }

    json orders = json::array();
    for (const Order& o : report.orders)
        orders.push_back({{"id", o.id},
                          {"side", to_string(o.side)},
                          {"account", o.account},
                          {"energy_wh", o.energy},
                          {"price", o.price},
                          {"tokens_locked", amount_to_string(o.tokens_locked)},
                          {"placed_at_block", o.placed_at_block},
                          {"remaining_energy_wh", o.remaining_energy},
                          {"status", to_string(o.status)}});

    json trades = json::array();
    for (const Trade& t : report.trades) {
        json entry = {{"id", t.id},
                      {"sell_order_id", t.sell_order_id},
                      {"buy_order_id", t.buy_order_id},
                      {"energy_wh", t.energy},
                      {"price", t.price},
                      {"settled", t.settled},
                      {"buyer_payment", amount_to_string(t.buyer_payment)},
                      {"seller_compensation", amount_to_string(t.seller_compensation)}};
        if (t.delivered)
            entry["delivered_wh"] = *t.delivered;
        trades.push_back(std::move(entry));
    }

    json series = json::array();
    for (const LockSeriesPoint& p : report.lock_series)
        series.push_back(
            {{"block", p.block}, {"active_locks", p.active_locks}, {"phase", to_string(p.phase)}});

    return json{{"session",
                 {{"id", report.session_id},
                  {"opened_at_block", report.opened_at_block},
                  {"closed_at_block", report.closed_at_block},
                  {"duration_blocks", report.duration_blocks},
                  {"escrow", report.escrow},
                  {"state", "closed"}}},
                {"accounts", accounts},
                {"orders", orders},
                {"trades", trades},
                {"lock_series", series}};
}

std::string throughput_to_csv(const gas::OverheadReport& report) {
    std::ostringstream out;
    out << "t_seconds,orders_plain,orders_with_lock\n";
    for (const gas::ThroughputRow& row : report.table)
        out << row.t_seconds << ',' << row.orders_plain << ',' << row.orders_with_lock << '\n';
    return out.str();
}

json overhead_report_to_json(const gas::OverheadReport& report) {
    json table = json::array();
    for (const gas::ThroughputRow& row : report.table)
        table.push_back({{"t_seconds", row.t_seconds},
                         {"orders_plain", row.orders_plain},
                         {"orders_with_lock", row.orders_with_lock}});
    return json{
        {"block_gas_limit", report.params.block_gas_limit},
        {"block_time_s", report.params.block_time_s},
        {"gas_table", report.params.gas_table},
        {"orders_per_block",
         {{gas::kPlaceOrderPlain, gas::orders_per_block(report.params, gas::kPlaceOrderPlain)},
          {gas::kPlaceOrderWithLock,
           gas::orders_per_block(report.params, gas::kPlaceOrderWithLock)}}},
        {"gas_delta", report.gas_delta},
        {"throughput_ratio", report.throughput_ratio},
        {"table", table}};
}

} // namespace lerc20
