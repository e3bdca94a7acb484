#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lerc20/gas.hpp"
#include "lerc20/ledger.hpp"
#include "lerc20/market.hpp"

namespace lerc20 {

/// Amounts travel as decimal strings in JSON so values above 2^53 survive
/// readers that parse numbers as doubles.
std::string amount_to_string(Amount a);
Amount amount_from_string(const std::string& s);

/// Full ledger snapshot, importable with ledger_from_json.
nlohmann::json ledger_to_json(const Ledger& ledger);

/// Rebuilds a ledger from a snapshot, revalidating the ledger invariants.
/// Throws SchemaError on malformed input or invariant violations.
Ledger ledger_from_json(const nlohmann::json& j);

/// `seq,owner,locking_address,amount,no_blocks,unlocking_address,status,timestamp,hour,min`
std::string events_to_csv(const std::vector<LockEventRecord>& events);

/// `block,active_locks`
std::string lock_series_to_csv(const std::vector<LockSeriesPoint>& series);

nlohmann::json report_to_json(const SessionReport& report);

/// `t_seconds,orders_plain,orders_with_lock`
std::string throughput_to_csv(const gas::OverheadReport& report);

nlohmann::json overhead_report_to_json(const gas::OverheadReport& report);

} // namespace lerc20
