#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lerc20/gas.hpp"
#include "lerc20/ledger.hpp"
#include "lerc20/market.hpp"
#include "lerc20/scenario.hpp"
#include "lerc20/serialize.hpp"

namespace py = pybind11;
using namespace lerc20;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    py::object loads = py::module_::import("json").attr("loads");
    return loads(j.dump());
}

} // namespace

PYBIND11_MODULE(lerc20, m) {
    m.doc() = "Lockable token ledger, P2P energy market session engine and gas "
              "throughput model";

    py::register_exception<DomainError>(m, "DomainError");

    py::enum_<LockStatus>(m, "LockStatus")
        .value("Lock", LockStatus::Lock)
        .value("UnlockTransfer", LockStatus::UnlockTransfer)
        .value("UnlockWithoutTransfer", LockStatus::UnlockWithoutTransfer);

    py::enum_<Side>(m, "Side").value("Sell", Side::Sell).value("Buy", Side::Buy);

    py::enum_<OrderStatus>(m, "OrderStatus")
        .value("Open", OrderStatus::Open)
        .value("PartiallyMatched", OrderStatus::PartiallyMatched)
        .value("Matched", OrderStatus::Matched)
        .value("Settled", OrderStatus::Settled)
        .value("Expired", OrderStatus::Expired);

    py::enum_<SessionState>(m, "SessionState")
        .value("Open", SessionState::Open)
        .value("Matching", SessionState::Matching)
        .value("Delivery", SessionState::Delivery)
        .value("Closed", SessionState::Closed);

    py::class_<LockedEntity>(m, "LockedEntity")
        .def_readonly("owner", &LockedEntity::owner)
        .def_readonly("amount", &LockedEntity::amount)
        .def_readonly("block_no", &LockedEntity::block_no)
        .def_readonly("is_active", &LockedEntity::is_active);

    py::class_<LockEventRecord>(m, "LockEventRecord")
        .def_readonly("owner", &LockEventRecord::owner)
        .def_readonly("locking_address", &LockEventRecord::locking_address)
        .def_readonly("amount", &LockEventRecord::amount)
        .def_readonly("no_blocks", &LockEventRecord::no_blocks)
        .def_readonly("unlocking_address", &LockEventRecord::unlocking_address)
        .def_readonly("status", &LockEventRecord::status)
        .def_readonly("timestamp", &LockEventRecord::timestamp)
        .def_readonly("hour", &LockEventRecord::hour)
        .def_readonly("min", &LockEventRecord::min);

    py::class_<Ledger>(m, "Ledger")
        .def(py::init<const Address&, Amount, Timestamp, std::uint64_t>(),
             py::arg("initial_owner"), py::arg("amount"), py::arg("genesis_time") = 0,
             py::arg("block_time_s") = Ledger::kDefaultBlockTimeSeconds)
        .def("advance_block", &Ledger::advance_block, py::arg("n"))
        .def_property_readonly("current_block", &Ledger::current_block)
        .def_property_readonly("total_supply", &Ledger::total_supply)
        .def("balance_of", &Ledger::balance_of)
        .def("allowance", &Ledger::allowance)
        .def("locked_balance_of", &Ledger::locked_balance_of)
        .def("unlocked_balance_of", &Ledger::unlocked_balance_of)
        .def("verify_lock", &Ledger::verify_lock, py::arg("owner"), py::arg("amount"),
             py::arg("unlocking_address"), py::arg("locking_address"), py::arg("at_block"))
        .def("active_lock_count", &Ledger::active_lock_count)
        .def("approve", &Ledger::approve)
        .def("increase_allowance", &Ledger::increase_allowance)
        .def("decrease_allowance", &Ledger::decrease_allowance)
        .def("transfer", &Ledger::transfer)
        .def("transfer_from", &Ledger::transfer_from)
        .def("lock", &Ledger::lock, py::arg("caller"), py::arg("amount"), py::arg("no_blocks"),
             py::arg("unlocking_address"))
        .def("lock_from", &Ledger::lock_from, py::arg("caller"), py::arg("owner"),
             py::arg("amount"), py::arg("no_blocks"), py::arg("unlocking_address"))
        .def("unlock_transfer", &Ledger::unlock_transfer, py::arg("caller"), py::arg("owner"),
             py::arg("amount"), py::arg("recipient"), py::arg("locking_address"))
        .def("unlock_without_transfer", &Ledger::unlock_without_transfer, py::arg("caller"),
             py::arg("owner"), py::arg("amount"), py::arg("locking_address"))
        .def("lock_at",
             [](const Ledger& ledger, const Address& unlocking, const Address& locking)
                 -> std::optional<LockedEntity> {
                 const LockedEntity* e = ledger.lock_at(unlocking, locking);
                 return e ? std::optional<LockedEntity>(*e) : std::nullopt;
             })
        .def("events", &Ledger::events)
        .def("events_filtered", &Ledger::events_filtered)
        .def("events_csv", [](const Ledger& ledger) { return events_to_csv(ledger.events()); })
        .def("to_json", [](const Ledger& ledger) { return ledger_to_json(ledger).dump(2); })
        .def_static("from_json", [](const std::string& text) {
            return ledger_from_json(nlohmann::json::parse(text));
        });

    py::class_<Order>(m, "Order")
        .def_readonly("id", &Order::id)
        .def_readonly("side", &Order::side)
        .def_readonly("account", &Order::account)
        .def_readonly("energy", &Order::energy)
        .def_readonly("price", &Order::price)
        .def_readonly("tokens_locked", &Order::tokens_locked)
        .def_readonly("placed_at_block", &Order::placed_at_block)
        .def_readonly("remaining_energy", &Order::remaining_energy)
        .def_readonly("status", &Order::status);

    py::class_<Trade>(m, "Trade")
        .def_readonly("id", &Trade::id)
        .def_readonly("sell_order_id", &Trade::sell_order_id)
        .def_readonly("buy_order_id", &Trade::buy_order_id)
        .def_readonly("energy", &Trade::energy)
        .def_readonly("price", &Trade::price)
        .def_readonly("settled", &Trade::settled)
        .def_readonly("delivered", &Trade::delivered)
        .def_readonly("buyer_payment", &Trade::buyer_payment)
        .def_readonly("seller_compensation", &Trade::seller_compensation);

    py::class_<LockSeriesPoint>(m, "LockSeriesPoint")
        .def_readonly("block", &LockSeriesPoint::block)
        .def_readonly("active_locks", &LockSeriesPoint::active_locks)
        .def_readonly("phase", &LockSeriesPoint::phase);

    py::class_<Session>(m, "Session")
        .def_readonly("id", &Session::id)
        .def_readonly("state", &Session::state)
        .def_readonly("opened_at_block", &Session::opened_at_block)
        .def_readonly("duration_blocks", &Session::duration_blocks)
        .def_readonly("escrow", &Session::escrow)
        .def_readonly("orders", &Session::orders)
        .def_readonly("trades", &Session::trades)
        .def_readonly("lock_series", &Session::lock_series)
        .def_property_readonly("end_block", &Session::end_block);

    py::class_<SessionReport>(m, "SessionReport")
        .def_readonly("session_id", &SessionReport::session_id)
        .def_readonly("opened_at_block", &SessionReport::opened_at_block)
        .def_readonly("closed_at_block", &SessionReport::closed_at_block)
        .def_readonly("orders", &SessionReport::orders)
        .def_readonly("trades", &SessionReport::trades)
        .def_readonly("lock_series", &SessionReport::lock_series)
        .def("to_dict", [](const SessionReport& r) { return json_to_py(report_to_json(r)); })
        .def("to_json", [](const SessionReport& r) { return report_to_json(r).dump(2); });

    py::class_<MarketEngine>(m, "MarketEngine")
        .def(py::init<>())
        .def("open_session", &MarketEngine::open_session, py::arg("ledger"),
             py::arg("session_id"), py::arg("duration_blocks"), py::arg("escrow"),
             py::return_value_policy::copy)
        .def("place_order", &MarketEngine::place_order, py::arg("ledger"), py::arg("account"),
             py::arg("side"), py::arg("energy"), py::arg("price"),
             py::return_value_policy::copy)
        .def("run_matching", &MarketEngine::run_matching, py::arg("ledger"))
        .def(
            "settle_trade",
            [](MarketEngine& engine, Ledger& ledger, std::uint64_t trade_id,
               EnergyQuantity delivered) {
                engine.settle_trade(ledger, MeterReading{trade_id, delivered});
            },
            py::arg("ledger"), py::arg("trade_id"), py::arg("delivered"))
        .def("close_session", &MarketEngine::close_session, py::arg("ledger"))
        .def_property_readonly("has_session", &MarketEngine::has_session)
        .def("session", &MarketEngine::session, py::return_value_policy::copy)
        .def("lock_count_series", &MarketEngine::lock_count_series,
             py::return_value_policy::copy);

    auto gas_mod = m.def_submodule("gas", "Order throughput under a block gas limit");
    py::class_<gas::GasParams>(gas_mod, "GasParams")
        .def(py::init<>())
        .def_readwrite("block_gas_limit", &gas::GasParams::block_gas_limit)
        .def_readwrite("block_time_s", &gas::GasParams::block_time_s)
        .def_readwrite("gas_table", &gas::GasParams::gas_table);
    py::class_<gas::ThroughputRow>(gas_mod, "ThroughputRow")
        .def_readonly("t_seconds", &gas::ThroughputRow::t_seconds)
        .def_readonly("orders_plain", &gas::ThroughputRow::orders_plain)
        .def_readonly("orders_with_lock", &gas::ThroughputRow::orders_with_lock);
    py::class_<gas::OverheadReport>(gas_mod, "OverheadReport")
        .def_readonly("gas_delta", &gas::OverheadReport::gas_delta)
        .def_readonly("throughput_ratio", &gas::OverheadReport::throughput_ratio)
        .def_readonly("table", &gas::OverheadReport::table)
        .def("to_dict",
             [](const gas::OverheadReport& r) { return json_to_py(overhead_report_to_json(r)); })
        .def("to_csv", [](const gas::OverheadReport& r) { return throughput_to_csv(r); });
    gas_mod.attr("PLACE_ORDER_PLAIN") = gas::kPlaceOrderPlain;
    gas_mod.attr("PLACE_ORDER_WITH_LOCK") = gas::kPlaceOrderWithLock;
    gas_mod.def("orders_per_block", &gas::orders_per_block, py::arg("params"),
                py::arg("op_name"));
    gas_mod.def("session_capacity", &gas::session_capacity, py::arg("params"),
                py::arg("op_name"), py::arg("session_seconds"));
    gas_mod.def("overhead_report", &gas::overhead_report, py::arg("params") = gas::GasParams{},
                py::arg("session_seconds") = 4 * 3600, py::arg("resolution_blocks") = 1);

    m.def(
        "run_scenario",
        [](const std::string& scenario_text) {
            Scenario scenario = parse_scenario(nlohmann::json::parse(scenario_text));
            ScenarioRun run = run_scenario(scenario);
            py::dict out;
            out["report"] = json_to_py(report_to_json(run.report));
            out["events_csv"] = events_to_csv(run.ledger.events());
            out["locks_csv"] = lock_series_to_csv(run.report.lock_series);
            out["throughput_csv"] = throughput_to_csv(run.gas_report);
            return out;
        },
        py::arg("scenario_json"),
        "Run a scenario document end to end and return its outputs");
}
