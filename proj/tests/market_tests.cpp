#include <doctest.h>

#include <functional>

#include "lerc20/market.hpp"
#include "lerc20/serialize.hpp"

using namespace lerc20;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const DomainError& e) {
        return e.code();
    }
    FAIL("expected a DomainError");
    return ErrorCode::SchemaError;
}

// Ledger with funded, market-approved participants.
Ledger funded_ledger(const std::vector<Address>& accounts, Amount each = 10'000) {
    Ledger ledger("market", checked_mul(each, accounts.size()), 0);
    for (const Address& a : accounts) {
        ledger.transfer("market", a, each);
        ledger.approve(a, "market", each);
    }
    return ledger;
}

} // namespace

TEST_CASE("open_session starts the locking phase at the current block") {
    Ledger ledger = funded_ledger({"alice"});
    MarketEngine engine;
    const Session& s = engine.open_session(ledger, 1, 960, "market");
    CHECK(s.state == SessionState::Open);
    CHECK(s.opened_at_block == 0);
    CHECK(s.end_block() == 960);

    // Orders carry the remaining session duration as their lock period.
    engine.place_order(ledger, "alice", Side::Sell, 10, 5);
    CHECK(ledger.events().back().no_blocks == 960);

    CHECK(code_of([&] { engine.open_session(ledger, 2, 10, "market"); }) ==
          ErrorCode::SessionAlreadyActive);
}

TEST_CASE("a zero-duration session is immediately matchable") {
    Ledger ledger = funded_ledger({"alice"});
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    engine.place_order(ledger, "alice", Side::Sell, 10, 5);
    CHECK(ledger.events().back().no_blocks == 0);
    CHECK_NOTHROW(engine.run_matching(ledger));
}

TEST_CASE("place_order locks price times energy") {
    Ledger ledger = funded_ledger({"alice", "bob"});
    MarketEngine engine;
    engine.open_session(ledger, 1, 100, "market");

    const Order& order = engine.place_order(ledger, "alice", Side::Sell, 10, 5);
    CHECK(order.tokens_locked == 50);
    CHECK(order.remaining_energy == 10);
    CHECK(order.status == OrderStatus::Open);
    CHECK(ledger.locked_balance_of("alice") == 50);
}

TEST_CASE("place_order rejects atomically when the buyer cannot cover the bid") {
    Ledger ledger("market", 10'049, 0);
    ledger.transfer("market", "alice", 10'000);
    ledger.transfer("market", "buyer", 49);
    ledger.approve("alice", "market", 10'000);
    ledger.approve("buyer", "market", 10'000);

    MarketEngine engine;
    engine.open_session(ledger, 1, 100, "market");
    Ledger before = ledger;
    CHECK(code_of([&] { engine.place_order(ledger, "buyer", Side::Buy, 10, 5); }) ==
          ErrorCode::InsufficientUnlockedBalance);
    CHECK(ledger == before);
    CHECK(engine.session().orders.empty());
}

TEST_CASE("place_order requires a market approval and positive size") {
    Ledger ledger("market", 1000, 0);
    ledger.transfer("market", "alice", 1000);
    MarketEngine engine;
    engine.open_session(ledger, 1, 100, "market");

    CHECK(code_of([&] { engine.place_order(ledger, "alice", Side::Sell, 10, 5); }) ==
          ErrorCode::InsufficientAllowance);

    ledger.approve("alice", "market", 1000);
    Ledger before = ledger;
    CHECK(code_of([&] { engine.place_order(ledger, "alice", Side::Sell, 0, 5); }) ==
          ErrorCode::InvalidOrder);
    CHECK(ledger == before); // rejected before any ledger call
    CHECK(code_of([&] { engine.place_order(ledger, "alice", Side::Buy, 10, 0); }) ==
          ErrorCode::InvalidOrder);
}

TEST_CASE("matching crosses the best bid with the cheapest offer at the offer price") {
    Ledger ledger = funded_ledger({"s1", "b1"});
    MarketEngine engine;
    engine.open_session(ledger, 1, 10, "market");
    engine.place_order(ledger, "s1", Side::Sell, 10, 5);
    engine.place_order(ledger, "b1", Side::Buy, 10, 7);

    CHECK(code_of([&] { engine.run_matching(ledger); }) == ErrorCode::SessionNotEnded);
    ledger.advance_block(10);
    std::vector<Trade> trades = engine.run_matching(ledger);

    REQUIRE(trades.size() == 1);
    CHECK(trades[0].sell_order_id == 1);
    CHECK(trades[0].buy_order_id == 2);
    CHECK(trades[0].energy == 10);
    CHECK(trades[0].price == 5);
    CHECK(engine.session().state == SessionState::Delivery);
}

TEST_CASE("matching leaves uncrossed books untouched") {
    Ledger ledger = funded_ledger({"s1", "b1"});
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    engine.place_order(ledger, "s1", Side::Sell, 10, 5);
    engine.place_order(ledger, "b1", Side::Buy, 10, 4);

    CHECK(engine.run_matching(ledger).empty());
    CHECK(engine.session().orders[0].status == OrderStatus::Expired);
    CHECK(engine.session().orders[1].status == OrderStatus::Expired);
}

TEST_CASE("matching walks the merit order and splits partially") {
    Ledger ledger = funded_ledger({"s1", "s2", "b1"});
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    engine.place_order(ledger, "s1", Side::Sell, 5, 5);
    engine.place_order(ledger, "s2", Side::Sell, 5, 6);
    engine.place_order(ledger, "b1", Side::Buy, 8, 6);

    std::vector<Trade> trades = engine.run_matching(ledger);
    REQUIRE(trades.size() == 2);
    CHECK(trades[0].sell_order_id == 1);
    CHECK(trades[0].energy == 5);
    CHECK(trades[0].price == 5);
    CHECK(trades[1].sell_order_id == 2);
    CHECK(trades[1].energy == 3);
    CHECK(trades[1].price == 6);

    const Session& s = engine.session();
    CHECK(s.orders[0].status == OrderStatus::Matched);
    CHECK(s.orders[1].status == OrderStatus::PartiallyMatched);
    CHECK(s.orders[1].remaining_energy == 2);
    CHECK(s.orders[2].status == OrderStatus::Matched);
    CHECK(s.orders[2].remaining_energy == 0);
}

TEST_CASE("no orders may be placed once matching has run") {
    Ledger ledger = funded_ledger({"alice"});
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    engine.run_matching(ledger);
    CHECK(code_of([&] { engine.place_order(ledger, "alice", Side::Sell, 1, 1); }) ==
          ErrorCode::SessionNotOpen);
    CHECK(code_of([&] { engine.run_matching(ledger); }) == ErrorCode::SessionNotOpen);
}

TEST_CASE("settlement splits payment, refund and compensation by delivery") {
    Ledger ledger = funded_ledger({"seller", "buyer"}, 100);
    MarketEngine engine;
    engine.open_session(ledger, 1, 4, "market");
    engine.place_order(ledger, "seller", Side::Sell, 10, 5);
    engine.place_order(ledger, "buyer", Side::Buy, 10, 5);
    ledger.advance_block(4);
    engine.run_matching(ledger);

    CHECK(code_of([&] { engine.settle_trade(ledger, {7, 10}); }) == ErrorCode::TradeNotFound);

    SUBCASE("full delivery pays the seller in full") {
        engine.settle_trade(ledger, {1, 10});
        CHECK(ledger.balance_of("seller") == 150);
        CHECK(ledger.balance_of("buyer") == 50);
        const Trade& t = engine.session().trades[0];
        CHECK(t.buyer_payment == 50);
        CHECK(t.seller_compensation == 0);
    }

    SUBCASE("under-delivery pays pro rata and compensates the buyer") {
        engine.settle_trade(ledger, {1, 6});
        CHECK(ledger.balance_of("seller") == 100 + 30 - 20);
        CHECK(ledger.balance_of("buyer") == 100 - 30 + 20);
        const Trade& t = engine.session().trades[0];
        CHECK(t.buyer_payment == 30);
        CHECK(t.seller_compensation == 20);
    }

    SUBCASE("total non-delivery forfeits the full collateral") {
        engine.settle_trade(ledger, {1, 0});
        CHECK(ledger.balance_of("seller") == 50);
        CHECK(ledger.balance_of("buyer") == 150);
    }

    SUBCASE("over-delivery is clamped to the matched energy") {
        engine.settle_trade(ledger, {1, 25});
        CHECK(ledger.balance_of("seller") == 150);
        CHECK(engine.session().trades[0].delivered == 10);
    }

    SUBCASE("a trade settles only once") {
        engine.settle_trade(ledger, {1, 10});
        CHECK(code_of([&] { engine.settle_trade(ledger, {1, 10}); }) ==
              ErrorCode::TradeAlreadySettled);
    }
}

TEST_CASE("the buyer's premium above the execution price is refunded") {
    Ledger ledger = funded_ledger({"seller", "buyer"}, 100);
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    engine.place_order(ledger, "seller", Side::Sell, 10, 5);
    engine.place_order(ledger, "buyer", Side::Buy, 10, 7); // locks 70
    engine.run_matching(ledger);
    engine.settle_trade(ledger, {1, 10});

    CHECK(ledger.balance_of("buyer") == 50);  // paid 50, premium 20 refunded in place
    CHECK(ledger.balance_of("seller") == 150);
    CHECK(ledger.locked_balance_of("buyer") == 0);
    CHECK(ledger.locked_balance_of("seller") == 0);
}

TEST_CASE("settlement is gated on the delivery phase") {
    Ledger ledger = funded_ledger({"alice"});
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    CHECK(code_of([&] { engine.settle_trade(ledger, {1, 5}); }) ==
          ErrorCode::SessionNotInDelivery);
}

TEST_CASE("close releases residual locks and reports per-account flows") {
    Ledger ledger = funded_ledger({"s1", "s2", "b1"}, 1000);
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    engine.place_order(ledger, "s1", Side::Sell, 10, 5); // expires
    engine.place_order(ledger, "s2", Side::Sell, 5, 3);
    engine.place_order(ledger, "b1", Side::Buy, 5, 4);
    engine.run_matching(ledger);

    CHECK(code_of([&] { engine.close_session(ledger); }) == ErrorCode::UnsettledTradesRemain);

    engine.settle_trade(ledger, {1, 5});
    SessionReport report = engine.close_session(ledger);

    CHECK(ledger.locked_balance_of("s1") == 0);
    CHECK(ledger.locked_balance_of("s2") == 0);
    CHECK(ledger.locked_balance_of("b1") == 0);
    CHECK(ledger.active_lock_count() == 0);
    CHECK(ledger.balance_of("s1") == 1000); // expired sell fully refunded
    CHECK(report.orders[0].status == OrderStatus::Expired);
    CHECK(report.orders[1].status == OrderStatus::Settled);
    CHECK(report.flows.at("s2").inflow == 15);
    CHECK(report.flows.at("b1").outflow == 15);
    CHECK(engine.session().state == SessionState::Closed);

    // A fresh session may open once the previous one closed.
    CHECK_NOTHROW(engine.open_session(ledger, 2, 5, "market"));
}

TEST_CASE("lock count series rises per order and falls back to zero") {
    Ledger ledger = funded_ledger({"s1", "s2", "b1"}, 1000);
    MarketEngine engine;
    engine.open_session(ledger, 1, 3, "market");
    engine.place_order(ledger, "s1", Side::Sell, 10, 5); // will expire
    ledger.advance_block(1);
    engine.place_order(ledger, "s2", Side::Sell, 5, 3);
    ledger.advance_block(1);
    engine.place_order(ledger, "b1", Side::Buy, 5, 4);
    ledger.advance_block(1);
    engine.run_matching(ledger);
    engine.settle_trade(ledger, {1, 5});
    engine.close_session(ledger);

    const auto& series = engine.lock_count_series();
    std::uint64_t peak = 0;
    for (const LockSeriesPoint& p : series)
        peak = std::max(peak, p.active_locks);
    CHECK(peak == 3);
    CHECK(series.back().active_locks == 0);
    CHECK(series.back().phase == SessionState::Closed);

    // Non-decreasing through Open, non-increasing afterwards.
    std::uint64_t prev = 0;
    bool in_open = true;
    for (const LockSeriesPoint& p : series) {
        if (p.phase == SessionState::Open) {
            CHECK(p.active_locks >= prev);
        } else {
            if (in_open)
                in_open = false;
            else
                CHECK(p.active_locks <= prev);
        }
        prev = p.active_locks;
    }
}

TEST_CASE("an empty session has a flat zero lock series") {
    Ledger ledger = funded_ledger({"alice"});
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    engine.run_matching(ledger);
    engine.close_session(ledger);
    for (const LockSeriesPoint& p : engine.lock_count_series())
        CHECK(p.active_locks == 0);
}

TEST_CASE("a single unmatched order rises to one and drops at close") {
    Ledger ledger = funded_ledger({"alice"});
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    engine.place_order(ledger, "alice", Side::Sell, 10, 5);
    engine.run_matching(ledger);
    engine.close_session(ledger);

    const auto& series = engine.lock_count_series();
    std::uint64_t peak = 0;
    for (const LockSeriesPoint& p : series)
        peak = std::max(peak, p.active_locks);
    CHECK(peak == 1);
    CHECK(series.back().active_locks == 0);
}

TEST_CASE("session tokens are conserved and the engine ends flat") {
    Ledger ledger = funded_ledger({"s1", "s2", "b1", "b2"}, 500);
    Amount market_before = ledger.balance_of("market");
    MarketEngine engine;
    engine.open_session(ledger, 1, 0, "market");
    engine.place_order(ledger, "s1", Side::Sell, 10, 2);
    engine.place_order(ledger, "s2", Side::Sell, 4, 6);
    engine.place_order(ledger, "b1", Side::Buy, 7, 4);
    engine.place_order(ledger, "b2", Side::Buy, 3, 2);
    engine.run_matching(ledger);
    for (const Trade& t : engine.session().trades)
        engine.settle_trade(ledger, {t.id, t.energy / 2});
    SessionReport report = engine.close_session(ledger);

    Amount in_sum = 0;
    Amount out_sum = 0;
    for (const auto& [addr, flow] : report.flows) {
        in_sum += flow.inflow;
        out_sum += flow.outflow;
    }
    CHECK(in_sum == out_sum);
    CHECK(ledger.balance_of("market") == market_before);
    CHECK(ledger.active_lock_count() == 0);

    Amount total = 0;
    for (const auto& [addr, balance] : ledger.balances())
        total += balance;
    CHECK(total == ledger.total_supply());
}

TEST_CASE("identical sessions produce identical reports") {
    auto run = [] {
        Ledger ledger = funded_ledger({"s1", "b1"}, 200);
        MarketEngine engine;
        engine.open_session(ledger, 1, 2, "market");
        engine.place_order(ledger, "s1", Side::Sell, 10, 5);
        engine.place_order(ledger, "b1", Side::Buy, 10, 7);
        ledger.advance_block(2);
        engine.run_matching(ledger);
        engine.settle_trade(ledger, {1, 6});
        SessionReport report = engine.close_session(ledger);
        return report_to_json(report).dump() + events_to_csv(ledger.events());
    };
    CHECK(run() == run());
}
