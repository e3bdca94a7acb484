"""Smoke tests for the lerc20 extension module."""

import json

import pytest

import lerc20


def test_ledger_lock_lifecycle():
    ledger = lerc20.Ledger("alice", 1000, 0)
    assert ledger.total_supply == 1000
    assert ledger.balance_of("alice") == 1000

    ledger.lock("alice", 300, 10, "escrow")
    assert ledger.locked_balance_of("alice") == 300
    assert ledger.unlocked_balance_of("alice") == 700
    assert ledger.allowance("alice", "escrow") == 300

    assert not ledger.verify_lock("alice", 300, "escrow", "alice", 9)
    ledger.advance_block(10)
    assert ledger.verify_lock("alice", 300, "escrow", "alice", ledger.current_block)

    ledger.unlock_transfer("escrow", "alice", 300, "bob", "alice")
    assert ledger.balance_of("bob") == 300
    assert [int(e.status) for e in ledger.events()] == [0, 1]


def test_locked_funds_cannot_move():
    ledger = lerc20.Ledger("alice", 100, 0)
    ledger.lock("alice", 80, 5, "escrow")
    with pytest.raises(lerc20.DomainError, match="InsufficientUnlockedBalance"):
        ledger.transfer("alice", "bob", 50)
    assert ledger.balance_of("alice") == 100


def test_snapshot_round_trip():
    ledger = lerc20.Ledger("alice", 1000, 0)
    ledger.lock("alice", 10, 3, "escrow")
    snapshot = ledger.to_json()
    restored = lerc20.Ledger.from_json(snapshot)
    assert restored.locked_balance_of("alice") == 10
    assert restored.to_json() == snapshot


def test_market_session_roundtrip():
    ledger = lerc20.Ledger("market", 200, 0)
    for name in ("seller", "buyer"):
        ledger.transfer("market", name, 100)
        ledger.approve(name, "market", 100)

    engine = lerc20.MarketEngine()
    engine.open_session(ledger, 1, 4, "market")
    engine.place_order(ledger, "seller", lerc20.Side.Sell, 10, 5)
    engine.place_order(ledger, "buyer", lerc20.Side.Buy, 10, 7)
    ledger.advance_block(4)

    trades = engine.run_matching(ledger)
    assert len(trades) == 1
    assert trades[0].price == 5

    engine.settle_trade(ledger, 1, 6)
    report = engine.close_session(ledger)

    assert ledger.balance_of("seller") == 110
    assert ledger.balance_of("buyer") == 90
    assert ledger.active_lock_count() == 0
    assert report.lock_series[-1].active_locks == 0

    doc = report.to_dict()
    assert doc["trades"][0]["buyer_payment"] == "30"
    assert doc["trades"][0]["seller_compensation"] == "20"


def test_gas_model_numbers():
    params = lerc20.gas.GasParams()
    assert lerc20.gas.orders_per_block(params, lerc20.gas.PLACE_ORDER_WITH_LOCK) == 20
    assert lerc20.gas.orders_per_block(params, lerc20.gas.PLACE_ORDER_PLAIN) == 43
    assert lerc20.gas.session_capacity(params, lerc20.gas.PLACE_ORDER_WITH_LOCK, 4 * 3600) == 19200

    report = lerc20.gas.overhead_report(params)
    assert report.gas_delta == 399791
    assert report.table[-1].orders_with_lock == 19200


def test_run_scenario_document():
    scenario = {
        "accounts": [
            {"address": "seller", "initial_balance": 100, "approve_market": 100},
            {"address": "buyer", "initial_balance": 100, "approve_market": 100},
        ],
        "session": {"duration_blocks": 4, "block_time_s": 15},
        "orders": [
            {"block_offset": 0, "account": "seller", "side": "sell", "energy_wh": 10, "price": 5},
            {"block_offset": 1, "account": "buyer", "side": "buy", "energy_wh": 10, "price": 7},
        ],
        "deliveries": [{"trade_id": 1, "delivered_wh": 6}],
    }
    out = lerc20.run_scenario(json.dumps(scenario))
    assert out["report"]["accounts"]["buyer"]["net"] == "-10"
    assert out["report"]["accounts"]["seller"]["net"] == "10"
    assert out["locks_csv"].splitlines()[0] == "block,active_locks"
    assert out["events_csv"].splitlines()[0].startswith("seq,owner,locking_address")
    assert out["throughput_csv"].splitlines()[-1] == "14400,41280,19200"


def test_schema_errors_are_domain_errors():
    with pytest.raises(lerc20.DomainError, match="SchemaError"):
        lerc20.run_scenario(json.dumps({"accounts": [], "bogus": 1}))
