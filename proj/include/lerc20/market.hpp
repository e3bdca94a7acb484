#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "lerc20/ledger.hpp"

namespace lerc20 {

/// Watt-hours.
using EnergyQuantity = std::uint64_t;

/// Token units per watt-hour.
using Price = std::uint64_t;

enum class Side : std::uint8_t { Sell, Buy };
enum class OrderStatus : std::uint8_t { Open, PartiallyMatched, Matched, Settled, Expired };
enum class SessionState : std::uint8_t { Open, Matching, Delivery, Closed };

const char* to_string(Side s);
const char* to_string(OrderStatus s);
const char* to_string(SessionState s);

/// A bid or offer. Placing it locks price * energy tokens of the account
/// for the rest of the session.
struct Order {
    std::uint64_t id = 0;
    Side side = Side::Sell;
    Address account;
    EnergyQuantity energy = 0;
    Price price = 0;
    Amount tokens_locked = 0;
    BlockNumber placed_at_block = 0;
    EnergyQuantity remaining_energy = 0;
    OrderStatus status = OrderStatus::Open;
    /// Tokens of this order still held under lock; drops to 0 as its trades
    /// settle and the close releases the unmatched remainder.
    Amount tokens_outstanding = 0;

    bool operator==(const Order&) const = default;
};

/// A matched (sell, buy) pair. Execution price is the sell offer's price.
struct Trade {
    std::uint64_t id = 0;
    std::uint64_t sell_order_id = 0;
    std::uint64_t buy_order_id = 0;
    EnergyQuantity energy = 0;
    Price price = 0;
    bool settled = false;
    std::optional<EnergyQuantity> delivered;
    Amount buyer_payment = 0;
    Amount seller_compensation = 0;

    bool operator==(const Trade&) const = default;
};

struct MeterReading {
    std::uint64_t trade_id = 0;
    EnergyQuantity delivered = 0;
};

struct LockSeriesPoint {
    BlockNumber block = 0;
    std::uint64_t active_locks = 0;
    SessionState phase = SessionState::Open;

    bool operator==(const LockSeriesPoint&) const = default;
};

struct Session {
    std::uint64_t id = 0;
    SessionState state = SessionState::Open;
    BlockNumber opened_at_block = 0;
    BlockNumber duration_blocks = 0;
    Address escrow;
    std::vector<Order> orders;
    std::vector<Trade> trades;
    std::vector<LockSeriesPoint> lock_series;

    BlockNumber end_block() const { return checked_add(opened_at_block, duration_blocks); }
};

/// Token in/outflow of one account over a session.
struct TokenFlow {
    Amount inflow = 0;
    Amount outflow = 0;

    bool operator==(const TokenFlow&) const = default;
};

struct SessionReport {
    std::uint64_t session_id = 0;
    BlockNumber opened_at_block = 0;
    BlockNumber closed_at_block = 0;
    BlockNumber duration_blocks = 0;
    Address escrow;
    std::map<Address, TokenFlow> flows;
    std::vector<Order> orders;
    std::vector<Trade> trades;
    std::vector<LockSeriesPoint> lock_series;
};

/// Day-ahead session engine: collects orders during the Open phase, locking
/// price * energy tokens per order, runs a merit-order double auction at
/// session end, settles trades against metered delivery and releases every
/// lock by close. One active session at a time.
class MarketEngine {
public:
    /// Opens a session at the ledger's current block. Locks placed in it
    /// expire at opened_at_block + duration_blocks.
    const Session& open_session(Ledger& ledger, std::uint64_t session_id,
                                BlockNumber duration_blocks, const Address& escrow);

    /// Places an order and acquires its lock, atomically: a rejected order
    /// leaves both book and ledger unchanged. Requires the account to have
    /// approved the escrow for at least price * energy.
    const Order& place_order(Ledger& ledger, const Address& account, Side side,
                             EnergyQuantity energy, Price price);

    /// Merit-order double auction over the book, allowed once the session
    /// duration has elapsed. Sells ascend by price, buys descend; trades form
    /// while the best bid covers the best ask, at the ask (pay-as-offered).
    /// Moves the session to Delivery and returns the trades.
    std::vector<Trade> run_matching(Ledger& ledger);

    /// Settles one trade against a meter reading (clamped to the matched
    /// energy). The buyer pays price * delivered to the seller; the rest of
    /// the buyer's lock share is refunded. The seller's collateral returns
    /// pro-rata for delivered energy and covers the shortfall to the buyer.
    void settle_trade(Ledger& ledger, const MeterReading& reading);

    /// Releases the residual locks of unmatched energy, closes the session
    /// and returns the report. All trades must be settled.
    SessionReport close_session(Ledger& ledger);

    bool has_session() const noexcept { return session_.has_value(); }
    const Session& session() const;

    /// One point per lock-affecting event of the current or last session.
    const std::vector<LockSeriesPoint>& lock_count_series() const;

private:
    Session& require_session(SessionState expected, ErrorCode on_mismatch);
    Order& order_by_id(std::uint64_t id);
    void release_order_tokens(Order& order, Amount amount);
    void append_series_point(BlockNumber block, SessionState phase);
    void add_outflow(const Address& account, Amount amount);
    void add_inflow(const Address& account, Amount amount);

    std::optional<Session> session_;
    std::map<Address, TokenFlow> flows_;
    std::uint64_t active_order_locks_ = 0;
};

} // namespace lerc20
