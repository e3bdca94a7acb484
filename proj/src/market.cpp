#include "lerc20/market.hpp"

#include <algorithm>
#include <string>

namespace lerc20 {

const char* to_string(Side s) { return s == Side::Sell ? "sell" : "buy"; }

const char* to_string(OrderStatus s) {
    switch (s) {
    case OrderStatus::Open: return "open";
    case OrderStatus::PartiallyMatched: return "partially_matched";
    case OrderStatus::Matched: return "matched";
    case OrderStatus::Settled: return "settled";
    case OrderStatus::Expired: return "expired";
    }
    return "unknown";
}

const char* to_string(SessionState s) {
    switch (s) {
    case SessionState::Open: return "open";
    case SessionState::Matching: return "matching";
    case SessionState::Delivery: return "delivery";
    case SessionState::Closed: return "closed";
    }
    return "unknown";
}

const Session& MarketEngine::session() const {
    if (!session_)
        throw DomainError(ErrorCode::SessionNotOpen, "no session on this engine");
    return *session_;
}

const std::vector<LockSeriesPoint>& MarketEngine::lock_count_series() const {
    return session().lock_series;
}

Session& MarketEngine::require_session(SessionState expected, ErrorCode on_mismatch) {
    if (!session_ || session_->state != expected)
        throw DomainError(on_mismatch,
                          std::string("session is ") +
                              (session_ ? to_string(session_->state) : "absent"));
    return *session_;
}

Order& MarketEngine::order_by_id(std::uint64_t id) {
    // Ids are assigned 1..N in placement order.
    return session_->orders.at(id - 1);
}

void MarketEngine::append_series_point(BlockNumber block, SessionState phase) {
    session_->lock_series.push_back(LockSeriesPoint{block, active_order_locks_, phase});
}

void MarketEngine::add_outflow(const Address& account, Amount amount) {
    flows_[account].outflow = checked_add(flows_[account].outflow, amount);
}

void MarketEngine::add_inflow(const Address& account, Amount amount) {
    flows_[account].inflow = checked_add(flows_[account].inflow, amount);
}

const Session& MarketEngine::open_session(Ledger& ledger, std::uint64_t session_id,
                                          BlockNumber duration_blocks, const Address& escrow) {
    if (session_ && session_->state != SessionState::Closed)
        throw DomainError(ErrorCode::SessionAlreadyActive,
                          "session " + std::to_string(session_->id) + " is still " +
                              to_string(session_->state));
    if (escrow.empty())
        throw DomainError(ErrorCode::InvalidAddress, "empty escrow address");
    session_.emplace();
    session_->id = session_id;
    session_->state = SessionState::Open;
    session_->opened_at_block = ledger.current_block();
    session_->duration_blocks = duration_blocks;
    session_->escrow = escrow;
    flows_.clear();
    active_order_locks_ = 0;
    append_series_point(ledger.current_block(), SessionState::Open);
    return *session_;
}

const Order& MarketEngine::place_order(Ledger& ledger, const Address& account, Side side,
                                       EnergyQuantity energy, Price price) {
    Session& s = require_session(SessionState::Open, ErrorCode::SessionNotOpen);
    if (energy == 0 || price == 0)
        throw DomainError(ErrorCode::InvalidOrder, "energy and price must be positive");
    Amount tokens = checked_mul(price, energy);
    if (tokens > ledger.unlocked_balance_of(account))
        throw DomainError(ErrorCode::InsufficientUnlockedBalance,
                          account + " cannot cover " + std::to_string(tokens) + " tokens");
    if (ledger.allowance(account, s.escrow) < tokens)
        throw DomainError(ErrorCode::InsufficientAllowance,
                          account + " has not approved the market for " +
                              std::to_string(tokens) + " tokens");

    BlockNumber end = s.end_block();
    BlockNumber remaining =
        end > ledger.current_block() ? end - ledger.current_block() : 0;
    // The account locks its own tokens toward the escrow; per-owner lock keys
    // keep distinct participants from colliding in the lock map.
    ledger.lock(account, tokens, remaining, s.escrow);

    Order order;
    order.id = s.orders.size() + 1;
    order.side = side;
    order.account = account;
    order.energy = energy;
    order.price = price;
    order.tokens_locked = tokens;
    order.placed_at_block = ledger.current_block();
    order.remaining_energy = energy;
    order.status = OrderStatus::Open;
    order.tokens_outstanding = tokens;
    s.orders.push_back(order);

    flows_.try_emplace(account);
    ++active_order_locks_;
    append_series_point(ledger.current_block(), SessionState::Open);
    return s.orders.back();
}

std::vector<Trade> MarketEngine::run_matching(Ledger& ledger) {
    Session& s = require_session(SessionState::Open, ErrorCode::SessionNotOpen);
    if (ledger.current_block() < s.end_block())
        throw DomainError(ErrorCode::SessionNotEnded,
                          "session runs until block " + std::to_string(s.end_block()));
    s.state = SessionState::Matching;

    std::vector<Order*> sells;
    std::vector<Order*> buys;
    for (Order& o : s.orders)
        (o.side == Side::Sell ? sells : buys).push_back(&o);
    std::sort(sells.begin(), sells.end(), [](const Order* a, const Order* b) {
        return a->price != b->price ? a->price < b->price : a->id < b->id;
    });
    std::sort(buys.begin(), buys.end(), [](const Order* a, const Order* b) {
        return a->price != b->price ? a->price > b->price : a->id < b->id;
    });

    std::size_t si = 0;
    std::size_t bi = 0;
    while (si < sells.size() && bi < buys.size()) {
        Order& sell = *sells[si];
        Order& buy = *buys[bi];
        if (buy.price < sell.price)
            break;
        EnergyQuantity matched = std::min(sell.remaining_energy, buy.remaining_energy);

        Trade trade;
        trade.id = s.trades.size() + 1;
        trade.sell_order_id = sell.id;
        trade.buy_order_id = buy.id;
        trade.energy = matched;
        trade.price = sell.price; // pay-as-offered
        s.trades.push_back(trade);

        sell.remaining_energy -= matched;
        buy.remaining_energy -= matched;
        sell.status = sell.remaining_energy == 0 ? OrderStatus::Matched
                                                 : OrderStatus::PartiallyMatched;
        buy.status =
            buy.remaining_energy == 0 ? OrderStatus::Matched : OrderStatus::PartiallyMatched;
        if (sell.remaining_energy == 0)
            ++si;
        if (buy.remaining_energy == 0)
            ++bi;
    }

    for (Order& o : s.orders)
        if (o.status == OrderStatus::Open)
            o.status = OrderStatus::Expired;

    s.state = SessionState::Delivery;
    return s.trades;
}

void MarketEngine::release_order_tokens(Order& order, Amount amount) {
    order.tokens_outstanding = checked_sub(order.tokens_outstanding, amount);
    if (order.tokens_outstanding == 0)
        --active_order_locks_;
}

void MarketEngine::settle_trade(Ledger& ledger, const MeterReading& reading) {
    Session& s = require_session(SessionState::Delivery, ErrorCode::SessionNotInDelivery);
    if (reading.trade_id == 0 || reading.trade_id > s.trades.size())
        throw DomainError(ErrorCode::TradeNotFound,
                          "no trade with id " + std::to_string(reading.trade_id));
    Trade& trade = s.trades[reading.trade_id - 1];
    if (trade.settled)
        throw DomainError(ErrorCode::TradeAlreadySettled,
                          "trade " + std::to_string(trade.id) + " already settled");

    Order& sell = order_by_id(trade.sell_order_id);
    Order& buy = order_by_id(trade.buy_order_id);

    EnergyQuantity delivered = std::min(reading.delivered, trade.energy);
    EnergyQuantity shortfall = trade.energy - delivered;
    Amount payment = checked_mul(trade.price, delivered);
    Amount compensation = checked_mul(trade.price, shortfall);
    Amount buyer_share = checked_mul(buy.price, trade.energy);
    Amount seller_share = checked_mul(trade.price, trade.energy);
    Amount buyer_refund = checked_sub(buyer_share, payment);
    Amount collateral_return = payment;

    // Buyer pays for delivered energy; the unspent rest of the bid's lock
    // share (price premium plus undelivered part) is released in place.
    if (payment > 0)
        ledger.unlock_transfer(s.escrow, buy.account, payment, sell.account, buy.account);
    if (buyer_refund > 0)
        ledger.unlock_without_transfer(s.escrow, buy.account, buyer_refund, buy.account);
    // Seller collateral: returned for delivered energy, forfeited to the
    // buyer for the shortfall.
    if (collateral_return > 0)
        ledger.unlock_without_transfer(s.escrow, sell.account, collateral_return, sell.account);
    if (compensation > 0)
        ledger.unlock_transfer(s.escrow, sell.account, compensation, buy.account, sell.account);

    add_outflow(buy.account, payment);
    add_inflow(sell.account, payment);
    add_outflow(sell.account, compensation);
    add_inflow(buy.account, compensation);

    trade.settled = true;
    trade.delivered = delivered;
    trade.buyer_payment = payment;
    trade.seller_compensation = compensation;
    release_order_tokens(buy, buyer_share);
    release_order_tokens(sell, seller_share);
    append_series_point(ledger.current_block(), SessionState::Delivery);
}

SessionReport MarketEngine::close_session(Ledger& ledger) {
    Session& s = require_session(SessionState::Delivery, ErrorCode::SessionNotInDelivery);
    for (const Trade& t : s.trades)
        if (!t.settled)
            throw DomainError(ErrorCode::UnsettledTradesRemain,
                              "trade " + std::to_string(t.id) + " is not settled");

    for (Order& o : s.orders) {
        if (o.tokens_outstanding > 0) {
            ledger.unlock_without_transfer(s.escrow, o.account, o.tokens_outstanding,
                                           o.account);
            release_order_tokens(o, o.tokens_outstanding);
        }
        if (o.status != OrderStatus::Expired)
            o.status = OrderStatus::Settled;
    }

    s.state = SessionState::Closed;
    append_series_point(ledger.current_block(), SessionState::Closed);

    SessionReport report;
    report.session_id = s.id;
    report.opened_at_block = s.opened_at_block;
    report.closed_at_block = ledger.current_block();
    report.duration_blocks = s.duration_blocks;
    report.escrow = s.escrow;
    report.flows = flows_;
    report.orders = s.orders;
    report.trades = s.trades;
    report.lock_series = s.lock_series;
    return report;
}

} // namespace lerc20
