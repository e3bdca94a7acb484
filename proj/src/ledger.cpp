#include "lerc20/ledger.hpp"

#include <algorithm>
#include <limits>

namespace lerc20 {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InsufficientUnlockedBalance: return "InsufficientUnlockedBalance";
    case ErrorCode::InsufficientAllowance: return "InsufficientAllowance";
    case ErrorCode::ZeroAmount: return "ZeroAmount";
    case ErrorCode::LockSlotOwnerMismatch: return "LockSlotOwnerMismatch";
    case ErrorCode::LockVerificationFailed: return "LockVerificationFailed";
    case ErrorCode::ArithmeticOverflow: return "ArithmeticOverflow";
    case ErrorCode::InvalidAddress: return "InvalidAddress";
    case ErrorCode::SessionAlreadyActive: return "SessionAlreadyActive";
    case ErrorCode::SessionNotOpen: return "SessionNotOpen";
    case ErrorCode::SessionNotEnded: return "SessionNotEnded";
    case ErrorCode::SessionNotInDelivery: return "SessionNotInDelivery";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::TradeNotFound: return "TradeNotFound";
    case ErrorCode::TradeAlreadySettled: return "TradeAlreadySettled";
    case ErrorCode::UnsettledTradesRemain: return "UnsettledTradesRemain";
    case ErrorCode::UnknownOperation: return "UnknownOperation";
    case ErrorCode::SchemaError: return "SchemaError";
    }
    return "UnknownError";
}

namespace {

void require_address(const Address& a, const char* what) {
    if (a.empty())
        throw DomainError(ErrorCode::InvalidAddress, std::string("empty ") + what);
}

template <typename Map, typename Key>
Amount map_get(const Map& m, const Key& k) {
    auto it = m.find(k);
    return it == m.end() ? Amount{0} : it->second;
}

} // namespace

Ledger::Ledger(const Address& initial_owner, Amount amount, Timestamp genesis_time,
               std::uint64_t block_time_s) {
    require_address(initial_owner, "initial owner");
    if (block_time_s == 0)
        throw DomainError(ErrorCode::SchemaError, "block time must be positive");
    total_supply_ = amount;
    balances_[initial_owner] = amount;
    genesis_time_ = genesis_time;
    block_time_s_ = block_time_s;
}

void Ledger::advance_block(BlockNumber n) {
    current_block_ = checked_add(current_block_, n);
}

Timestamp Ledger::now() const {
    return checked_add(genesis_time_, checked_mul(current_block_, block_time_s_));
}

Amount Ledger::balance_of(const Address& a) const { return map_get(balances_, a); }

Amount Ledger::allowance(const Address& owner, const Address& spender) const {
    return map_get(allowances_, std::make_pair(owner, spender));
}

Amount Ledger::locked_balance_of(const Address& a) const { return map_get(locked_balances_, a); }

Amount Ledger::unlocked_balance_of(const Address& a) const {
    // locked <= balance is a ledger invariant, so this cannot underflow.
    return balance_of(a) - locked_balance_of(a);
}

const LockedEntity* Ledger::lock_at(const Address& unlocking_address,
                                    const Address& locking_address) const {
    auto it = locks_.find(std::make_pair(unlocking_address, locking_address));
    return it == locks_.end() ? nullptr : &it->second;
}

bool Ledger::verify_lock(const Address& owner, Amount amount,
                         const Address& unlocking_address, const Address& locking_address,
                         BlockNumber at_block) const {
    const LockedEntity* entity = lock_at(unlocking_address, locking_address);
    return entity != nullptr && entity->is_active && entity->owner == owner &&
           entity->amount >= amount && at_block >= entity->block_no;
}

std::size_t Ledger::active_lock_count() const {
    return static_cast<std::size_t>(std::count_if(
        locks_.begin(), locks_.end(), [](const auto& kv) { return kv.second.is_active; }));
}

void Ledger::approve(const Address& caller, const Address& spender, Amount amount) {
    require_address(caller, "caller");
    require_address(spender, "spender");
    allowances_[std::make_pair(caller, spender)] = amount;
}

void Ledger::increase_allowance(const Address& caller, const Address& spender, Amount amount) {
    require_address(caller, "caller");
    require_address(spender, "spender");
    if (amount > unlocked_balance_of(caller))
        throw DomainError(ErrorCode::InsufficientUnlockedBalance,
                          "increase_allowance by " + caller + " exceeds unlocked balance");
    Amount updated = checked_add(allowance(caller, spender), amount);
    allowances_[std::make_pair(caller, spender)] = updated;
}

void Ledger::decrease_allowance(const Address& caller, const Address& spender, Amount amount) {
    require_address(caller, "caller");
    require_address(spender, "spender");
    Amount current = allowance(caller, spender);
    if (amount > current)
        throw DomainError(ErrorCode::InsufficientAllowance,
                          "decrease_allowance by " + caller + " exceeds allowance");
    allowances_[std::make_pair(caller, spender)] = current - amount;
}

void Ledger::transfer(const Address& caller, const Address& recipient, Amount amount) {
    require_address(caller, "caller");
    require_address(recipient, "recipient");
    if (amount > unlocked_balance_of(caller))
        throw DomainError(ErrorCode::InsufficientUnlockedBalance,
                          "transfer from " + caller + " exceeds unlocked balance");
    if (caller == recipient)
        return;
    Amount debited = balance_of(caller) - amount;
    Amount credited = checked_add(balance_of(recipient), amount);
    balances_[caller] = debited;
    balances_[recipient] = credited;
}

void Ledger::transfer_from(const Address& caller, const Address& sender,
                           const Address& recipient, Amount amount) {
    require_address(caller, "caller");
    require_address(sender, "sender");
    require_address(recipient, "recipient");
    if (amount > unlocked_balance_of(sender))
        throw DomainError(ErrorCode::InsufficientUnlockedBalance,
                          "transfer_from exceeds unlocked balance of " + sender);
    Amount approved = allowance(sender, caller);
    if (approved < amount)
        throw DomainError(ErrorCode::InsufficientAllowance,
                          "transfer_from by " + caller + " exceeds allowance from " + sender);
    if (sender != recipient) {
        Amount debited = balance_of(sender) - amount;
        Amount credited = checked_add(balance_of(recipient), amount);
        balances_[sender] = debited;
        balances_[recipient] = credited;
    }
    allowances_[std::make_pair(sender, caller)] = approved - amount;
}

void Ledger::lock(const Address& caller, Amount amount, BlockNumber no_blocks,
                  const Address& unlocking_address) {
    require_address(caller, "caller");
    require_address(unlocking_address, "unlocking address");
    if (amount == 0)
        throw DomainError(ErrorCode::ZeroAmount, "lock of zero tokens");
    if (amount > unlocked_balance_of(caller))
        throw DomainError(ErrorCode::InsufficientUnlockedBalance,
                          "lock by " + caller + " exceeds unlocked balance");
    lock_internal(caller, caller, amount, no_blocks, unlocking_address);
}

void Ledger::lock_from(const Address& caller, const Address& owner, Amount amount,
                       BlockNumber no_blocks, const Address& unlocking_address) {
    require_address(caller, "caller");
    require_address(owner, "owner");
    require_address(unlocking_address, "unlocking address");
    if (amount == 0)
        throw DomainError(ErrorCode::ZeroAmount, "lock of zero tokens");
    if (amount > unlocked_balance_of(owner))
        throw DomainError(ErrorCode::InsufficientUnlockedBalance,
                          "lock_from exceeds unlocked balance of " + owner);
    if (allowance(owner, caller) < amount)
        throw DomainError(ErrorCode::InsufficientAllowance,
                          "lock_from by " + caller + " exceeds allowance from " + owner);
    lock_internal(owner, caller, amount, no_blocks, unlocking_address,
                  /*spend_locker_allowance=*/true);
}

// Everything that can fail happens before the first write, so a throwing
// lock (including lock_from's allowance spend) leaves the ledger untouched.
void Ledger::lock_internal(const Address& owner, const Address& locker, Amount amount,
                           BlockNumber no_blocks, const Address& unlocking_address,
                           bool spend_locker_allowance) {
    auto key = std::make_pair(unlocking_address, locker);
    BlockNumber unlock_height = checked_add(current_block_, no_blocks);
    Amount locker_remainder = 0;
    if (spend_locker_allowance)
        locker_remainder = allowance(owner, locker) - amount;
    Amount grant_base = spend_locker_allowance && locker == unlocking_address
                            ? locker_remainder
                            : allowance(owner, unlocking_address);
    Amount granted = checked_add(grant_base, amount);
    LockEventRecord event =
        make_event(owner, locker, amount, no_blocks, unlocking_address, LockStatus::Lock);

    auto it = locks_.find(key);
    if (it != locks_.end() && it->second.is_active && it->second.owner != owner)
        throw DomainError(ErrorCode::LockSlotOwnerMismatch,
                          "active lock at (" + unlocking_address + ", " + locker +
                              ") belongs to " + it->second.owner);

    if (spend_locker_allowance)
        allowances_[std::make_pair(owner, locker)] = locker_remainder;
    if (it != locks_.end() && it->second.is_active) {
        it->second.amount += amount;
        it->second.block_no = std::max(it->second.block_no, unlock_height);
    } else {
        locks_[key] = LockedEntity{owner, amount, unlock_height, true};
    }
    event_log_.push_back(std::move(event));
    allowances_[std::make_pair(owner, unlocking_address)] = granted;
    locked_balances_[owner] = locked_balance_of(owner) + amount;
}

void Ledger::release_lock(LockedEntity& entity, const Address& owner, Amount amount) {
    if (amount < entity.amount)
        entity.amount -= amount;
    else
        entity.is_active = false;
    locked_balances_[owner] = locked_balance_of(owner) - amount;
}

void Ledger::unlock_transfer(const Address& caller, const Address& owner, Amount amount,
                             const Address& recipient, const Address& locking_address) {
    require_address(caller, "caller");
    require_address(owner, "owner");
    require_address(recipient, "recipient");
    require_address(locking_address, "locking address");
    if (!verify_lock(owner, amount, caller, locking_address, current_block_))
        throw DomainError(ErrorCode::LockVerificationFailed,
                          "no unlockable " + owner + " lock at (" + caller + ", " +
                              locking_address + ")");
    // The embedded transfer consumes the allowance granted at lock time; check
    // up front so a shortfall leaves the lock untouched.
    if (allowance(owner, caller) < amount)
        throw DomainError(ErrorCode::InsufficientAllowance,
                          "unlock_transfer allowance from " + owner + " to " + caller +
                              " below unlock amount");
    LockEventRecord event =
        make_event(owner, locking_address, amount, 0, caller, LockStatus::UnlockTransfer);
    LockedEntity& entity = locks_.at(std::make_pair(caller, locking_address));
    release_lock(entity, owner, amount);
    transfer_from(caller, owner, recipient, amount);
    event_log_.push_back(std::move(event));
}

void Ledger::unlock_without_transfer(const Address& caller, const Address& owner,
                                     Amount amount, const Address& locking_address) {
    require_address(caller, "caller");
    require_address(owner, "owner");
    require_address(locking_address, "locking address");
    if (!verify_lock(owner, amount, caller, locking_address, current_block_))
        throw DomainError(ErrorCode::LockVerificationFailed,
                          "no unlockable " + owner + " lock at (" + caller + ", " +
                              locking_address + ")");
    LockEventRecord event =
        make_event(owner, locking_address, amount, 0, caller, LockStatus::UnlockWithoutTransfer);
    LockedEntity& entity = locks_.at(std::make_pair(caller, locking_address));
    release_lock(entity, owner, amount);
    // Take back the lock-time allowance grant; saturate if the owner already
    // reduced it below the unlock amount.
    Amount approved = allowance(owner, caller);
    allowances_[std::make_pair(owner, caller)] = approved >= amount ? approved - amount : 0;
    event_log_.push_back(std::move(event));
}

std::vector<LockEventRecord> Ledger::events_filtered(LockStatus status) const {
    std::vector<LockEventRecord> out;
    for (const LockEventRecord& e : event_log_)
        if (e.status == status)
            out.push_back(e);
    return out;
}

LockEventRecord Ledger::make_event(const Address& owner, const Address& locking_address,
                                   Amount amount, BlockNumber no_blocks,
                                   const Address& unlocking_address, LockStatus status) const {
    LockEventRecord e;
    e.owner = owner;
    e.locking_address = locking_address;
    e.amount = amount;
    e.no_blocks = no_blocks;
    e.unlocking_address = unlocking_address;
    e.status = status;
    e.timestamp = now();
    e.hour = static_cast<unsigned>((e.timestamp / 3600) % 24);
    e.min = static_cast<unsigned>((e.timestamp / 60) % 60);
    return e;
}

} // namespace lerc20
