#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lerc20/checked.hpp"
#include "lerc20/errors.hpp"

namespace lerc20 {

/// Opaque account identifier. Totally ordered so that ledger iteration is
/// deterministic. Must be non-empty wherever it enters the ledger.
using Address = std::string;

/// Block height of the simulated chain clock.
using BlockNumber = std::uint64_t;

/// Seconds since epoch.
using Timestamp = std::uint64_t;

/// One escrowed lock: `amount` of `owner`'s tokens, releasable by the
/// unlocking address from `block_no` on.
struct LockedEntity {
    Address owner;
    Amount amount = 0;
    BlockNumber block_no = 0;
    bool is_active = false;

    bool operator==(const LockedEntity&) const = default;
};

enum class LockStatus : std::uint8_t {
    Lock = 0,
    UnlockTransfer = 1,
    UnlockWithoutTransfer = 2,
};

/// Audit entry appended for every lock and unlock. Records are never mutated.
struct LockEventRecord {
    Address owner;
    Address locking_address;
    Amount amount = 0;
    BlockNumber no_blocks = 0;
    Address unlocking_address;
    LockStatus status = LockStatus::Lock;
    Timestamp timestamp = 0;
    unsigned hour = 0;
    unsigned min = 0;

    bool operator==(const LockEventRecord&) const = default;
};

/// The lockable token state machine. Balances, allowances, time-locked
/// escrow entries and the lock event log, with block height as simulated
/// time. Single writer; failed operations leave the state bit-identical.
class Ledger {
public:
    static constexpr const char* kName = "LockableERC20";
    static constexpr const char* kSymbol = "LERC20";
    static constexpr std::uint64_t kDefaultBlockTimeSeconds = 15;

    /// Mints the entire supply to `initial_owner` at block 0. The only mint:
    /// there is no public mint or burn.
    Ledger(const Address& initial_owner, Amount amount, Timestamp genesis_time,
           std::uint64_t block_time_s = kDefaultBlockTimeSeconds);

    // -- chain clock ---------------------------------------------------------

    void advance_block(BlockNumber n);
    BlockNumber current_block() const noexcept { return current_block_; }
    Timestamp genesis_time() const noexcept { return genesis_time_; }
    std::uint64_t block_time_s() const noexcept { return block_time_s_; }
    /// Wall-clock time of the current block: genesis + block * block_time.
    Timestamp now() const;

    // -- reads ---------------------------------------------------------------

    Amount total_supply() const noexcept { return total_supply_; }
    Amount balance_of(const Address& a) const;
    Amount allowance(const Address& owner, const Address& spender) const;
    Amount locked_balance_of(const Address& a) const;
    Amount unlocked_balance_of(const Address& a) const;

    /// Entity at key (unlocking_address, locking_address), or nullptr.
    const LockedEntity* lock_at(const Address& unlocking_address,
                                const Address& locking_address) const;

    /// True iff an active entity at (unlocking_address, locking_address) is
    /// owned by `owner`, covers `amount`, and `at_block` has reached its
    /// unlock height. Pure read.
    bool verify_lock(const Address& owner, Amount amount,
                     const Address& unlocking_address, const Address& locking_address,
                     BlockNumber at_block) const;

    std::size_t active_lock_count() const;

    // -- allowance management --------------------------------------------------

    /// Plain ERC20 approve: overwrites unconditionally.
    void approve(const Address& caller, const Address& spender, Amount amount);

    /// Guarded: amount must not exceed the caller's unlocked balance.
    void increase_allowance(const Address& caller, const Address& spender, Amount amount);

    /// Guarded: amount must not exceed the current allowance.
    void decrease_allowance(const Address& caller, const Address& spender, Amount amount);

    // -- transfers (only unlocked balance may move) ----------------------------

    void transfer(const Address& caller, const Address& recipient, Amount amount);
    void transfer_from(const Address& caller, const Address& sender,
                       const Address& recipient, Amount amount);

    // -- locking ---------------------------------------------------------------

    /// Locks `amount` of the caller's own tokens until current_block + no_blocks,
    /// releasable by `unlocking_address`.
    void lock(const Address& caller, Amount amount, BlockNumber no_blocks,
              const Address& unlocking_address);

    /// Locks `amount` of `owner`'s tokens, spending the caller's allowance.
    void lock_from(const Address& caller, const Address& owner, Amount amount,
                   BlockNumber no_blocks, const Address& unlocking_address);

    /// Releases `amount` from the lock at (caller, locking_address) and
    /// transfers it from `owner` to `recipient`, consuming allowance(owner, caller).
    void unlock_transfer(const Address& caller, const Address& owner, Amount amount,
                         const Address& recipient, const Address& locking_address);

    /// Releases `amount` from the lock at (caller, locking_address); tokens
    /// stay with `owner`. Returns the matching slice of allowance(owner, caller),
    /// saturating at zero if the owner reduced it meanwhile.
    void unlock_without_transfer(const Address& caller, const Address& owner,
                                 Amount amount, const Address& locking_address);

    // -- event log -------------------------------------------------------------

    const std::vector<LockEventRecord>& events() const noexcept { return event_log_; }
    std::vector<LockEventRecord> events_filtered(LockStatus status) const;

    // -- raw state views (snapshot/export) ---------------------------------------

    using BalanceMap = std::map<Address, Amount>;
    using AllowanceMap = std::map<std::pair<Address, Address>, Amount>;
    using LockMap = std::map<std::pair<Address, Address>, LockedEntity>;

    const BalanceMap& balances() const noexcept { return balances_; }
    const AllowanceMap& allowances() const noexcept { return allowances_; }
    const LockMap& locks() const noexcept { return locks_; }
    const BalanceMap& locked_balances() const noexcept { return locked_balances_; }

    bool operator==(const Ledger&) const = default;

private:
    friend struct LedgerCodec; // snapshot import

    Ledger() = default;

    void lock_internal(const Address& owner, const Address& locker, Amount amount,
                       BlockNumber no_blocks, const Address& unlocking_address,
                       bool spend_locker_allowance = false);
    LockEventRecord make_event(const Address& owner, const Address& locking_address,
                               Amount amount, BlockNumber no_blocks,
                               const Address& unlocking_address, LockStatus status) const;
    /// Shrinks the entity by `amount`, deactivating on full release, and drops
    /// the owner's locked balance. Callers have verified the lock.
    void release_lock(LockedEntity& entity, const Address& owner, Amount amount);

    std::string name_ = kName;
    std::string symbol_ = kSymbol;
    Amount total_supply_ = 0;
    BalanceMap balances_;
    AllowanceMap allowances_;
    LockMap locks_;
    BalanceMap locked_balances_;
    BlockNumber current_block_ = 0;
    Timestamp genesis_time_ = 0;
    std::uint64_t block_time_s_ = kDefaultBlockTimeSeconds;
    std::vector<LockEventRecord> event_log_;
};

} // namespace lerc20
