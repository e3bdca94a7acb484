#pragma once

#include <stdexcept>
#include <string>

namespace lerc20 {

enum class ErrorCode {
    InsufficientUnlockedBalance,
    InsufficientAllowance,
    ZeroAmount,
    LockSlotOwnerMismatch,
    LockVerificationFailed,
    ArithmeticOverflow,
    InvalidAddress,
    SessionAlreadyActive,
    SessionNotOpen,
    SessionNotEnded,
    SessionNotInDelivery,
    InvalidOrder,
    TradeNotFound,
    TradeAlreadySettled,
    UnsettledTradesRemain,
    UnknownOperation,
    SchemaError,
};

const char* to_string(ErrorCode code);

/// Thrown by every guarded operation. A throwing call leaves the ledger
/// and session state untouched.
class DomainError : public std::runtime_error {
public:
    DomainError(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail),
          code_(code),
          detail_(detail) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace lerc20
