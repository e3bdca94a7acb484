#pragma once

#include <cstdint>
#include <limits>

#include "lerc20/errors.hpp"

namespace lerc20 {

/// Count of smallest token units. All arithmetic on amounts is checked;
/// overflow or underflow raises ArithmeticOverflow instead of wrapping.
using Amount = std::uint64_t;

inline Amount checked_add(Amount a, Amount b) {
    if (b > std::numeric_limits<Amount>::max() - a)
        throw DomainError(ErrorCode::ArithmeticOverflow, "addition overflow");
    return a + b;
}

inline Amount checked_sub(Amount a, Amount b) {
    if (b > a)
        throw DomainError(ErrorCode::ArithmeticOverflow, "subtraction underflow");
    return a - b;
}

inline Amount checked_mul(Amount a, Amount b) {
    if (a != 0 && b > std::numeric_limits<Amount>::max() / a)
        throw DomainError(ErrorCode::ArithmeticOverflow, "multiplication overflow");
    return a * b;
}

} // namespace lerc20
