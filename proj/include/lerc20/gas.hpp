#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lerc20/errors.hpp"

namespace lerc20 {
namespace gas {

/// Measured transaction costs of placing an order, with and without the
/// lock acquisition.
constexpr const char* kPlaceOrderPlain = "place_order_plain";
constexpr const char* kPlaceOrderWithLock = "place_order_with_lock";

constexpr std::uint64_t kDefaultBlockGasLimit = 15'000'000;
constexpr std::uint64_t kDefaultBlockTimeSeconds = 15;
constexpr std::uint64_t kGasPlaceOrderPlain = 348'774;
constexpr std::uint64_t kGasPlaceOrderWithLock = 748'565;

struct GasParams {
    std::uint64_t block_gas_limit = kDefaultBlockGasLimit;
    std::uint64_t block_time_s = kDefaultBlockTimeSeconds;
    std::map<std::string, std::uint64_t> gas_table = {
        {kPlaceOrderPlain, kGasPlaceOrderPlain},
        {kPlaceOrderWithLock, kGasPlaceOrderWithLock},
    };
};

/// Whole transactions of `op_name` fitting in one block (floored).
std::uint64_t orders_per_block(const GasParams& params, const std::string& op_name);

/// Whole transactions of `op_name` fitting in a session of `session_seconds`:
/// complete blocks times per-block capacity, all integer arithmetic.
std::uint64_t session_capacity(const GasParams& params, const std::string& op_name,
                               std::uint64_t session_seconds);

struct ThroughputRow {
    std::uint64_t t_seconds = 0;
    std::uint64_t orders_plain = 0;
    std::uint64_t orders_with_lock = 0;
};

struct OverheadReport {
    GasParams params;
    std::uint64_t gas_delta = 0;       // with_lock - plain
    double throughput_ratio = 0.0;     // per-block with_lock / plain
    std::vector<ThroughputRow> table;  // cumulative capacity over time
};

/// Orders-over-time comparison of the plain and with-lock order placement,
/// sampled every `resolution_blocks` blocks up to `session_seconds`.
OverheadReport overhead_report(const GasParams& params,
                               std::uint64_t session_seconds = 4 * 3600,
                               std::uint64_t resolution_blocks = 1);

} // namespace gas
} // namespace lerc20
