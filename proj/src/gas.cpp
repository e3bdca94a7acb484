#include "lerc20/gas.hpp"

#include "lerc20/checked.hpp"

namespace lerc20 {
namespace gas {

namespace {

std::uint64_t gas_for(const GasParams& params, const std::string& op_name) {
    auto it = params.gas_table.find(op_name);
    if (it == params.gas_table.end())
        throw DomainError(ErrorCode::UnknownOperation, "no gas entry for '" + op_name + "'");
    if (it->second == 0 || params.block_gas_limit == 0 || params.block_time_s == 0)
        throw DomainError(ErrorCode::SchemaError, "gas parameters must be positive");
    return it->second;
}

} // namespace

std::uint64_t orders_per_block(const GasParams& params, const std::string& op_name) {
    return params.block_gas_limit / gas_for(params, op_name);
}

std::uint64_t session_capacity(const GasParams& params, const std::string& op_name,
                               std::uint64_t session_seconds) {
    std::uint64_t per_block = orders_per_block(params, op_name);
    std::uint64_t blocks = session_seconds / params.block_time_s;
    return blocks * per_block;
}

OverheadReport overhead_report(const GasParams& params, std::uint64_t session_seconds,
                               std::uint64_t resolution_blocks) {
    std::uint64_t plain = orders_per_block(params, kPlaceOrderPlain);
    std::uint64_t with_lock = orders_per_block(params, kPlaceOrderWithLock);
    if (resolution_blocks == 0)
        throw DomainError(ErrorCode::SchemaError, "resolution must be positive");

    OverheadReport report;
    report.params = params;
    report.gas_delta = checked_sub(params.gas_table.at(kPlaceOrderWithLock),
                                   params.gas_table.at(kPlaceOrderPlain));
    report.throughput_ratio =
        static_cast<double>(with_lock) / static_cast<double>(plain);

    std::uint64_t total_blocks = session_seconds / params.block_time_s;
    for (std::uint64_t b = 0;; b += resolution_blocks) {
        if (b > total_blocks)
            b = total_blocks;
        report.table.push_back(ThroughputRow{b * params.block_time_s, b * plain, b * with_lock});
        if (b == total_blocks)
            break;
    }
    return report;
}

} // namespace gas
} // namespace lerc20
