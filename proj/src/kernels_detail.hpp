#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "boxctl/kernels.hpp"

namespace boxctl::kernels::detail {

inline constexpr std::size_t kReductionBlock = 4096;
inline constexpr std::size_t kColumnBlock = 64;

int max_column(double a, double b, double cutoff);
bool energy_order(const ModeEnergy& x, const ModeEnergy& y);
double block_log_ratio(std::span<const std::uint32_t> image, std::size_t begin, std::size_t end);
double combine_blocks(std::span<const double> blocks, std::size_t count);

}  // namespace boxctl::kernels::detail
