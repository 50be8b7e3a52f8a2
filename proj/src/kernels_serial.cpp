#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "boxctl/error.hpp"
#include "boxctl/kernels.hpp"
#include "kernels_detail.hpp"

namespace boxctl::kernels {

int column_height(double a, double b, int m, double cutoff) {
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  const double x = m / a;
  const double rest = cutoff / pi2 - x * x;
  if (rest <= 0.0) {
    return mode_energy(a, b, {m, 1}) <= cutoff ? 1 : 0;
  }
  int n = static_cast<int>(std::floor(b * std::sqrt(rest)));
  // The sqrt estimate can be off by one either way near the boundary.
  while (n >= 1 && mode_energy(a, b, {m, n}) > cutoff) --n;
  while (mode_energy(a, b, {m, n + 1}) <= cutoff) ++n;
  return std::max(n, 0);
}

int configure_threads_from_env() {
  if (const char* env = std::getenv("BOXCTL_THREADS"); env && *env) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 4096) throw UsageError("BOXCTL_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(n));
  }
  return omp_get_max_threads();
}

namespace detail {

int max_column(double a, double b, double cutoff) {
  constexpr double pi = std::numbers::pi;
  int m = static_cast<int>(std::ceil(a * std::sqrt(std::max(cutoff, 0.0)) / pi)) + 1;
  while (m >= 1 && column_height(a, b, m, cutoff) == 0) --m;
  return m;
}

bool energy_order(const ModeEnergy& x, const ModeEnergy& y) {
  if (x.energy != y.energy) return x.energy < y.energy;
  return x.mode < y.mode;
}

double block_log_ratio(std::span<const std::uint32_t> image, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double term = std::log(static_cast<double>(image[i])) - std::log(static_cast<double>(i + 1));
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double combine_blocks(std::span<const double> blocks, std::size_t count) {
  double sum = 0.0;
  double comp = 0.0;
  for (double term : blocks) {
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return count == 0 ? 0.0 : (sum + comp) / static_cast<double>(count);
}

}  // namespace detail

namespace serial {

std::vector<ModeEnergy> enumerate_modes(double a, double b, double cutoff) {
  std::vector<ModeEnergy> out;
  const int max_m = detail::max_column(a, b, cutoff);
  for (int m = 1; m <= max_m; ++m) {
    const int h = column_height(a, b, m, cutoff);
    for (int n = 1; n <= h; ++n) out.push_back({{m, n}, mode_energy(a, b, {m, n})});
  }
  std::sort(out.begin(), out.end(), detail::energy_order);
  return out;
}

void lookup_ranks(std::span<const Mode> modes, const RankTable& table,
                  std::span<std::uint32_t> out) {
  for (std::size_t i = 0; i < modes.size(); ++i) out[i] = table.lookup(modes[i]);
}

double mean_log_ratio(std::span<const std::uint32_t> image) {
  const std::size_t nblocks = (image.size() + detail::kReductionBlock - 1) / detail::kReductionBlock;
  std::vector<double> blocks(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) {
    const std::size_t begin = b * detail::kReductionBlock;
    blocks[b] = detail::block_log_ratio(image, begin,
                                        std::min(image.size(), begin + detail::kReductionBlock));
  }
  return detail::combine_blocks(blocks, image.size());
}

void real_matvec(std::span<const double> a, std::span<const Complex> x, std::span<Complex> y) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = a.data() + i * n;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      re += row[j] * x[j].real();
      im += row[j] * x[j].imag();
    }
    y[i] = {re, im};
  }
}

void real_matvec_transposed(std::span<const double> a, std::span<const Complex> x,
                            std::span<Complex> y) {
  const std::size_t n = x.size();
  std::fill(y.begin(), y.end(), Complex{});
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = a.data() + i * n;
    const Complex xi = x[i];
    for (std::size_t j = 0; j < n; ++j) y[j] += row[j] * xi;
  }
}

}  // namespace serial
}  // namespace boxctl::kernels
