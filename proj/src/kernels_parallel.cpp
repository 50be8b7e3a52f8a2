#include <algorithm>
#include <numeric>

#include <omp.h>

#include "boxctl/kernels.hpp"
#include "kernels_detail.hpp"

namespace boxctl::kernels::parallel {

std::vector<ModeEnergy> enumerate_modes(double a, double b, double cutoff) {
  const int max_m = detail::max_column(a, b, cutoff);
  if (max_m < 1) return {};
  std::vector<std::size_t> offset(static_cast<std::size_t>(max_m) + 1, 0);

#pragma omp parallel for schedule(static)
  for (int m = 1; m <= max_m; ++m) offset[m] = static_cast<std::size_t>(column_height(a, b, m, cutoff));
  std::partial_sum(offset.begin(), offset.end(), offset.begin());

  std::vector<ModeEnergy> out(offset.back());
#pragma omp parallel for schedule(dynamic, 16)
  for (int m = 1; m <= max_m; ++m) {
    std::size_t pos = offset[m - 1];
    const int h = static_cast<int>(offset[m] - offset[m - 1]);
    for (int n = 1; n <= h; ++n) out[pos++] = {{m, n}, mode_energy(a, b, {m, n})};
  }

  // Sort contiguous chunks in parallel, then merge pairwise. The comparator
  // is a strict total order so the result equals the serial sort.
  const int chunks = std::max(1, std::min(omp_get_max_threads(), static_cast<int>(out.size() / 4096) + 1));
  std::vector<std::size_t> bounds(static_cast<std::size_t>(chunks) + 1);
  for (int c = 0; c <= chunks; ++c) bounds[c] = out.size() * static_cast<std::size_t>(c) / chunks;

#pragma omp parallel for schedule(static)
  for (int c = 0; c < chunks; ++c)
    std::sort(out.begin() + bounds[c], out.begin() + bounds[c + 1], detail::energy_order);

  for (std::size_t width = 1; width < static_cast<std::size_t>(chunks); width *= 2) {
    const std::size_t pairs = (chunks + 2 * width - 1) / (2 * width);
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::size_t lo = p * 2 * width;
      const std::size_t mid = std::min<std::size_t>(lo + width, chunks);
      const std::size_t hi = std::min<std::size_t>(lo + 2 * width, chunks);
      if (mid < hi)
        std::inplace_merge(out.begin() + bounds[lo], out.begin() + bounds[mid],
                           out.begin() + bounds[hi], detail::energy_order);
    }
  }
  return out;
}

void lookup_ranks(std::span<const Mode> modes, const RankTable& table,
                  std::span<std::uint32_t> out) {
  const auto n = static_cast<std::ptrdiff_t>(modes.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = table.lookup(modes[i]);
}

double mean_log_ratio(std::span<const std::uint32_t> image) {
  const std::size_t nblocks = (image.size() + detail::kReductionBlock - 1) / detail::kReductionBlock;
  std::vector<double> blocks(nblocks);
  const auto nb = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * detail::kReductionBlock;
    blocks[b] = detail::block_log_ratio(image, begin,
                                        std::min(image.size(), begin + detail::kReductionBlock));
  }
  return detail::combine_blocks(blocks, image.size());
}

void real_matvec(std::span<const double> a, std::span<const Complex> x, std::span<Complex> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* row = a.data() + i * n;
    double re = 0.0;
    double im = 0.0;
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      re += row[j] * x[j].real();
      im += row[j] * x[j].imag();
    }
    y[i] = {re, im};
  }
}

void real_matvec_transposed(std::span<const double> a, std::span<const Complex> x,
                            std::span<Complex> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto block = static_cast<std::ptrdiff_t>(detail::kColumnBlock);
  const std::ptrdiff_t nblocks = (n + block - 1) / block;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jb = 0; jb < nblocks; ++jb) {
    const std::ptrdiff_t j0 = jb * block;
    const std::ptrdiff_t j1 = std::min(n, j0 + block);
    for (std::ptrdiff_t j = j0; j < j1; ++j) y[j] = Complex{};
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double* row = a.data() + i * n;
      const Complex xi = x[i];
      for (std::ptrdiff_t j = j0; j < j1; ++j) y[j] += row[j] * xi;
    }
  }
}

}  // namespace boxctl::kernels::parallel
