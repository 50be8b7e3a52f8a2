#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial::` is the
// plain reference used by the tests, `parallel::` is the OpenMP version used
// by the library. Both must return identical results (bit-for-bit for the
// integer kernels and the compensated reduction, to rounding for matvecs).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "boxctl/rect.hpp"

namespace boxctl::kernels {

struct ModeEnergy {
  Mode mode;
  double energy = 0.0;
};

/// Number of n >= 1 with mode_energy(a,b,{m,n}) <= cutoff, for one m.
/// Exact with respect to mode_energy (the sqrt estimate is corrected).
int column_height(double a, double b, int m, double cutoff);

/// Per-m lookup from (m,n) to a 1-based rank.
struct RankTable {
  std::vector<std::size_t> row_start;  // size = max_m + 1, offsets into rank
  std::vector<std::uint32_t> rank;     // rank[row_start[m-1] + n-1]

  int max_m() const { return static_cast<int>(row_start.size()) - 1; }
  int height(int m) const {
    return static_cast<int>(row_start[m] - row_start[m - 1]);
  }
  /// 0 when (m,n) is outside the table.
  std::uint32_t lookup(Mode k) const {
    if (k.m < 1 || k.m > max_m() || k.n < 1 || k.n > height(k.m)) return 0;
    return rank[row_start[k.m - 1] + static_cast<std::size_t>(k.n - 1)];
  }
};

using Complex = std::complex<double>;

namespace serial {

/// All modes with energy <= cutoff, sorted by (energy, m, n).
std::vector<ModeEnergy> enumerate_modes(double a, double b, double cutoff);

/// out[i] = table.lookup(modes[i]).
void lookup_ranks(std::span<const Mode> modes, const RankTable& table,
                  std::span<std::uint32_t> out);

/// (1/K) sum_{k=1..K} (ln image[k-1] - ln k), K = image.size(). Accumulated
/// in fixed blocks so the result does not depend on the thread count.
double mean_log_ratio(std::span<const std::uint32_t> image);

/// y = A x for a dense row-major real n x n matrix and complex x.
void real_matvec(std::span<const double> a, std::span<const Complex> x, std::span<Complex> y);

/// y = A^T x.
void real_matvec_transposed(std::span<const double> a, std::span<const Complex> x,
                            std::span<Complex> y);

}  // namespace serial

namespace parallel {

std::vector<ModeEnergy> enumerate_modes(double a, double b, double cutoff);
void lookup_ranks(std::span<const Mode> modes, const RankTable& table,
                  std::span<std::uint32_t> out);
double mean_log_ratio(std::span<const std::uint32_t> image);
void real_matvec(std::span<const double> a, std::span<const Complex> x, std::span<Complex> y);
void real_matvec_transposed(std::span<const double> a, std::span<const Complex> x,
                            std::span<Complex> y);

}  // namespace parallel

/// Applies BOXCTL_THREADS (if set) to the OpenMP runtime. Returns the thread
/// count in effect. Throws UsageError for a malformed value.
int configure_threads_from_env();

}  // namespace boxctl::kernels
