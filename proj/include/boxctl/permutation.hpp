#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "boxctl/rect.hpp"

namespace boxctl {

/// Pump-cycle permutation: a state of rank k in the (a x b) box keeps its
/// quantum numbers while the box is squeezed to (a_tilde x b), then keeps its
/// rank on the way back. sigma(k) is the rank it lands on.
struct SigmaTable {
  double a = 0.0;
  double a_tilde = 0.0;
  double b = 1.0;
  std::vector<Mode> modes;            // modes[k-1] = mode of rank k in the (a x b) box
  std::vector<std::uint32_t> sigma;   // sigma[k-1], 1-based ranks; may exceed valid_to
  std::size_t valid_to = 0;           // every k <= valid_to has a certified sigma(k)

  std::size_t size() const { return sigma.size(); }
  std::uint32_t operator()(std::size_t k) const { return sigma.at(k - 1); }
};

/// Builds sigma on 1..K. Both spectra are enumerated exhaustively, so every
/// image rank is exact. Throws NumericalError("tie_in_index") if either box
/// has a degenerate pair among the ranks that are used.
SigmaTable build_sigma(double a, double a_tilde, std::size_t K, double b = 1.0);

enum class OrbitStatus { escaped, periodic, exhausted };

std::string to_string(OrbitStatus s);

struct OrbitRecord {
  std::size_t start = 0;
  // start, sigma(start), ... For a periodic orbit the last entry is start
  // again; for an escaped one it is the first rank above valid_to.
  std::vector<std::uint64_t> trajectory;
  OrbitStatus status = OrbitStatus::exhausted;
  std::size_t period = 0;  // only for periodic
  /// (ln last - ln start) / steps, the per-cycle entropy gain along the orbit.
  double growth_rate = 0.0;
};

OrbitRecord iterate_orbit(const SigmaTable& table, std::size_t start, std::size_t max_steps);

/// Distinct cycles through some start <= start_max, of period <= period_max,
/// that never leave 1..valid_to. Each cycle is rotated to begin with its
/// smallest element; the list is sorted by (period, first element).
std::vector<std::vector<std::uint64_t>> find_periodic_orbits(const SigmaTable& table,
                                                             std::size_t start_max,
                                                             std::size_t period_max);

/// (1/K) sum_{k<=K} (ln sigma(k) - ln k).
double mean_entropy_increase(const SigmaTable& table, std::size_t K);

struct EntropyPrediction {
  double quadrature = 0.0;   // (2/pi) int_0^{pi/2} ln(r cos^2 + sin^2 / r) dtheta
  double closed_form = 0.0;  // 2 ln((sqrt r + 1/sqrt r) / 2)
};

/// Large-K limit of mean_entropy_increase for ratio r = a / a_tilde.
EntropyPrediction entropy_integral(double a, double a_tilde);

/// CSV with header `k,m,n,sigma_k`.
void write_sigma_csv(std::ostream& out, const SigmaTable& table);
/// Reads a table written by write_sigma_csv; a, a_tilde, b are left at 0/1 and
/// valid_to is the row count.
SigmaTable read_sigma_csv(std::istream& in);

}  // namespace boxctl
