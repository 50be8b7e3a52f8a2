#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boxctl/kernels.hpp"
#include "boxctl/path.hpp"
#include "boxctl/rect.hpp"

namespace boxctl {

inline constexpr double kDefaultTieTolerance = 1e-12;

/// Energy-ordered Dirichlet spectrum of a rectangle, exhaustive below
/// `cutoff_energy()`. Ranks are 1-based; exact ties are broken by (m, n).
class SpectrumIndex {
 public:
  using Entry = kernels::ModeEnergy;

  SpectrumIndex(Rect rect, double cutoff, std::vector<Entry> entries, double tie_tol);

  const Rect& rect() const { return rect_; }
  double cutoff_energy() const { return cutoff_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Mode at 1-based rank r. Throws std::out_of_range past size().
  Mode mode_of(std::size_t rank) const;
  /// Rank of a mode, empty when its energy is above the cutoff.
  std::optional<std::size_t> rank_of(Mode k) const;
  double energy_of_rank(std::size_t rank) const { return entries_.at(rank - 1).energy; }

  /// Pairs (r, r+1) whose energies agree to the relative tie tolerance.
  const std::vector<std::pair<std::size_t, std::size_t>>& tie_report() const { return ties_; }
  /// True when some reported tie involves a rank <= limit.
  bool has_tie_up_to(std::size_t limit) const;

  const kernels::RankTable& rank_table() const { return table_; }

 private:
  Rect rect_;
  double cutoff_;
  std::vector<Entry> entries_;
  kernels::RankTable table_;
  std::vector<std::pair<std::size_t, std::size_t>> ties_;
};

/// Exact count of modes with energy <= e.
std::size_t count_modes_below(const Rect& rect, double e);

/// Leading counting-law term (ab / 4 pi) E.
double weyl_count(const Rect& rect, double e);

/// Index covering at least `count_at_least` ranks. The enumeration cutoff is
/// 10% above the smallest energy that yields `count_at_least` modes.
SpectrumIndex build_index(const Rect& rect, std::size_t count_at_least,
                          double tie_tol = kDefaultTieTolerance);

/// Index containing every mode with energy <= cutoff.
SpectrumIndex build_index_to_energy(const Rect& rect, double cutoff,
                                    double tie_tol = kDefaultTieTolerance);

/// Horizontal side a at which k and l are degenerate for vertical side b,
/// i.e. a^2 = b^2 (k1^2 - l1^2) / (l2^2 - k2^2). Empty when no positive
/// solution exists.
std::optional<double> resonance_length(Mode k, Mode l, double b);

struct Crossing {
  double t = 0.0;
  Mode first;
  Mode second;
  double energy = 0.0;
};

struct CrossingScan {
  std::vector<Crossing> crossings;  // sorted by time
  std::vector<std::string> warnings;
};

/// Times in [t0, t1] at which two of `modes` have equal energy along the
/// path. Sign changes on a uniform grid of `grid` cells are refined by
/// bisection to relative time tolerance 1e-10.
CrossingScan crossing_times(const DeformationPath& path, const std::vector<Mode>& modes, double t0,
                            double t1, int grid = 1024);

}  // namespace boxctl
