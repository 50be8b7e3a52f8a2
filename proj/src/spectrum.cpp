#include "boxctl/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace boxctl {

namespace {

kernels::RankTable make_rank_table(const Rect& rect, double cutoff,
                                   const std::vector<SpectrumIndex::Entry>& entries) {
  kernels::RankTable table;
  int max_m = 0;
  for (const auto& e : entries) max_m = std::max(max_m, e.mode.m);
  table.row_start.assign(static_cast<std::size_t>(max_m) + 1, 0);
  for (int m = 1; m <= max_m; ++m)
    table.row_start[m] = table.row_start[m - 1] +
                         static_cast<std::size_t>(kernels::column_height(rect.a(), rect.b(), m, cutoff));
  table.rank.assign(table.row_start.back(), 0);
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const Mode k = entries[r].mode;
    table.rank[table.row_start[k.m - 1] + static_cast<std::size_t>(k.n - 1)] =
        static_cast<std::uint32_t>(r + 1);
  }
  return table;
}

}  // namespace

SpectrumIndex::SpectrumIndex(Rect rect, double cutoff, std::vector<Entry> entries, double tie_tol)
    : rect_(rect), cutoff_(cutoff), entries_(std::move(entries)) {
  table_ = make_rank_table(rect_, cutoff_, entries_);
  for (std::size_t r = 1; r < entries_.size(); ++r) {
    const double lo = entries_[r - 1].energy;
    const double hi = entries_[r].energy;
    if (hi - lo <= tie_tol * hi) ties_.emplace_back(r, r + 1);
  }
}

Mode SpectrumIndex::mode_of(std::size_t rank) const {
  if (rank < 1 || rank > entries_.size()) throw std::out_of_range("SpectrumIndex::mode_of: rank out of range");
  return entries_[rank - 1].mode;
}

std::optional<std::size_t> SpectrumIndex::rank_of(Mode k) const {
  const auto r = table_.lookup(k);
  if (r == 0) return std::nullopt;
  return r;
}

bool SpectrumIndex::has_tie_up_to(std::size_t limit) const {
  return std::any_of(ties_.begin(), ties_.end(), [limit](const auto& p) { return p.first <= limit; });
}

std::size_t count_modes_below(const Rect& rect, double e) {
  std::size_t count = 0;
  const int max_m = static_cast<int>(std::ceil(rect.a() * std::sqrt(std::max(e, 0.0)) / std::numbers::pi)) + 1;
  for (int m = 1; m <= max_m; ++m) {
    const int h = kernels::column_height(rect.a(), rect.b(), m, e);
    if (h == 0) break;
    count += static_cast<std::size_t>(h);
  }
  return count;
}

double weyl_count(const Rect& rect, double e) { return rect.a() * rect.b() * e / (4.0 * std::numbers::pi); }

SpectrumIndex build_index_to_energy(const Rect& rect, double cutoff, double tie_tol) {
  return SpectrumIndex(rect, cutoff, kernels::parallel::enumerate_modes(rect.a(), rect.b(), cutoff), tie_tol);
}

SpectrumIndex build_index(const Rect& rect, std::size_t count_at_least, double tie_tol) {
  if (count_at_least < 1) throw UsageError("build_index: count_at_least must be >= 1");
  // Two-term counting law N(E) ~ ab E / 4pi - (a+b) sqrt(E) / 4pi; solve for sqrt(E).
  const double ab = rect.a() * rect.b();
  const double perimeter = rect.a() + rect.b();
  const double k = static_cast<double>(count_at_least);
  const double root = (perimeter + std::sqrt(perimeter * perimeter + 16.0 * std::numbers::pi * ab * k)) / (2.0 * ab);
  double e = std::max(root * root, mode_energy(rect, {1, 1}));
  while (count_modes_below(rect, e) < count_at_least) e *= 1.05;
  return build_index_to_energy(rect, 1.1 * e, tie_tol);
}

std::optional<double> resonance_length(Mode k, Mode l, double b) {
  if (k == l) throw UsageError("resonance_length: modes must differ");
  if (!(b > 0.0)) throw UsageError("resonance_length: b must be positive");
  const double num = static_cast<double>(k.m) * k.m - static_cast<double>(l.m) * l.m;
  const double den = static_cast<double>(l.n) * l.n - static_cast<double>(k.n) * k.n;
  if (den == 0.0 || num == 0.0) return std::nullopt;
  const double ratio = num / den;
  if (ratio <= 0.0) return std::nullopt;
  return b * std::sqrt(ratio);
}

CrossingScan crossing_times(const DeformationPath& path, const std::vector<Mode>& modes, double t0,
                            double t1, int grid) {
  if (!(t1 > t0)) throw UsageError("crossing_times: t1 must exceed t0");
  if (grid < 1) throw UsageError("crossing_times: grid must be >= 1");
  CrossingScan scan;
  const double dt = (t1 - t0) / grid;
  auto energy = [&](Mode k, double t) {
    return mode_energy(path.horizontal.value(t), path.vertical.value(t), k);
  };

  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      const Mode p = modes[i];
      const Mode q = modes[j];
      if (p == q) continue;
      auto diff = [&](double t) { return energy(p, t) - energy(q, t); };
      double prev = diff(t0);
      if (prev == 0.0) scan.crossings.push_back({t0, p, q, energy(p, t0)});
      for (int c = 0; c < grid; ++c) {
        const double lo = t0 + c * dt;
        const double hi = c + 1 == grid ? t1 : t0 + (c + 1) * dt;
        const double next = diff(hi);
        if (next == 0.0) {
          scan.crossings.push_back({hi, p, q, energy(p, hi)});
        } else if (prev != 0.0 && (prev < 0.0) != (next < 0.0)) {
          double a = lo, b = hi, fa = prev;
          while (b - a > 1e-10 * std::max(std::abs(t1 - t0), std::abs(b))) {
            const double mid = 0.5 * (a + b);
            const double fm = diff(mid);
            if (fm == 0.0) {
              a = b = mid;
              break;
            }
            if ((fm < 0.0) == (fa < 0.0)) {
              a = mid;
              fa = fm;
            } else {
              b = mid;
            }
          }
          const double t = 0.5 * (a + b);
          scan.crossings.push_back({t, p, q, energy(p, t)});
        } else if (prev != 0.0) {
          // Same sign at both ends: probe the interior for a hidden pair of crossings.
          for (int s = 1; s < 4; ++s) {
            const double v = diff(lo + s * 0.25 * (hi - lo));
            if (v != 0.0 && (v < 0.0) != (prev < 0.0)) {
              scan.warnings.push_back("two crossings of (" + std::to_string(p.m) + "," + std::to_string(p.n) +
                                      ") and (" + std::to_string(q.m) + "," + std::to_string(q.n) +
                                      ") inside one grid cell near t=" + std::to_string(lo) +
                                      "; refine the grid");
              break;
            }
          }
        }
        prev = next;
      }
    }
  }
  std::sort(scan.crossings.begin(), scan.crossings.end(),
            [](const Crossing& x, const Crossing& y) { return x.t < y.t; });
  return scan;
}

}  // namespace boxctl
