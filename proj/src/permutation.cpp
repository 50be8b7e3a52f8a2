#include "boxctl/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "boxctl/kernels.hpp"
#include "boxctl/quadrature.hpp"
#include "boxctl/spectrum.hpp"

namespace boxctl {

SigmaTable build_sigma(double a, double a_tilde, std::size_t K, double b) {
  if (K < 1) throw UsageError("build_sigma: K must be >= 1");
  const Rect box(a, b);
  const Rect squeezed(a_tilde, b);

  const SpectrumIndex domain = build_index(box, K);
  if (domain.has_tie_up_to(K))
    throw NumericalError("tie_in_index",
                         "build_sigma: degenerate eigenvalues among the first K ranks of the (a x b) box; "
                         "choose side lengths with an irrational ratio");

  SigmaTable table;
  table.a = a;
  table.a_tilde = a_tilde;
  table.b = b;
  table.modes.resize(K);
  double top = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    table.modes[k - 1] = domain.mode_of(k);
    top = std::max(top, mode_energy(squeezed, table.modes[k - 1]));
  }

  const SpectrumIndex image = build_index_to_energy(squeezed, top);
  table.sigma.resize(K);
  kernels::parallel::lookup_ranks(table.modes, image.rank_table(), table.sigma);

  const std::uint32_t max_image = *std::max_element(table.sigma.begin(), table.sigma.end());
  if (std::find(table.sigma.begin(), table.sigma.end(), 0u) != table.sigma.end())
    throw NumericalError("incomplete_index", "build_sigma: image index missed a mode");
  if (image.has_tie_up_to(max_image))
    throw NumericalError("tie_in_index",
                         "build_sigma: degenerate eigenvalues among the image ranks of the (a_tilde x b) box; "
                         "choose side lengths with an irrational ratio");
  table.valid_to = K;
  return table;
}

std::string to_string(OrbitStatus s) {
  switch (s) {
    case OrbitStatus::escaped: return "escaped";
    case OrbitStatus::periodic: return "periodic";
    case OrbitStatus::exhausted: return "exhausted";
  }
  return "unknown";
}

OrbitRecord iterate_orbit(const SigmaTable& table, std::size_t start, std::size_t max_steps) {
  if (start < 1 || start > table.valid_to) throw UsageError("iterate_orbit: start outside 1..valid_to");
  OrbitRecord rec;
  rec.start = start;
  rec.trajectory.push_back(start);
  std::uint64_t x = start;
  for (std::size_t step = 0; step < max_steps; ++step) {
    x = table(static_cast<std::size_t>(x));
    rec.trajectory.push_back(x);
    if (x == start) {
      rec.status = OrbitStatus::periodic;
      rec.period = step + 1;
      break;
    }
    if (x > table.valid_to) {
      rec.status = OrbitStatus::escaped;
      break;
    }
  }
  const std::size_t steps = rec.trajectory.size() - 1;
  if (steps > 0)
    rec.growth_rate = (std::log(static_cast<double>(rec.trajectory.back())) - std::log(static_cast<double>(start))) /
                      static_cast<double>(steps);
  return rec;
}

std::vector<std::vector<std::uint64_t>> find_periodic_orbits(const SigmaTable& table, std::size_t start_max,
                                                             std::size_t period_max) {
  if (start_max > table.valid_to) throw UsageError("find_periodic_orbits: start_max exceeds valid_to");
  std::set<std::vector<std::uint64_t>> found;
  for (std::size_t s = 1; s <= start_max; ++s) {
    const OrbitRecord rec = iterate_orbit(table, s, period_max);
    if (rec.status != OrbitStatus::periodic) continue;
    std::vector<std::uint64_t> cycle(rec.trajectory.begin(), rec.trajectory.end() - 1);
    std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
    found.insert(std::move(cycle));
  }
  std::vector<std::vector<std::uint64_t>> cycles(found.begin(), found.end());
  std::stable_sort(cycles.begin(), cycles.end(),
                   [](const auto& x, const auto& y) { return x.size() < y.size(); });
  return cycles;
}

double mean_entropy_increase(const SigmaTable& table, std::size_t K) {
  if (K < 1 || K > table.valid_to) throw UsageError("mean_entropy_increase: K outside 1..valid_to");
  return kernels::parallel::mean_log_ratio(std::span<const std::uint32_t>(table.sigma).first(K));
}

EntropyPrediction entropy_integral(double a, double a_tilde) {
  if (!(a > 0.0) || !(a_tilde > 0.0)) throw UsageError("entropy_integral: lengths must be positive");
  const double r = a / a_tilde;
  auto integrand = [r](double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return std::log(r * c * c + s * s / r);
  };
  EntropyPrediction p;
  p.quadrature = 2.0 / std::numbers::pi * quadrature::adaptive(integrand, 0.0, std::numbers::pi / 2, 1e-12);
  const double q = std::sqrt(r);
  p.closed_form = 2.0 * std::log(0.5 * (q + 1.0 / q));
  return p;
}

void write_sigma_csv(std::ostream& out, const SigmaTable& table) {
  out << "k,m,n,sigma_k\n";
  for (std::size_t k = 1; k <= table.size(); ++k) {
    const Mode md = table.modes[k - 1];
    out << k << ',' << md.m << ',' << md.n << ',' << table.sigma[k - 1] << '\n';
  }
}

SigmaTable read_sigma_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,m,n,sigma_k", 0) != 0)
    throw UsageError("read_sigma_csv: missing header k,m,n,sigma_k");
  SigmaTable table;
  std::size_t expected = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::size_t k = 0;
    Mode md;
    std::uint64_t s = 0;
    if (!(row >> k >> md.m >> md.n >> s)) throw UsageError("read_sigma_csv: malformed row: " + line);
    if (k != expected++) throw UsageError("read_sigma_csv: rows must be k = 1, 2, ... in order");
    table.modes.push_back(md);
    table.sigma.push_back(static_cast<std::uint32_t>(s));
  }
  table.valid_to = table.sigma.size();
  return table;
}

}  // namespace boxctl
