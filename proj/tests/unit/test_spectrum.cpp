#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "boxctl/spectrum.hpp"

using namespace boxctl;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent ordering: sort every (m, n) with m, n <= 60 by (energy, m, n).
std::vector<Mode> sorted_modes(double a, double b) {
  std::vector<Mode> modes;
  for (int m = 1; m <= 60; ++m)
    for (int n = 1; n <= 60; ++n) modes.push_back({m, n});
  std::sort(modes.begin(), modes.end(), [&](Mode x, Mode y) {
    const double ex = mode_energy(a, b, x), ey = mode_energy(a, b, y);
    if (ex != ey) return ex < ey;
    return x < y;
  });
  return modes;
}

}  // namespace

TEST_CASE("unit square: ground state and the first degenerate pair") {
  const SpectrumIndex idx = build_index(Rect(1, 1), 3);
  CHECK(idx.mode_of(1) == Mode{1, 1});
  CHECK(idx.energy_of_rank(1) == doctest::Approx(2 * kPi * kPi));
  CHECK(idx.has_tie_up_to(3));
  const auto& ties = idx.tie_report();
  REQUIRE(!ties.empty());
  CHECK(ties.front() == std::pair<std::size_t, std::size_t>{2, 3});
}

TEST_CASE("ranks agree with a brute-force sort") {
  for (double a : {0.9, 1.2, std::numbers::pi / 2}) {
    const auto expected = sorted_modes(a, 1.0);
    const SpectrumIndex idx = build_index(Rect(a, 1.0), 400);
    for (std::size_t r = 1; r <= 400; ++r) {
      CHECK(idx.mode_of(r) == expected[r - 1]);
      CHECK(idx.rank_of(expected[r - 1]).value() == r);
    }
  }
}

TEST_CASE("exact counts follow the two-term counting law") {
  const Rect rect(1.3, 0.7);
  for (double E : {1e4, 1e5, 1e6}) {
    const double two_term = weyl_count(rect, E) - 2.0 * (rect.a() + rect.b()) * std::sqrt(E) / (4 * kPi);
    const double n = static_cast<double>(count_modes_below(rect, E));
    CHECK(std::abs(n - two_term) / n < 20.0 / std::sqrt(E));
  }
}

TEST_CASE("resonance length makes the pair degenerate") {
  const auto a = resonance_length({3, 1}, {1, 2}, 1.0);
  REQUIRE(a.has_value());
  CHECK(*a == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK(mode_energy(*a, 1.0, {3, 1}) == doctest::Approx(mode_energy(*a, 1.0, {1, 2})).epsilon(1e-14));
  CHECK_FALSE(resonance_length({1, 1}, {2, 2}, 1.0).has_value());
  CHECK_FALSE(resonance_length({1, 2}, {2, 2}, 1.0).has_value());
}

TEST_CASE("crossing of (2,1) and (1,2) on a symmetric smoothstep sweep sits at the midpoint") {
  const DeformationPath path = DeformationPath::smoothstep(1.2, 0.8, 1.0, 1.0, 0.0, 20.0);
  const CrossingScan scan = crossing_times(path, {{2, 1}, {1, 2}, {1, 1}}, 0.0, 20.0);
  REQUIRE(scan.crossings.size() == 1);
  const Crossing& c = scan.crossings.front();
  CHECK(c.t == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(c.energy == doctest::Approx(5 * kPi * kPi).epsilon(1e-9));
}

TEST_CASE("every crossing found is a genuine sign change of the energy difference") {
  const DeformationPath path = DeformationPath::linear(std::numbers::pi / 2, 0.6, 1.0, 1.3, 0.0, 1.0);
  std::vector<Mode> modes;
  for (int m = 1; m <= 4; ++m)
    for (int n = 1; n <= 4; ++n) modes.push_back({m, n});
  const CrossingScan scan = crossing_times(path, modes, 0.0, 1.0);
  CHECK(!scan.crossings.empty());
  for (const auto& c : scan.crossings) {
    auto gap = [&](double t) {
      const Rect r = path.rect_at(t);
      return mode_energy(r, c.first) - mode_energy(r, c.second);
    };
    CHECK(gap(c.t - 1e-6) * gap(c.t + 1e-6) < 0.0);
  }
}
