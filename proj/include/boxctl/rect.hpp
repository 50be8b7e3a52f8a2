#pragma once

#include <compare>
#include <numbers>

#include "boxctl/error.hpp"

namespace boxctl {

/// Side lengths of the box (0,a) x (0,b). Both must be positive; the check
/// happens once, at construction.
class Rect {
 public:
  Rect(double a, double b) : a_(a), b_(b) {
    if (!(a > 0.0) || !(b > 0.0)) throw UsageError("Rect: side lengths must be positive");
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

 private:
  double a_;
  double b_;
};

/// Quantum-number pair: m counts half-waves along the horizontal side,
/// n along the vertical one.
struct Mode {
  int m = 1;
  int n = 1;

  auto operator<=>(const Mode&) const = default;
};

inline bool valid(Mode k) noexcept { return k.m >= 1 && k.n >= 1; }

/// Dirichlet eigenvalue pi^2 (m^2/a^2 + n^2/b^2).
inline double mode_energy(double a, double b, Mode k) noexcept {
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  const double x = k.m / a;
  const double y = k.n / b;
  return pi2 * (x * x + y * y);
}

inline double mode_energy(const Rect& r, Mode k) noexcept { return mode_energy(r.a(), r.b(), k); }

}  // namespace boxctl
