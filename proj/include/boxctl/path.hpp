#pragma once

#include <functional>
#include <vector>

#include "boxctl/rect.hpp"

namespace boxctl {

/// One side length as a C^2 function of time, with its first two derivatives.
struct SideLaw {
  std::function<double(double)> value;
  std::function<double(double)> rate;    // d/dt
  std::function<double(double)> accel;   // d^2/dt^2

  static SideLaw constant(double length);
  /// length0 -> length1 at constant speed over [t0, t1]; held fixed outside.
  static SideLaw linear(double length0, double length1, double t0, double t1);
  /// Quintic smoothstep 6s^5 - 15s^4 + 10s^3: first and second derivatives
  /// vanish at both ends, so concatenations stay C^2.
  static SideLaw smoothstep(double length0, double length1, double t0, double t1);
  /// Quintic Hermite interpolation of sampled (t, f, f', f''). Times must be
  /// strictly increasing; held at the end values outside the sample range.
  static SideLaw from_samples(std::vector<double> t, std::vector<double> f, std::vector<double> df,
                              std::vector<double> d2f);
};

/// Time-parametrized rectangle (0, f1(t)) x (0, f2(t)) on [t_start, t_end].
struct DeformationPath {
  SideLaw horizontal;
  SideLaw vertical;
  double t_start = 0.0;
  double t_end = 1.0;

  Rect rect_at(double t) const { return {horizontal.value(t), vertical.value(t)}; }
  double duration() const { return t_end - t_start; }

  static DeformationPath stationary(double a, double b, double t0, double t1);
  static DeformationPath linear(double a0, double a1, double b0, double b1, double t0, double t1);
  static DeformationPath smoothstep(double a0, double a1, double b0, double b1, double t0, double t1);

  /// Throws UsageError when a side is non-positive or a supplied derivative
  /// disagrees with central differences of the values (relative `tol`, on
  /// `samples` interior points).
  void validate(int samples = 64, double tol = 1e-6) const;
};

}  // namespace boxctl
