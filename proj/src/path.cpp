#include "boxctl/path.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace boxctl {

SideLaw SideLaw::constant(double length) {
  return {[length](double) { return length; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

SideLaw SideLaw::linear(double length0, double length1, double t0, double t1) {
  if (!(t1 > t0)) throw UsageError("SideLaw::linear: empty time interval");
  const double speed = (length1 - length0) / (t1 - t0);
  auto inside = [t0, t1](double t) { return t >= t0 && t <= t1; };
  return {[=](double t) { return length0 + speed * (std::clamp(t, t0, t1) - t0); },
          [=](double t) { return inside(t) ? speed : 0.0; },
          [](double) { return 0.0; }};
}

SideLaw SideLaw::smoothstep(double length0, double length1, double t0, double t1) {
  if (!(t1 > t0)) throw UsageError("SideLaw::smoothstep: empty time interval");
  const double span = t1 - t0;
  const double delta = length1 - length0;
  auto s_of = [=](double t) { return std::clamp((t - t0) / span, 0.0, 1.0); };
  return {[=](double t) {
            const double s = s_of(t);
            return length0 + delta * s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
          },
          [=](double t) {
            const double s = s_of(t);
            return delta / span * 30.0 * s * s * (1.0 - s) * (1.0 - s);
          },
          [=](double t) {
            const double s = s_of(t);
            return delta / (span * span) * 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
          }};
}

namespace {

struct QuinticSamples {
  std::vector<double> t, f, df, d2f;

  // Locates the interval and returns the normalized coordinate.
  std::pair<std::size_t, double> locate(double x) const {
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    i = std::min(i, t.size() - 2);
    return {i, (x - t[i]) / (t[i + 1] - t[i])};
  }

  // Derivative `order` (0..2) of the quintic Hermite interpolant.
  double eval(double x, int order) const {
    if (x <= t.front()) return order == 0 ? f.front() : order == 1 ? df.front() : d2f.front();
    if (x >= t.back()) return order == 0 ? f.back() : order == 1 ? df.back() : d2f.back();
    const auto [i, s] = locate(x);
    const double h = t[i + 1] - t[i];
    const double p0 = f[i], p1 = f[i + 1];
    const double v0 = df[i] * h, v1 = df[i + 1] * h;
    const double a0 = d2f[i] * h * h, a1 = d2f[i + 1] * h * h;
    // Coefficients of c0 + c1 s + ... + c5 s^5 in the unit interval.
    const double c0 = p0, c1 = v0, c2 = 0.5 * a0;
    const double c3 = -10.0 * p0 - 6.0 * v0 - 1.5 * a0 + 10.0 * p1 - 4.0 * v1 + 0.5 * a1;
    const double c4 = 15.0 * p0 + 8.0 * v0 + 1.5 * a0 - 15.0 * p1 + 7.0 * v1 - a1;
    const double c5 = -6.0 * p0 - 3.0 * v0 - 0.5 * a0 + 6.0 * p1 - 3.0 * v1 + 0.5 * a1;
    switch (order) {
      case 0: return c0 + s * (c1 + s * (c2 + s * (c3 + s * (c4 + s * c5))));
      case 1: return (c1 + s * (2 * c2 + s * (3 * c3 + s * (4 * c4 + s * 5 * c5)))) / h;
      default: return (2 * c2 + s * (6 * c3 + s * (12 * c4 + s * 20 * c5))) / (h * h);
    }
  }
};

}  // namespace

SideLaw SideLaw::from_samples(std::vector<double> t, std::vector<double> f, std::vector<double> df,
                              std::vector<double> d2f) {
  if (t.size() < 2 || f.size() != t.size() || df.size() != t.size() || d2f.size() != t.size())
    throw UsageError("SideLaw::from_samples: need >= 2 samples of equal length");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw UsageError("SideLaw::from_samples: times must increase strictly");
  auto data = std::make_shared<const QuinticSamples>(
      QuinticSamples{std::move(t), std::move(f), std::move(df), std::move(d2f)});
  return {[data](double x) { return data->eval(x, 0); }, [data](double x) { return data->eval(x, 1); },
          [data](double x) { return data->eval(x, 2); }};
}

DeformationPath DeformationPath::stationary(double a, double b, double t0, double t1) {
  Rect check(a, b);
  (void)check;
  return {SideLaw::constant(a), SideLaw::constant(b), t0, t1};
}

DeformationPath DeformationPath::linear(double a0, double a1, double b0, double b1, double t0, double t1) {
  Rect c0(a0, b0), c1(a1, b1);
  (void)c0;
  (void)c1;
  return {a0 == a1 ? SideLaw::constant(a0) : SideLaw::linear(a0, a1, t0, t1),
          b0 == b1 ? SideLaw::constant(b0) : SideLaw::linear(b0, b1, t0, t1), t0, t1};
}

DeformationPath DeformationPath::smoothstep(double a0, double a1, double b0, double b1, double t0,
                                            double t1) {
  Rect c0(a0, b0), c1(a1, b1);
  (void)c0;
  (void)c1;
  return {a0 == a1 ? SideLaw::constant(a0) : SideLaw::smoothstep(a0, a1, t0, t1),
          b0 == b1 ? SideLaw::constant(b0) : SideLaw::smoothstep(b0, b1, t0, t1), t0, t1};
}

void DeformationPath::validate(int samples, double tol) const {
  if (!(t_end > t_start)) throw UsageError("DeformationPath: t_end must exceed t_start");
  if (!horizontal.value || !horizontal.rate || !horizontal.accel || !vertical.value ||
      !vertical.rate || !vertical.accel)
    throw UsageError("DeformationPath: missing side law or derivative");
  const double span = t_end - t_start;
  const double h = span * 1e-5;
  auto check_side = [&](const SideLaw& side, const char* name) {
    for (int i = 0; i <= samples; ++i) {
      const double t = t_start + span * i / samples;
      if (!(side.value(t) > 0.0))
        throw UsageError(std::string("DeformationPath: ") + name + " side not positive at t=" +
                         std::to_string(t));
      if (i == 0 || i == samples) continue;
      const double fd1 = (side.value(t + h) - side.value(t - h)) / (2 * h);
      const double fd2 = (side.rate(t + h) - side.rate(t - h)) / (2 * h);
      const double scale1 = std::max({std::abs(fd1), std::abs(side.rate(t)), side.value(t) / span});
      const double scale2 =
          std::max({std::abs(fd2), std::abs(side.accel(t)), side.value(t) / (span * span)});
      if (std::abs(fd1 - side.rate(t)) > tol * scale1 || std::abs(fd2 - side.accel(t)) > tol * scale2)
        throw UsageError(std::string("DeformationPath: ") + name +
                         " derivative disagrees with finite differences at t=" + std::to_string(t));
    }
  };
  check_side(horizontal, "horizontal");
  check_side(vertical, "vertical");
}

}  // namespace boxctl
