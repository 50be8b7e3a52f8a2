#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "boxctl/control.hpp"
#include "boxctl/error.hpp"
#include "boxctl/evolution.hpp"

using namespace boxctl;

namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const NumericalError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("linear law against its closed form") {
  const double U0 = 0.3;
  const ControlProfile p{[](double t) { return std::sin(t); }, 1.5, U0, PotentialLaw::linear};
  const ControlSolution s = integrate_U(p, 301);
  for (std::size_t i = 0; i < s.tau.size(); i += 10) {
    const double t = s.tau[i];
    const double exact = std::exp(4 * t) * U0 + (std::exp(4 * t) - 4 * std::sin(t) - std::cos(t)) / 17.0;
    CHECK(s.U[i] == doctest::Approx(exact).epsilon(1e-8));
  }
  // Hermite evaluation between nodes.
  const double mid = 0.5 * (s.tau[7] + s.tau[8]);
  CHECK(s(mid) == doctest::Approx(std::exp(4 * mid) * U0 + (std::exp(4 * mid) - 4 * std::sin(mid) - std::cos(mid)) / 17.0)
                      .epsilon(1e-8));
}

TEST_CASE("riccati law with V = 0 and its blow-up") {
  const double U0 = 0.2;
  const ControlSolution s = integrate_U({[](double) { return 0.0; }, 1.0, U0, PotentialLaw::riccati}, 101);
  for (std::size_t i = 0; i < s.tau.size(); ++i) CHECK(s.U[i] == doctest::Approx(U0 / (1 - 4 * U0 * s.tau[i])).epsilon(1e-8));
  CHECK(error_code([] { integrate_U({[](double) { return 0.0; }, 2.0, 0.2, PotentialLaw::riccati}); }) == "control_blowup");
  CHECK(error_code([] { integrate_U({[](double) { return -10.0; }, 1.0, 0.1, PotentialLaw::linear}); }) == "nonpositive_U");
  CHECK_THROWS_AS(integrate_U({[](double) { return 0.0; }, -1.0, 0.2, PotentialLaw::riccati}), UsageError);
}

TEST_CASE("select_U0 returns an admissible start or reports that none exists") {
  auto V = [](double t) { return -2.0 + std::sin(3.0 * t); };
  for (PotentialLaw law : {PotentialLaw::riccati, PotentialLaw::linear}) {
    const double U0 = select_U0(V, 2.0, law);
    CHECK(U0 > 0.0);
    CHECK_NOTHROW(integrate_U({V, 2.0, U0, law}));
  }
  // dU/dtau >= 4U^2 + 1 diverges before tau = pi/4 whatever U0 is.
  CHECK(error_code([] { select_U0([](double) { return 1.0; }, 1.0, PotentialLaw::riccati); }) == "no_admissible_U0");
}

TEST_CASE("constant U: closed-form shape sitting exactly on the escape bound") {
  const double a = 1.2, U0 = 0.25, tau_f = 0.6;
  const ControlProfile p{[&](double) { return -4 * U0 * U0; }, tau_f, U0, PotentialLaw::riccati};
  const ShapeLaw shape = synthesize_shape(p, a, 513);
  const double T = a * a * std::expm1(8 * U0 * tau_f) / (8 * U0);
  CHECK(shape.T == doctest::Approx(T).epsilon(1e-9));
  for (std::size_t i = 0; i < shape.t.size(); i += 16) {
    const double t = shape.t[i];
    const double f = std::sqrt(a * a + 8 * U0 * t);
    CHECK(shape.f[i] == doctest::Approx(f).epsilon(1e-9));
    CHECK(shape.f_prime[i] == doctest::Approx(4 * U0 / f).epsilon(1e-9));
    CHECK(shape.f_second[i] == doctest::Approx(-16 * U0 * U0 / (f * f * f)).epsilon(1e-9));
    CHECK(shape.tau[i] == doctest::Approx(escape_bound(t, a, U0)).epsilon(1e-9));
  }
  CHECK(std::abs(shape.escape_margin) < 1e-9);
}

TEST_CASE("synthesized shape reproduces V through tau = int f^-2 and f^3 f'' / 4") {
  auto V = [](double t) { return -2.0 + std::sin(3.0 * t); };
  const double tau_f = 1.0, a = 1.2;
  const ControlProfile p{V, tau_f, select_U0(V, tau_f, PotentialLaw::riccati), PotentialLaw::riccati};
  const ShapeLaw s = synthesize_shape(p, a, 4097);
  CHECK(s.tau.back() == doctest::Approx(tau_f).epsilon(1e-9));
  CHECK(s.escape_margin >= 0.0);
  // Simpson's rule for int f^-2 over pairs of sample intervals.
  double tau = 0.0, worst_tau = 0.0, worst_v = 0.0;
  const double h = s.t[1] - s.t[0];
  auto g = [&](std::size_t i) { return 1 / (s.f[i] * s.f[i]); };
  for (std::size_t i = 2; i < s.t.size(); i += 2) {
    tau += h / 3 * (g(i - 2) + 4 * g(i - 1) + g(i));
    worst_tau = std::max(worst_tau, std::abs(tau - s.tau[i]));
  }
  // Fourth-order second differences of the sampled f only.
  for (std::size_t i = 2; i + 2 < s.t.size(); ++i) {
    const double fpp = (-s.f[i + 2] + 16 * s.f[i + 1] - 30 * s.f[i] + 16 * s.f[i - 1] - s.f[i - 2]) / (12 * h * h);
    worst_v = std::max(worst_v, std::abs(std::pow(s.f[i], 3) * fpp / 4 - V(s.tau[i])));
  }
  CHECK(worst_tau < 1e-6);
  CHECK(worst_v < 1e-4);
}

TEST_CASE("escape bounds") {
  CHECK(escape_bound(0.0, 1.3, 2.0) == 0.0);
  CHECK(escape_bound(3.0, 1.0, 0.7) == doctest::Approx(escape_bound_unit_start(3.0, 1.0, 0.7)).epsilon(1e-14));
  CHECK(escape_bound_unit_start(3.0, 1.5, 0.7) > escape_bound(3.0, 1.5, 0.7));
  CHECK(escape_bound(3.0, 1.5, 0.7) == doctest::Approx(std::log(1 + 8 * 0.7 * 3.0 / 2.25) / (8 * 0.7)));
}

TEST_CASE("shape CSV round trip holds the last value") {
  auto V = [](double t) { return -2.0 + std::sin(3.0 * t); };
  const ControlProfile p{V, 0.5, select_U0(V, 0.5, PotentialLaw::riccati), PotentialLaw::riccati};
  const ShapeLaw s = synthesize_shape(p, 1.2, 257);
  std::stringstream io;
  write_shape_csv(io, s);
  double T = 0.0;
  const SideLaw back = read_shape_csv(io, &T);
  const SideLaw direct = s.side_law();
  CHECK(T == s.T);
  for (double x : {0.0, 0.3 * T, 0.71 * T, T}) {
    CHECK(back.value(x) == doctest::Approx(direct.value(x)).epsilon(1e-14));
    CHECK(back.rate(x) == doctest::Approx(direct.rate(x)).epsilon(1e-14));
  }
  CHECK(back.value(T + 5.0) == doctest::Approx(s.f.back()).epsilon(1e-14));
  CHECK(back.rate(T + 5.0) == 0.0);
  CHECK(back.accel(T + 5.0) == 0.0);
  std::stringstream late("t,tau,tau_prime,f,f_prime,f_second\n1,0,1,1,0,0\n2,0,1,1,0,0\n");
  CHECK_THROWS_AS(read_shape_csv(late), UsageError);
}

TEST_CASE("potential CSV") {
  std::stringstream io("tau,V\n0,1\n0.5,2\n1,0\n");
  const SampledPotential p = read_potential_csv(io);
  CHECK(p.tau_f() == 1.0);
  CHECK(p(0.25) == doctest::Approx(1.5));
  CHECK(p(0.75) == doctest::Approx(1.0));
  std::stringstream bad("tau,V\n0,1\n0,2\n");
  CHECK_THROWS_AS(read_potential_csv(bad), UsageError);
}

TEST_CASE("1D propagation: free phases, unitarity and second order") {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(10);
  c(0) = 0.6;
  c(2) = Complex(0.0, 0.8);
  const Eigen::VectorXcd free = propagate_1d(c, [](double) { return 0.0; }, 0.37, 0.01);
  for (int m = 1; m <= 10; ++m)
    CHECK(std::abs(free(m - 1) - c(m - 1) * std::polar(1.0, -kPi * kPi * m * m * 0.37)) < 1e-13);
  auto V = [](double t) { return 30.0 * std::cos(2.0 * t); };
  const auto x1 = propagate_1d(c, V, 1.0, 0.004);
  const auto x2 = propagate_1d(c, V, 1.0, 0.002);
  const auto x4 = propagate_1d(c, V, 1.0, 0.0005);
  CHECK(std::abs(x1.norm() - 1.0) < 1e-12);
  CHECK((x1 - x4).norm() / (x2 - x4).norm() == doctest::Approx(5.0).epsilon(0.2));
  CHECK_THROWS_AS(propagate_1d(2.0 * c, V, 1.0, 0.01), UsageError);
}

TEST_CASE("the horizontal axis of the 2D problem is the 1D tau-time problem") {
  auto V = [](double t) { return -2.0 + std::sin(3.0 * t); };
  const double tau_f = 0.3, a = 1.2, b = 0.9;
  const ControlProfile p{V, tau_f, select_U0(V, tau_f, PotentialLaw::riccati), PotentialLaw::riccati};
  const ShapeLaw s = synthesize_shape(p, a, 4097);
  DeformationPath path{s.side_law(), SideLaw::constant(b), 0.0, s.T};
  Eigen::VectorXcd u1 = Eigen::VectorXcd::Zero(8);
  u1(0) = 0.8;
  u1(1) = Complex(0.0, 0.6);
  const auto r = propagate(WaveState{u1 * Eigen::VectorXcd::Unit(6, 0).transpose()}, path, s.T / 4000);
  const Eigen::VectorXcd expected = propagate_1d(u1, V, tau_f, tau_f / 4000) * std::polar(1.0, -kPi * kPi * s.T / (b * b));
  CHECK((r.state.coeffs.col(0) - expected).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("phase wait time matches a direct scan") {
  const std::vector<double> E{1.0, 2.3, 3.7}, cur{0.0, 0.5, 1.0}, tgt{0.2, 0.1, 2.0};
  const double delta = 0.3;
  const auto t = phase_wait_time(E, cur, tgt, delta, 500.0);
  REQUIRE(t.has_value());
  const double step = kPi * delta / (2 * 3.7);
  double found = -1.0;
  for (int k = 0; found < 0 && k * step <= 500.0; ++k) {
    bool ok = true;
    for (int j = 0; j < 3; ++j) ok = ok && std::abs(std::exp(Complex(0, cur[j] - E[j] * k * step)) - std::exp(Complex(0, tgt[j]))) < delta;
    if (ok) found = k * step;
  }
  CHECK(*t == doctest::Approx(found).epsilon(1e-14));
  CHECK_FALSE(phase_wait_time(E, cur, tgt, 1e-3, 1.0).has_value());
  CHECK_THROWS_AS(phase_wait_time({1.0, 1.0}, {0, 0}, {0, 0}, 0.1, 1.0), UsageError);
}
