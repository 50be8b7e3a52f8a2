#include "boxctl/control.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "boxctl/error.hpp"
#include "boxctl/matrix_elements.hpp"

namespace boxctl {

namespace odeint = boost::numeric::odeint;

namespace {

constexpr double kRelTol = 1e-10;
constexpr double kAbsTol = 1e-12;
constexpr double kBlowup = 1e12;

struct Blowup {};

std::vector<double> uniform_grid(double lo, double hi, int samples) {
  std::vector<double> g(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) g[i] = lo + (hi - lo) * i / (samples - 1);
  g.back() = hi;
  return g;
}

void check_profile(const ControlProfile& p) {
  if (!p.V) throw UsageError("control profile: V is missing");
  if (!(p.tau_f > 0.0)) throw UsageError("control profile: tau_f must be positive");
}

std::vector<std::pair<std::string, std::vector<double>>> read_csv_columns(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw UsageError("CSV input is empty");
  std::vector<std::pair<std::string, std::vector<double>>> cols;
  {
    std::istringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) {
      while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
      cols.push_back({name, {}});
    }
  }
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(row, cell, ',')) {
      if (c >= cols.size()) throw UsageError("CSV row has more cells than the header: " + line);
      try {
        cols[c].second.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw UsageError("CSV cell is not a number: " + cell);
      }
      ++c;
    }
    if (c != cols.size()) throw UsageError("CSV row has fewer cells than the header: " + line);
  }
  return cols;
}

const std::vector<double>& column(const std::vector<std::pair<std::string, std::vector<double>>>& cols,
                                  const std::string& name) {
  for (const auto& [n, v] : cols)
    if (n == name) return v;
  throw UsageError("CSV is missing column '" + name + "'");
}

}  // namespace

const char* to_string(PotentialLaw law) { return law == PotentialLaw::riccati ? "riccati" : "linear"; }

PotentialLaw potential_law_from_string(const std::string& s) {
  if (s == "riccati") return PotentialLaw::riccati;
  if (s == "linear") return PotentialLaw::linear;
  throw UsageError("unknown potential law '" + s + "' (expected riccati or linear)");
}

double control_rate(PotentialLaw law, double U, double V) {
  return law == PotentialLaw::riccati ? 4.0 * U * U + V : 4.0 * U + V;
}

double ControlSolution::operator()(double t) const {
  if (t <= tau.front()) return U.front();
  if (t >= tau.back()) return U.back();
  const auto it = std::upper_bound(tau.begin(), tau.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - tau.begin()) - 1;
  const double h = tau[i + 1] - tau[i];
  const double s = (t - tau[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * U[i] + h10 * h * dU[i] + h01 * U[i + 1] + h11 * h * dU[i + 1];
}

ControlSolution integrate_U(const ControlProfile& profile, int samples) {
  check_profile(profile);
  if (samples < 2) throw UsageError("integrate_U: need at least 2 samples");
  ControlSolution sol;
  sol.law = profile.law;
  sol.tau = uniform_grid(0.0, profile.tau_f, samples);
  auto rhs = [&](const double& u, double& du, double t) {
    if (!std::isfinite(u) || std::abs(u) > kBlowup) throw Blowup{};
    du = control_rate(profile.law, u, profile.V(std::min(t, profile.tau_f)));
  };
  double u = profile.U0;
  try {
    odeint::integrate_times(odeint::make_controlled<odeint::runge_kutta_dopri5<double>>(kAbsTol, kRelTol), rhs, u,
                            sol.tau.begin(), sol.tau.end(), profile.tau_f / (samples - 1),
                            [&](const double& x, double) { sol.U.push_back(x); });
  } catch (const Blowup&) {
    throw NumericalError("control_blowup", "integrate_U: U diverges before tau_f; lower U0");
  } catch (const odeint::step_adjustment_error&) {
    throw NumericalError("control_blowup", "integrate_U: step size collapsed; U is singular before tau_f");
  } catch (const odeint::no_progress_error&) {
    throw NumericalError("control_blowup", "integrate_U: step size collapsed; U is singular before tau_f");
  }
  if (sol.U.size() != sol.tau.size()) throw NumericalError("control_blowup", "integrate_U: integration stopped early");
  sol.dU.resize(sol.U.size());
  for (std::size_t i = 0; i < sol.U.size(); ++i) sol.dU[i] = control_rate(profile.law, sol.U[i], profile.V(sol.tau[i]));
  sol.min_U = *std::min_element(sol.U.begin(), sol.U.end());
  sol.max_abs_U = 0.0;
  for (double x : sol.U) sol.max_abs_U = std::max(sol.max_abs_U, std::abs(x));
  if (!(sol.min_U > 0.0))
    throw NumericalError("nonpositive_U", "integrate_U: U reaches " + std::to_string(sol.min_U) +
                                              " on [0, tau_f]; increase U0");
  return sol;
}

double select_U0(const std::function<double(double)>& V, double tau_f, PotentialLaw law) {
  if (!V) throw UsageError("select_U0: V is missing");
  if (!(tau_f > 0.0)) throw UsageError("select_U0: tau_f must be positive");
  // Coarse trapezoid of int_0^tau e^{-4s} V(s) ds.
  constexpr int coarse = 256;
  double acc = 0.0, lowest = 0.0;
  double prev = V(0.0);
  for (int i = 1; i <= coarse; ++i) {
    const double s = tau_f * i / coarse;
    const double cur = std::exp(-4.0 * s) * V(s);
    acc += 0.5 * (prev + cur) * tau_f / coarse;
    lowest = std::min(lowest, acc);
    prev = cur;
  }
  // Solutions are ordered in U0, so the admissible U0 form an interval with
  // "nonpositive_U" below and "control_blowup" above it.
  enum class Outcome { ok, low, high };
  auto trial = [&](double u0) {
    try {
      integrate_U({V, tau_f, u0, law});
      return Outcome::ok;
    } catch (const NumericalError& e) {
      if (e.code() == "nonpositive_U") return Outcome::low;
      if (e.code() == "control_blowup") return Outcome::high;
      throw;
    }
  };
  double U0 = 1.0 + std::max(0.0, -lowest);
  double lo = 0.0, hi = 0.0;
  int budget = 60;
  Outcome first = trial(U0);
  if (first == Outcome::ok) return U0;
  if (first == Outcome::low) {
    lo = U0;
    for (; budget > 0; --budget) {
      U0 *= 2.0;
      const Outcome o = trial(U0);
      if (o == Outcome::ok) return U0;
      if (o == Outcome::high) break;
      lo = U0;
    }
    hi = U0;
  } else {
    hi = U0;
    for (; budget > 0; --budget) {
      U0 *= 0.5;
      const Outcome o = trial(U0);
      if (o == Outcome::ok) return U0;
      if (o == Outcome::low) break;
      hi = U0;
    }
    lo = U0;
  }
  for (int it = 0; budget > 0 && it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Outcome o = trial(mid);
    if (o == Outcome::ok) return mid;
    (o == Outcome::low ? lo : hi) = mid;
  }
  throw NumericalError("no_admissible_U0", "select_U0: no U0 keeps U positive and finite on [0, tau_f]");
}

double escape_bound(double t, double a, double max_abs_U) {
  const double k = 8.0 * max_abs_U;
  return std::log1p(k * t / (a * a)) / k;
}

double escape_bound_unit_start(double t, double a, double max_abs_U) {
  const double k = 8.0 * max_abs_U;
  return (std::log(1.0 / (a * a) + k * t) + 2.0 * std::log(a)) / k;
}

SideLaw hold_after(const SideLaw& inner, double end) {
  const double f_end = inner.value(end);
  return {[inner, end, f_end](double x) { return x >= end ? f_end : inner.value(x); },
          [inner, end](double x) { return x >= end ? 0.0 : inner.rate(x); },
          [inner, end](double x) { return x >= end ? 0.0 : inner.accel(x); }};
}

SideLaw ShapeLaw::side_law() const { return hold_after(SideLaw::from_samples(t, f, f_prime, f_second), T); }

ShapeLaw synthesize_shape(const ControlProfile& profile, double a, int samples) {
  check_profile(profile);
  if (!(a > 0.0)) throw UsageError("synthesize_shape: a must be positive");
  if (samples < 2) throw UsageError("synthesize_shape: need at least 2 samples");
  const ControlSolution usol = integrate_U(profile);

  using State = std::array<double, 3>;  // tau, q = 1/tau', U
  const double tau_f = profile.tau_f;
  auto V_at = [&](double tau) { return profile.V(std::clamp(tau, 0.0, tau_f)); };
  auto rhs = [&](const State& x, State& dx, double) {
    if (!(x[1] > 0.0)) throw NumericalError("shape_collapse", "synthesize_shape: f reached zero");
    dx[0] = 1.0 / x[1];
    dx[1] = 8.0 * x[2];
    dx[2] = control_rate(profile.law, x[2], V_at(x[0])) / x[1];
  };
  const State x0{0.0, a * a, profile.U0};

  // Time by which the escape bound forces arrival.
  const double k = 8.0 * usol.max_abs_U;
  const double arrival = a * a * std::expm1(std::min(k * tau_f, 700.0)) / k;
  const double t_limit = 1.01 * arrival + 1.0;

  auto stepper = odeint::make_dense_output(kAbsTol, kRelTol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(x0, 0.0, std::min(1e-3, tau_f * a * a * 1e-3));
  double T = -1.0;
  while (stepper.current_time() < t_limit) {
    stepper.do_step(rhs);
    if (stepper.current_state()[0] >= tau_f) {
      double lo = stepper.previous_time();
      double hi = stepper.current_time();
      State mid_state;
      while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, mid_state);
        (mid_state[0] < tau_f ? lo : hi) = mid;
      }
      T = 0.5 * (lo + hi);
      break;
    }
  }
  if (T < 0.0)
    throw NumericalError("no_arrival", "synthesize_shape: tau did not reach tau_f by t=" + std::to_string(t_limit));

  ShapeLaw shape;
  shape.a = a;
  shape.T = T;
  shape.law = profile.law;
  shape.max_abs_U = usol.max_abs_U;
  shape.t = uniform_grid(0.0, T, samples);
  State x = x0;
  odeint::integrate_times(odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(kAbsTol, kRelTol), rhs, x,
                          shape.t.begin(), shape.t.end(), T / (samples - 1), [&](const State& s, double) {
                            const double f = std::sqrt(s[1]);
                            const double U = s[2];
                            shape.tau.push_back(s[0]);
                            shape.tau_prime.push_back(1.0 / s[1]);
                            shape.f.push_back(f);
                            shape.f_prime.push_back(4.0 * U / f);
                            shape.f_second.push_back(4.0 / (f * f * f) *
                                                     (control_rate(profile.law, U, V_at(s[0])) - 4.0 * U * U));
                          });
  shape.f.front() = a;

  const double tp_max = 1.0 / (a * a);
  shape.escape_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < shape.t.size(); ++i) {
    const double tp = shape.tau_prime[i];
    if (!(tp > 0.0) || tp > tp_max * (1.0 + 1e-9))
      throw NumericalError("integrator_fault", "synthesize_shape: tau' left (0, 1/a^2] at t=" +
                                                   std::to_string(shape.t[i]));
    if (i > 0 && tp > shape.tau_prime[i - 1] * (1.0 + 1e-12))
      throw NumericalError("integrator_fault", "synthesize_shape: tau' increased at t=" + std::to_string(shape.t[i]));
    shape.escape_margin = std::min(shape.escape_margin, shape.tau[i] - escape_bound(shape.t[i], a, usol.max_abs_U));
  }
  if (shape.escape_margin < -1e-9 * tau_f)
    throw NumericalError("escape_bound", "synthesize_shape: tau fell below the escape bound");
  return shape;
}

void write_shape_csv(std::ostream& out, const ShapeLaw& shape) {
  const auto old = out.precision(17);
  out << "t,tau,tau_prime,f,f_prime,f_second\n";
  for (std::size_t i = 0; i < shape.t.size(); ++i)
    out << shape.t[i] << ',' << shape.tau[i] << ',' << shape.tau_prime[i] << ',' << shape.f[i] << ','
        << shape.f_prime[i] << ',' << shape.f_second[i] << '\n';
  out.precision(old);
}

SideLaw read_shape_csv(std::istream& in, double* T) {
  const auto cols = read_csv_columns(in);
  const auto& t = column(cols, "t");
  const auto& f = column(cols, "f");
  const auto& fp = column(cols, "f_prime");
  const auto& fpp = column(cols, "f_second");
  if (t.size() < 2) throw UsageError("shape CSV needs at least 2 rows");
  if (t.front() != 0.0) throw UsageError("shape CSV must start at t = 0");
  if (T) *T = t.back();
  return hold_after(SideLaw::from_samples(t, f, fp, fpp), t.back());
}

double SampledPotential::operator()(double t) const {
  if (t <= tau.front()) return V.front();
  if (t >= tau.back()) return V.back();
  const auto it = std::upper_bound(tau.begin(), tau.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - tau.begin()) - 1;
  const double s = (t - tau[i]) / (tau[i + 1] - tau[i]);
  return (1.0 - s) * V[i] + s * V[i + 1];
}

SampledPotential read_potential_csv(std::istream& in) {
  const auto cols = read_csv_columns(in);
  SampledPotential p{column(cols, "tau"), column(cols, "V")};
  if (p.tau.size() < 2) throw UsageError("potential CSV needs at least 2 rows");
  if (p.tau.front() != 0.0) throw UsageError("potential CSV must start at tau = 0");
  for (std::size_t i = 1; i < p.tau.size(); ++i)
    if (!(p.tau[i] > p.tau[i - 1])) throw UsageError("potential CSV: tau must increase strictly");
  return p;
}

Eigen::VectorXcd propagate_1d(const Eigen::VectorXcd& initial, const std::function<double(double)>& V,
                              double tau_end, double dtau) {
  if (!V) throw UsageError("propagate_1d: V is missing");
  if (initial.size() < 1) throw UsageError("propagate_1d: empty state");
  if (!(dtau > 0.0) || !(tau_end >= 0.0)) throw UsageError("propagate_1d: need dtau > 0 and tau_end >= 0");
  if (std::abs(initial.norm() - 1.0) > 1e-8) throw UsageError("propagate_1d: initial state must have unit norm");
  const Eigen::Index N = initial.size();
  const Eigen::MatrixXd M = quadratic_moment_matrix(static_cast<int>(N));
  Eigen::VectorXd kinetic(N);
  for (Eigen::Index m = 1; m <= N; ++m) kinetic(m - 1) = std::numbers::pi * std::numbers::pi * m * m;
  const std::size_t steps = static_cast<std::size_t>(std::max(1.0, std::ceil(tau_end / dtau - 1e-9)));
  const double h = tau_end / static_cast<double>(steps);
  Eigen::VectorXcd c = initial;
  if (tau_end == 0.0) return c;
  for (std::size_t s = 0; s < steps; ++s) {
    const double v = V((static_cast<double>(s) + 0.5) * h);
    if (v == 0.0) {
      for (Eigen::Index m = 0; m < N; ++m) c(m) *= std::polar(1.0, -h * kinetic(m));
      continue;
    }
    Eigen::MatrixXd A = v * M;
    A.diagonal() += kinetic;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolver", "propagate_1d: eigensolver failed");
    Eigen::VectorXcd y = eig.eigenvectors().transpose().cast<std::complex<double>>() * c;
    for (Eigen::Index k = 0; k < N; ++k) y(k) *= std::polar(1.0, -h * eig.eigenvalues()(k));
    c = eig.eigenvectors().cast<std::complex<double>>() * y;
  }
  return c;
}

Eigen::VectorXcd propagate_1d(const Eigen::VectorXcd& initial, const ControlProfile& profile, double dtau) {
  check_profile(profile);
  return propagate_1d(initial, profile.V, profile.tau_f, dtau);
}

std::optional<double> phase_wait_time(const std::vector<double>& energies, const std::vector<double>& current,
                                      const std::vector<double>& target, double delta, double t_max) {
  if (energies.empty()) throw UsageError("phase_wait_time: no energies");
  if (current.size() != energies.size() || target.size() != energies.size())
    throw UsageError("phase_wait_time: energies, current and target must have equal length");
  if (!(delta > 0.0)) throw UsageError("phase_wait_time: delta must be positive");
  if (!(t_max >= 0.0)) throw UsageError("phase_wait_time: t_max must be non-negative");
  std::vector<double> sorted = energies;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw UsageError("phase_wait_time: energies must be pairwise distinct");
  double top = 0.0;
  for (double e : energies) top = std::max(top, std::abs(e));
  if (top == 0.0) throw UsageError("phase_wait_time: energies must not all vanish");
  const double step = std::numbers::pi * delta / (2.0 * top);
  const auto count = static_cast<std::size_t>(std::floor(t_max / step));
  for (std::size_t k = 0; k <= count; ++k) {
    const double t = static_cast<double>(k) * step;
    bool ok = true;
    for (std::size_t j = 0; j < energies.size() && ok; ++j)
      ok = std::abs(std::polar(1.0, -energies[j] * t + current[j]) - std::polar(1.0, target[j])) < delta;
    if (ok) return t;
  }
  return std::nullopt;
}

}  // namespace boxctl
