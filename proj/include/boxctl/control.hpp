#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "boxctl/path.hpp"

namespace boxctl {

/// Relation between the side-length law and the potential V(tau) y^2 it
/// produces after the change of time d tau = dt / f^2, with U = f f' / 4.
/// `riccati`: V = U' - 4U^2, which is what the substitution yields.
/// `linear`:  V = U' - 4U, the linearized form; kept to reproduce runs made
/// with that convention. It does not produce the requested V.
enum class PotentialLaw { riccati, linear };

const char* to_string(PotentialLaw law);
PotentialLaw potential_law_from_string(const std::string& s);

struct ControlProfile {
  std::function<double(double)> V;  // on [0, tau_f]
  double tau_f = 1.0;
  double U0 = 1.0;
  PotentialLaw law = PotentialLaw::riccati;
};

/// U on a uniform tau grid with derivative samples; evaluation between nodes
/// is cubic Hermite.
struct ControlSolution {
  PotentialLaw law = PotentialLaw::riccati;
  std::vector<double> tau;
  std::vector<double> U;
  std::vector<double> dU;
  double min_U = 0.0;
  double max_abs_U = 0.0;

  double operator()(double t) const;
};

/// dU/dtau for the given law.
double control_rate(PotentialLaw law, double U, double V);

/// Solves dU/dtau = 4U + V (linear) or 4U^2 + V (riccati) from U(0) = U0 with
/// adaptive Dormand-Prince (relative tolerance 1e-10). Throws
/// NumericalError("nonpositive_U") if U <= 0 somewhere on the grid and
/// NumericalError("control_blowup") if U diverges before tau_f.
ControlSolution integrate_U(const ControlProfile& profile, int samples = 2049);

/// Default U0: starts at 1 + max(0, -min_tau int_0^tau e^{-4s} V(s) ds),
/// doubles while U turns nonpositive and halves while U blows up (at most 60
/// times), then bisects between the two failure kinds. Throws
/// NumericalError("no_admissible_U0") when no U0 keeps U positive and finite.
double select_U0(const std::function<double(double)>& V, double tau_f, PotentialLaw law);

struct ShapeLaw {
  double a = 1.0;
  double T = 0.0;
  PotentialLaw law = PotentialLaw::riccati;
  double max_abs_U = 0.0;
  std::vector<double> t;
  std::vector<double> tau;
  std::vector<double> tau_prime;
  std::vector<double> f;
  std::vector<double> f_prime;   // 4U / f
  std::vector<double> f_second;  // (4 / f^3)(dU/dtau - 4U^2)
  /// Smallest tau(t) - escape_bound(t) over the grid.
  double escape_margin = 0.0;

  /// The side law on [0, T], held at f(T) with zero derivatives afterwards.
  SideLaw side_law() const;
};

/// Lower bound on tau(t) from 1/tau' <= a^2 + 8 ||U|| t:
/// tau >= ln(1 + 8 ||U|| t / a^2) / (8 ||U||).
double escape_bound(double t, double a, double max_abs_U);

/// The bound written with 1/a^2 in place of a^2:
/// (ln(1/a^2 + 8 ||U|| t) + 2 ln a) / (8 ||U||). Equal to escape_bound at
/// a = 1, stronger for a > 1 and not implied by the ODE there.
double escape_bound_unit_start(double t, double a, double max_abs_U);

/// Integrates tau'' = -8 tau'^2 U(tau), tau(0) = 0, tau'(0) = 1/a^2 (as the
/// system q = 1/tau', q' = 8U, dU/dt = (dU/dtau) / q) until tau = tau_f,
/// located on the dense output to 1e-12 relative. Then samples the solution
/// on `samples` uniform times. Throws NumericalError("integrator_fault") if
/// tau' leaves (0, 1/a^2] while U > 0, NumericalError("escape_bound") if
/// tau drops below escape_bound, NumericalError("no_arrival") if tau_f is not
/// reached before the bound's arrival time, NumericalError("shape_collapse")
/// if f reaches zero.
ShapeLaw synthesize_shape(const ControlProfile& profile, double a, int samples = 4097);

/// `inner` up to `end`, then frozen at inner.value(end) with zero derivatives.
SideLaw hold_after(const SideLaw& inner, double end);

/// CSV with columns t,tau,tau_prime,f,f_prime,f_second.
void write_shape_csv(std::ostream& out, const ShapeLaw& shape);
/// Reads the CSV back as a side law held after its last time (the sampled
/// derivatives are used directly, not recomputed by differencing).
SideLaw read_shape_csv(std::istream& in, double* T = nullptr);

/// Reads `tau,V` samples; V is linearly interpolated and tau_f is the last
/// sample time.
struct SampledPotential {
  std::vector<double> tau;
  std::vector<double> V;
  double operator()(double t) const;
  double tau_f() const { return tau.back(); }
};
SampledPotential read_potential_csv(std::istream& in);

/// i dw/dtau = (-d^2/dy^2 + V(tau) y^2) w in the sine basis of (0,1), from
/// tau = 0 to tau_end, by the exponential midpoint rule with steps <= dtau.
Eigen::VectorXcd propagate_1d(const Eigen::VectorXcd& initial, const std::function<double(double)>& V,
                              double tau_end, double dtau);
Eigen::VectorXcd propagate_1d(const Eigen::VectorXcd& initial, const ControlProfile& profile, double dtau);

/// Smallest t = k * step, step = pi delta / (2 max lambda), t <= t_max, with
/// |exp(-i lambda_j t + i current_j) - exp(i target_j)| < delta for every j.
std::optional<double> phase_wait_time(const std::vector<double>& energies, const std::vector<double>& current,
                                      const std::vector<double>& target, double delta, double t_max);

}  // namespace boxctl
