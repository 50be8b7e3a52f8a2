#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "boxctl/evolution.hpp"
#include "boxctl/spectrum.hpp"

namespace boxctl {

struct ProtocolSettings {
  int n1 = 24;
  int n2 = 24;
  double dt = 0.0025;
  std::uint64_t seed = 1;
  bool parallel = true;
};

struct ModePopulation {
  Mode mode;  // dominant basis mode of the eigenvector
  double population = 0.0;
};

struct ProtocolResult {
  /// Populations on the eigenvectors of the final Hamiltonian, each labelled
  /// by its dominant mode, largest first.
  std::vector<ModePopulation> populations;
  std::vector<Crossing> crossings;
  std::vector<std::string> warnings;
  double duration = 0.0;
  std::size_t steps = 0;
  double max_norm_drift = 0.0;
  double max_tail = 0.0;
  WaveState final_state;

  double population(Mode k) const;
};

/// Populations of `state` on the eigenvectors of H(path, t) (breaker scale
/// `breaker_scale`), after mapping w to physical amplitudes.
std::vector<ModePopulation> eigenbasis_populations(const WaveState& state, const DeformationPath& path, double t,
                                                   const SymmetryBreaker* breaker, double breaker_scale);

/// One smoothstep sweep of the horizontal side a -> a_prime (vertical side b
/// fixed) lasting |a_prime - a| / speed, starting from mode `start`. The
/// breaker, if strength != 0, is switched on by a smooth bump over the sweep.
ProtocolResult run_sweep(double a, double a_prime, double b, Mode start, double speed, double breaker_strength,
                         const ProtocolSettings& settings = {});

/// a -> a_prime with the breaker off, then a_prime -> a with the breaker
/// switched on by a smooth bump. With breaker_strength = 0 both legs are
/// rectangular. Throws UsageError for start = (1,1).
ProtocolResult run_pumping(double a, double a_prime, double b, Mode start, double speed, double breaker_strength,
                           const ProtocolSettings& settings = {});

struct RefinedRun {
  ProtocolResult result;
  double dt = 0.0;                 // step of the accepted run
  std::vector<double> changes;     // max population change per halving
  bool converged = false;
};

/// Runs `run` at settings.dt, then halves dt until the largest change of any
/// labelled population between consecutive runs is below tol, at most
/// max_halvings times. `converged` is false when the budget ran out.
RefinedRun refine_time_step(const std::function<ProtocolResult(const ProtocolSettings&)>& run,
                            ProtocolSettings settings, double tol = 1e-6, int max_halvings = 4);

/// Largest |p_x(k) - p_y(k)| over the modes labelled in either result.
double max_population_change(const ProtocolResult& x, const ProtocolResult& y);

/// Mode holding the rank of `start` in the (a_prime x b) box.
Mode rank_partner(double a, double a_prime, double b, Mode start);

struct SplitProbe {
  double s = 0.0;
  double tracked_population = 0.0;
};

struct SplitResult {
  double s = 0.0;  // breaker scale in [0, 1]
  Mode start;
  Mode tracked;    // rank_partner(a, a_prime, b, start)
  double tracked_population = 0.0;
  double start_population = 0.0;
  std::vector<SplitProbe> probes;
};

/// Bisects the breaker scale s of a single sweep (run_sweep with strength
/// s * breaker_strength) until the population on the tracked mode is within
/// tol of target_alpha^2. s = 1 follows the rank, s = 0 keeps the quantum
/// numbers. Throws NumericalError("no_bracket") if the two endpoints do not
/// straddle the target.
SplitResult find_split_speed(double a, double a_prime, double b, Mode start, double target_alpha, double tol,
                             double speed, double breaker_strength, const ProtocolSettings& settings = {});

struct AdiabaticSweepResult {
  double eps = 0.0;
  std::complex<double> initial_amplitude;
  std::complex<double> final_amplitude;
  double dynamic_phase = 0.0;       // Lambda(1) / eps
  double population_error = 0.0;    // | |final| - |initial| |
  double phase_error = 0.0;         // |arg(final / initial * exp(i Lambda / eps))|
  double amplitude_error = 0.0;     // |final - initial * exp(-i Lambda / eps)|
  double gauge_frame_error = 0.0;   // same as population_error for w itself
  double max_norm_drift = 0.0;
};

/// Linear sweep a0 -> a1 of the horizontal side over t in [0, 1/eps] starting
/// from the physical mode `mode`; compares the final physical amplitude of
/// that mode with exp(-i Lambda(1) / eps), Lambda(tau) = int_0^tau lambda.
AdiabaticSweepResult adiabatic_sweep(double a0, double a1, double b, Mode mode, double eps,
                                     const ProtocolSettings& settings = {});

}  // namespace boxctl
