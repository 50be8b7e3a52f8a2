#include "boxctl/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace boxctl {

namespace {

void check_basis(const ProtocolSettings& s, Mode start) {
  if (s.n1 < 2 || s.n2 < 2) throw UsageError("protocol: basis sizes must be >= 2");
  if (!(s.dt > 0.0)) throw UsageError("protocol: dt must be positive");
  if (start.m < 1 || start.n < 1 || start.m > s.n1 || start.n > s.n2)
    throw UsageError("protocol: start mode outside the basis");
}

double sweep_duration(double a, double a_prime, double speed) {
  if (!(speed > 0.0)) throw UsageError("protocol: speed must be positive");
  if (a == a_prime) throw UsageError("protocol: a and a_prime must differ");
  return std::abs(a_prime - a) / speed;
}

std::vector<Mode> low_modes(int top) {
  std::vector<Mode> modes;
  for (int m = 1; m <= top; ++m)
    for (int n = 1; n <= top; ++n) modes.push_back({m, n});
  return modes;
}

void accumulate(ProtocolResult& r, const PropagationResult& p, double duration) {
  r.duration += duration;
  r.steps += p.steps;
  r.max_norm_drift = std::max(r.max_norm_drift, p.max_norm_drift);
  r.max_tail = std::max(r.max_tail, p.max_tail);
}

PropagateOptions options_for(const ProtocolSettings& s) {
  PropagateOptions o;
  o.parallel = s.parallel;
  return o;
}

void check_coupling(const SymmetryBreaker& w, Mode p, Mode q, std::vector<std::string>& warnings) {
  const int n1 = w.n1();
  const double c = w.potential_coeffs()((p.m - 1) + n1 * (p.n - 1), (q.m - 1) + n1 * (q.n - 1));
  if (std::abs(c) < 1e-6)
    warnings.push_back("breaker couples the crossing pair only weakly (|<p|W|q>| = " + std::to_string(std::abs(c)) +
                       "); choose another seed");
}

}  // namespace

double ProtocolResult::population(Mode k) const {
  double p = 0.0;
  for (const auto& mp : populations)
    if (mp.mode == k) p += mp.population;
  return p;
}

std::vector<ModePopulation> eigenbasis_populations(const WaveState& state, const DeformationPath& path, double t,
                                                   const SymmetryBreaker* breaker, double breaker_scale) {
  const int n1 = state.n1();
  const int n2 = state.n2();
  const Rect rect = path.rect_at(t);
  const Eigen::MatrixXcd amp = physical_amplitudes(state, rect, path.horizontal.rate(t), path.vertical.rate(t));
  // The physical Hamiltonian at rest is diag(lambda) plus the breaker.
  const DeformationPath frozen = DeformationPath::stationary(rect.a(), rect.b(), 0.0, 1.0);
  const Eigen::MatrixXd H = assemble_hamiltonian(frozen, 0.0, n1, n2, breaker, breaker_scale);
  const int dim = n1 * n2;
  Eigen::Map<const Eigen::VectorXcd> v(amp.data(), dim);
  std::vector<ModePopulation> out;
  auto label = [n1](Eigen::Index i) { return Mode{static_cast<int>(i % n1) + 1, static_cast<int>(i / n1) + 1}; };
  const bool diagonal = (H - Eigen::MatrixXd(H.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (diagonal) {
    for (Eigen::Index i = 0; i < dim; ++i) out.push_back({label(i), std::norm(v(i))});
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolver", "eigenbasis_populations: eigensolver failed");
    const Eigen::VectorXcd proj = eig.eigenvectors().transpose().cast<std::complex<double>>() * v;
    for (Eigen::Index j = 0; j < dim; ++j) {
      Eigen::Index dominant = 0;
      eig.eigenvectors().col(j).cwiseAbs().maxCoeff(&dominant);
      out.push_back({label(dominant), std::norm(proj(j))});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ModePopulation& x, const ModePopulation& y) { return x.population > y.population; });
  return out;
}

Mode rank_partner(double a, double a_prime, double b, Mode start) {
  const SpectrumIndex initial = build_index_to_energy(Rect(a, b), 1.01 * mode_energy(a, b, start));
  const auto rank = initial.rank_of(start);
  if (!rank) throw UsageError("rank_partner: start mode not found");
  if (initial.has_tie_up_to(*rank)) throw NumericalError("tie_in_index", "rank_partner: degenerate start spectrum");
  const SpectrumIndex final_index = build_index(Rect(a_prime, b), *rank);
  if (final_index.has_tie_up_to(*rank)) throw NumericalError("tie_in_index", "rank_partner: degenerate final spectrum");
  return final_index.mode_of(*rank);
}

ProtocolResult run_sweep(double a, double a_prime, double b, Mode start, double speed, double breaker_strength,
                         const ProtocolSettings& settings) {
  check_basis(settings, start);
  const double T = sweep_duration(a, a_prime, speed);
  const DeformationPath path = DeformationPath::smoothstep(a, a_prime, b, b, 0.0, T);
  ProtocolResult r;
  r.crossings = crossing_times(path, low_modes(4), 0.0, T).crossings;
  std::unique_ptr<SymmetryBreaker> breaker;
  BreakerDrive drive;
  if (breaker_strength != 0.0) {
    breaker = std::make_unique<SymmetryBreaker>(settings.n1, settings.n2, breaker_strength, settings.seed);
    drive = {breaker.get(), smooth_bump(0.0, T)};
    check_coupling(*breaker, start, rank_partner(a, a_prime, b, start), r.warnings);
  }
  const PropagationResult p = propagate(WaveState::basis(settings.n1, settings.n2, start), path, settings.dt, drive,
                                        options_for(settings));
  accumulate(r, p, T);
  r.final_state = p.state;
  r.populations = eigenbasis_populations(p.state, path, T, breaker.get(), drive.at(T));
  return r;
}

ProtocolResult run_pumping(double a, double a_prime, double b, Mode start, double speed, double breaker_strength,
                           const ProtocolSettings& settings) {
  if (start == Mode{1, 1}) throw UsageError("run_pumping: the ground state (1,1) never crosses; pick another mode");
  check_basis(settings, start);
  const double T = sweep_duration(a, a_prime, speed);
  ProtocolResult r;

  const DeformationPath out = DeformationPath::smoothstep(a, a_prime, b, b, 0.0, T);
  const CrossingScan scan = crossing_times(out, low_modes(4), 0.0, T);
  r.crossings = scan.crossings;
  r.warnings = scan.warnings;
  const bool crosses = std::any_of(r.crossings.begin(), r.crossings.end(),
                                   [&](const Crossing& c) { return c.first == start || c.second == start; });
  if (!crosses) r.warnings.push_back("no level crossing involves the start mode; the protocol is a no-op");

  const PropagationResult leg1 =
      propagate(WaveState::basis(settings.n1, settings.n2, start), out, settings.dt, {}, options_for(settings));
  accumulate(r, leg1, T);

  const DeformationPath back = DeformationPath::smoothstep(a_prime, a, b, b, T, 2.0 * T);
  std::unique_ptr<SymmetryBreaker> breaker;
  BreakerDrive drive;
  if (breaker_strength != 0.0) {
    breaker = std::make_unique<SymmetryBreaker>(settings.n1, settings.n2, breaker_strength, settings.seed);
    drive = {breaker.get(), smooth_bump(T, 2.0 * T)};
    check_coupling(*breaker, start, rank_partner(a, a_prime, b, start), r.warnings);
  }
  const PropagationResult leg2 = propagate(leg1.state, back, settings.dt, drive, options_for(settings));
  accumulate(r, leg2, T);
  r.final_state = leg2.state;
  r.populations = eigenbasis_populations(leg2.state, back, 2.0 * T, breaker.get(), drive.at(2.0 * T));
  return r;
}

double max_population_change(const ProtocolResult& x, const ProtocolResult& y) {
  double worst = 0.0;
  for (const auto* r : {&x, &y})
    for (const auto& mp : r->populations) worst = std::max(worst, std::abs(x.population(mp.mode) - y.population(mp.mode)));
  return worst;
}

RefinedRun refine_time_step(const std::function<ProtocolResult(const ProtocolSettings&)>& run,
                            ProtocolSettings settings, double tol, int max_halvings) {
  if (!(tol > 0.0)) throw UsageError("refine_time_step: tol must be positive");
  if (max_halvings < 1) throw UsageError("refine_time_step: max_halvings must be >= 1");
  RefinedRun out;
  out.result = run(settings);
  out.dt = settings.dt;
  for (int h = 0; h < max_halvings; ++h) {
    settings.dt *= 0.5;
    ProtocolResult finer = run(settings);
    const double change = max_population_change(out.result, finer);
    out.changes.push_back(change);
    out.result = std::move(finer);
    out.dt = settings.dt;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

SplitResult find_split_speed(double a, double a_prime, double b, Mode start, double target_alpha, double tol,
                             double speed, double breaker_strength, const ProtocolSettings& settings) {
  if (!(target_alpha >= 0.0 && target_alpha <= 1.0)) throw UsageError("find_split_speed: target_alpha must be in [0,1]");
  if (!(tol > 0.0)) throw UsageError("find_split_speed: tol must be positive");
  if (breaker_strength == 0.0) throw UsageError("find_split_speed: breaker_strength must be nonzero");
  SplitResult res;
  res.start = start;
  res.tracked = rank_partner(a, a_prime, b, start);
  if (res.tracked == start)
    throw UsageError("find_split_speed: the start mode keeps its rank; there is nothing to split");
  const double goal = target_alpha * target_alpha;

  auto probe = [&](double s) {
    const ProtocolResult r = run_sweep(a, a_prime, b, start, speed, s * breaker_strength, settings);
    res.probes.push_back({s, r.population(res.tracked)});
    return std::pair{r.population(res.tracked), r.population(start)};
  };
  auto finish = [&](double s, std::pair<double, double> p) {
    res.s = s;
    res.tracked_population = p.first;
    res.start_population = p.second;
    return res;
  };

  const auto hi = probe(1.0);
  if (std::abs(hi.first - goal) <= tol) return finish(1.0, hi);
  const auto lo = probe(0.0);
  if (std::abs(lo.first - goal) <= tol) return finish(0.0, lo);
  if ((lo.first - goal) * (hi.first - goal) > 0.0)
    throw NumericalError("no_bracket", "find_split_speed: tracked population " + std::to_string(lo.first) + " (s=0) and " +
                                           std::to_string(hi.first) + " (s=1) do not straddle " +
                                           std::to_string(goal) + "; the speed is not in the tunnelling regime");
  double s_lo = 0.0, s_hi = 1.0;
  const bool rising = hi.first > lo.first;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (s_lo + s_hi);
    const auto p = probe(mid);
    if (std::abs(p.first - goal) <= tol) return finish(mid, p);
    ((p.first < goal) == rising ? s_lo : s_hi) = mid;
  }
  throw NumericalError("no_convergence", "find_split_speed: bisection did not reach the tolerance");
}

AdiabaticSweepResult adiabatic_sweep(double a0, double a1, double b, Mode mode, double eps,
                                     const ProtocolSettings& settings) {
  check_basis(settings, mode);
  if (!(eps > 0.0)) throw UsageError("adiabatic_sweep: eps must be positive");
  if (a0 == a1) throw UsageError("adiabatic_sweep: a0 and a1 must differ");
  const double T = 1.0 / eps;
  const DeformationPath path = DeformationPath::linear(a0, a1, b, b, 0.0, T);
  const double v = (a1 - a0) / T;
  const Rect r0(a0, b), r1(a1, b);

  Eigen::MatrixXcd target = Eigen::MatrixXcd::Zero(settings.n1, settings.n2);
  target(mode.m - 1, mode.n - 1) = 1.0;
  const WaveState w0 = gauge_from_physical(target, r0, v, 0.0);

  const PropagationResult p = propagate(w0, path, settings.dt, {}, options_for(settings));

  AdiabaticSweepResult out;
  out.eps = eps;
  out.max_norm_drift = p.max_norm_drift;
  out.initial_amplitude = physical_amplitudes(w0, r0, v, 0.0)(mode.m - 1, mode.n - 1);
  out.final_amplitude = physical_amplitudes(p.state, r1, v, 0.0)(mode.m - 1, mode.n - 1);
  // int_0^T lambda dt for f = a0 + v t.
  const double pi2 = std::numbers::pi * std::numbers::pi;
  out.dynamic_phase = pi2 * mode.m * mode.m * (1.0 / a0 - 1.0 / a1) / v + pi2 * mode.n * mode.n / (b * b) * T;
  const std::complex<double> expected = out.initial_amplitude * std::polar(1.0, -out.dynamic_phase);
  out.population_error = std::abs(std::abs(out.final_amplitude) - std::abs(out.initial_amplitude));
  out.phase_error = std::abs(std::arg(out.final_amplitude / expected));
  out.amplitude_error = std::abs(out.final_amplitude - expected);
  out.gauge_frame_error =
      std::abs(std::abs(p.state.coeffs(mode.m - 1, mode.n - 1)) - std::abs(w0.coeffs(mode.m - 1, mode.n - 1)));
  return out;
}

}  // namespace boxctl
