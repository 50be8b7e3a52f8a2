// End-to-end acceptance run. Prints one PASS/FAIL line per criterion, with
// the measured numbers underneath. Exits 0 unless --strict is given and a
// criterion fails, so ctest records the run while the report keeps the
// failures visible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boxctl/control.hpp"
#include "boxctl/error.hpp"
#include "boxctl/evolution.hpp"
#include "boxctl/kernels.hpp"
#include "boxctl/permutation.hpp"
#include "boxctl/protocols.hpp"
#include "boxctl/sah2.hpp"
#include "boxctl/spectrum.hpp"

using namespace boxctl;

namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

struct Report {
  int failed = 0;
  double worst_drift = 0.0;  // over every propagation in the run
  std::string worst_drift_run;

  void note(const char* fmt, auto... args) {
    std::printf("    ");
    std::printf(fmt, args...);
    std::printf("\n");
  }
  void drift(double d, const std::string& run) {
    if (d > worst_drift) {
      worst_drift = d;
      worst_drift_run = run;
    }
  }
  void verdict(const std::string& id, const std::string& what, bool ok, double seconds) {
    std::printf("%s %s %s (%.1f s)\n", ok ? "PASS" : "FAIL", id.c_str(), what.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failed;
  }
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

// Runs one criterion; any exception is a failure with its message.
void criterion(Report& rep, const std::string& id, const std::string& what, const std::function<bool()>& body) {
  Timer t;
  bool ok = false;
  try {
    ok = body();
  } catch (const NumericalError& e) {
    rep.note("numerical error [%s]: %s", e.code().c_str(), e.what());
  } catch (const std::exception& e) {
    rep.note("error: %s", e.what());
  }
  rep.verdict(id, what, ok, t.seconds());
}

bool monotone_up(const std::vector<double>& v, double noise) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] - noise) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  bool strict = false;
  std::set<std::string> only;
  app.add_flag("--strict", strict, "exit 1 when a criterion fails");
  app.add_option("--only", only, "run only these criteria (C1 .. C9)");
  CLI11_PARSE(app, argc, argv);
  kernels::configure_threads_from_env();
  auto wanted = [&](const std::string& id) { return only.empty() || only.count(id) > 0; };

  Report rep;
  const double a_pump = kPi / 2;

  if (wanted("C1") || wanted("C2")) {
    Timer build;
    const SigmaTable table = build_sigma(a_pump, a_pump / 3.0, 370800);
    std::printf("    sigma table for a = pi/2, a~ = a/3: K = %zu, valid_to = %zu, built in %.1f s\n", table.size(),
                table.valid_to, build.seconds());

    if (wanted("C1"))
      criterion(rep, "C1", "mean entropy increase at K = 1e5 and its large-K limit", [&] {
        const double dE = mean_entropy_increase(table, 100000);
        const EntropyPrediction p = entropy_integral(a_pump, a_pump / 3.0);
        rep.note("delta_E(1e5) = %.7f, reference 0.28713, |diff| = %.2e (tolerance 5e-4)", dE, std::abs(dE - 0.28713));
        rep.note("entropy integral = %.7f (closed form %.7f), reference 0.28768, |diff| = %.2e (tolerance 1e-4)",
                 p.quadrature, p.closed_form, std::abs(p.quadrature - 0.28768));
        return std::abs(dE - 0.28713) <= 5e-4 && std::abs(p.quadrature - 0.28768) <= 1e-4;
      });

    if (wanted("C2"))
      criterion(rep, "C2", "periodic orbits through starts <= 1e5, period <= 30", [&] {
        if (table.valid_to < 370800) rep.note("valid_to %zu below the required 370800", table.valid_to);
        const auto cycles = find_periodic_orbits(table, 100000, 30);
        std::size_t long_ones = 0;
        for (const auto& c : cycles) {
          std::string s;
          for (auto k : c) s += (s.empty() ? "" : " ") + std::to_string(k);
          rep.note("cycle (%s)", s.c_str());
          if (c.size() > 2) ++long_ones;
        }
        const std::vector<std::uint64_t> c5{19, 44, 110, 39, 52}, c6{528, 1491, 1429, 2152, 3969, 1407};
        const bool has5 = std::find(cycles.begin(), cycles.end(), c5) != cycles.end();
        const bool has6 = std::find(cycles.begin(), cycles.end(), c6) != cycles.end();
        rep.note("%zu cycles (expected 9), %zu of period > 2 (expected 2); (19 44 110 39 52) %s; "
                 "(528 1491 1429 2152 3969 1407) %s",
                 cycles.size(), long_ones, has5 ? "found" : "missing", has6 ? "found" : "missing");
        for (std::uint64_t s : {19u, 528u}) {
          const OrbitRecord r = iterate_orbit(table, s, 60);
          rep.note("orbit from %llu: %s after %zu steps", static_cast<unsigned long long>(s), to_string(r.status).c_str(),
                   r.trajectory.size() - 1);
        }
        return table.valid_to >= 370800 && cycles.size() == 9 && long_ones == 2 && has5 && has6;
      });
  }

  if (wanted("C3"))
    criterion(rep, "C3", "reciprocal boxes: sigma is an involution swapping quantum numbers", [&] {
      const std::size_t K = 100000;
      const SigmaTable t = build_sigma(a_pump, 1.0 / a_pump, K);
      const SpectrumIndex index = build_index(Rect(a_pump, 1.0), K);
      std::size_t certified = 0, involution_bad = 0, swap_bad = 0;
      for (std::size_t k = 1; k <= t.valid_to; ++k) {
        const std::size_t s = t(k);
        if (s > t.valid_to) continue;
        ++certified;
        if (t(s) != k) ++involution_bad;
        const Mode mn = t.modes[k - 1];
        const auto swapped = index.rank_of({mn.n, mn.m});
        if (!swapped || *swapped != s) ++swap_bad;
      }
      rep.note("%zu certified ranks; sigma^2 != id at %zu, sigma(k(m,n)) != k(n,m) at %zu", certified, involution_bad,
               swap_bad);
      return certified > K / 2 && involution_bad == 0 && swap_bad == 0;
    });

  if (wanted("C4"))
    criterion(rep, "C4", "boundary functional table at k = (3,1), l = (1,2), b = 1", [&] {
      const Sah2Report r = verify_table({3, 1}, {1, 2}, 1.0, 1e-8);
      rep.note("a = %.12f (sqrt(8/3) = %.12f), worst closed-form error %.2e over 15 entries", r.a, std::sqrt(8.0 / 3.0),
               r.closed_form_errors.maxCoeff());
      for (const auto& m : r.mismatches) rep.note("mismatch: %s", m.c_str());
      rep.note("rank over g1..g4 = %d, rel1 ratios %.6f vs %.6f (%s)", r.rank_g1_to_g4, r.ratio_g1, r.ratio_g2,
               r.rel1_holds ? "distinct" : "equal");
      return r.passed();
    });

  ProtocolSettings base;  // N = 24 per axis, dt = 0.0025, seed 1
  const double strength = 20.0;

  if (wanted("C5"))
    criterion(rep, "C5", "adiabatic order of a rectangular sweep pi/2 -> 1.2 from (2,1)", [&] {
      std::vector<double> pop, phase;
      for (double eps : {0.1, 0.05, 0.025}) {
        const AdiabaticSweepResult r = adiabatic_sweep(a_pump, 1.2, 1.0, {2, 1}, eps, base);
        rep.drift(r.max_norm_drift, "adiabatic eps=" + std::to_string(eps));
        rep.note("eps = %.3f: population error %.3e, phase error %.3e, gauge-frame error %.1e", eps, r.population_error,
                 r.phase_error, r.gauge_frame_error);
        pop.push_back(r.population_error);
        phase.push_back(r.phase_error);
      }
      bool ok = true;
      for (std::size_t i = 1; i < pop.size(); ++i) {
        const double rp = pop[i] / pop[i - 1], rf = phase[i] / phase[i - 1];
        rep.note("halving %zu: population ratio %.3f, phase ratio %.3f (required in [0.3, 0.7])", i, rp, rf);
        ok = ok && rp >= 0.3 && rp <= 0.7 && rf >= 0.3 && rf <= 0.7;
      }
      return ok;
    });

  if (wanted("C6"))
    criterion(rep, "C6", "pumping (2,1) -> (1,2) through a' = 0.8", [&] {
      const std::vector<double> speeds{0.32, 0.16, 0.08, 0.04, 0.02};
      std::vector<double> on, off;
      for (double v : speeds) {
        const ProtocolResult r_on = run_pumping(1.2, 0.8, 1.0, {2, 1}, v, strength, base);
        const ProtocolResult r_off = run_pumping(1.2, 0.8, 1.0, {2, 1}, v, 0.0, base);
        rep.drift(r_on.max_norm_drift, "pump on v=" + std::to_string(v));
        rep.drift(r_off.max_norm_drift, "pump off v=" + std::to_string(v));
        on.push_back(r_on.population({1, 2}));
        off.push_back(r_off.population({2, 1}));
        rep.note("speed %.2f: breaker on -> p(1,2) = %.6f; breaker off -> p(2,1) = %.9f", v, on.back(), off.back());
        for (const auto& w : r_on.warnings) rep.note("warning: %s", w.c_str());
      }
      // Time-step refinement of the slowest breaker-on run.
      const RefinedRun refined = refine_time_step(
          [&](const ProtocolSettings& s) { return run_pumping(1.2, 0.8, 1.0, {2, 1}, speeds.back(), strength, s); }, base,
          1e-6, 3);
      std::string changes;
      for (double c : refined.changes) changes += " " + std::to_string(c);
      rep.note("dt refinement at speed %.2f: changes%s, %s at dt = %g, p(1,2) = %.6f", speeds.back(), changes.c_str(),
               refined.converged ? "converged" : "not converged", refined.dt, refined.result.population({1, 2}));
      // Galerkin doubling at a coarser step (same dt for both sizes).
      ProtocolSettings coarse = base, doubled = base;
      coarse.dt = doubled.dt = 0.005;
      doubled.n1 = doubled.n2 = 48;
      const ProtocolResult n24 = run_pumping(1.2, 0.8, 1.0, {2, 1}, speeds.back(), strength, coarse);
      const ProtocolResult n48 = run_pumping(1.2, 0.8, 1.0, {2, 1}, speeds.back(), strength, doubled);
      const double galerkin = max_population_change(n24, n48);
      rep.note("basis 24 -> 48 at dt 0.005: largest population change %.2e (required < 1e-4)", galerkin);
      const bool mono_on = monotone_up(on, 1e-9), mono_off = monotone_up(off, 1e-9);
      rep.note("monotone in decreasing speed: breaker on %s, breaker off %s (noise allowance 1e-9)", mono_on ? "yes" : "no",
               mono_off ? "yes" : "no");
      return mono_on && mono_off && on.back() > 0.9 && off.back() > 0.9 && galerkin < 1e-4;
    });

  if (wanted("C7"))
    criterion(rep, "C7", "splitting (2,1) evenly onto (2,1) and (1,2)", [&] {
      const SplitResult s = find_split_speed(1.2, 0.8, 1.0, {2, 1}, 1.0 / std::sqrt(2.0), 0.01, 0.02, strength, base);
      rep.note("breaker scale s = %.6f after %zu probes: p(1,2) = %.4f, p(2,1) = %.4f", s.s, s.probes.size(),
               s.tracked_population, s.start_population);
      return std::abs(s.tracked_population - 0.5) <= 0.05 && std::abs(s.start_population - 0.5) <= 0.05;
    });

  if (wanted("C8"))
    criterion(rep, "C8", "control synthesis against closed forms and the escape bound", [&] {
      const double a = 1.2, U0 = 0.25, tau_f = 0.6;
      const ShapeLaw c = synthesize_shape({[&](double) { return -4 * U0 * U0; }, tau_f, U0, PotentialLaw::riccati}, a);
      double f_err = 0.0, bound_gap = 0.0;
      for (std::size_t i = 0; i < c.t.size(); ++i) {
        f_err = std::max(f_err, std::abs(c.f[i] - std::sqrt(a * a + 8 * U0 * c.t[i])));
        bound_gap = std::min(bound_gap, c.tau[i] - escape_bound(c.t[i], a, U0));
      }
      rep.note("constant U = %.2f: max |f - sqrt(a^2 + 8 U0 t)| = %.2e; tau - bound >= %.1e (equality case)", U0, f_err,
               bound_gap);

      auto V = [](double t) { return -2.0 + std::sin(3.0 * t); };
      const double tf = 1.0;
      const double U0v = select_U0(V, tf, PotentialLaw::riccati);
      const ShapeLaw s = synthesize_shape({V, tf, U0v, PotentialLaw::riccati}, a);
      std::size_t below = 0;
      for (std::size_t i = 0; i < s.t.size(); ++i)
        if (s.tau[i] < escape_bound(s.t[i], a, s.max_abs_U)) ++below;
      const double h = s.t[1] - s.t[0];
      auto g = [&](std::size_t i) { return 1 / (s.f[i] * s.f[i]); };
      double tau = 0.0, tau_err = 0.0;
      for (std::size_t i = 2; i < s.t.size(); i += 2) {
        tau += h / 3 * (g(i - 2) + 4 * g(i - 1) + g(i));
        tau_err = std::max(tau_err, std::abs(tau - s.tau[i]));
      }
      rep.note("V = -2 + sin 3tau, tau_f = %.1f: U0 = %.5f, T = %.4f, escape margin %.3e, grid points below bound %zu",
               tf, U0v, s.T, s.escape_margin, below);
      rep.note("tau = int f^-2 (Simpson on %zu samples) reproduced to %.2e", s.t.size(), tau_err);
      return f_err < 1e-6 && bound_gap > -1e-12 && below == 0 && tau_err < 1e-6;
    });

  if (wanted("C9"))
    criterion(rep, "C9", "decoupling of the axes and unitarity of every run", [&] {
      auto V = [](double t) { return -2.0 + std::sin(3.0 * t); };
      const double a = 1.2, b = 1.0, tf = 1.0;
      const ShapeLaw s = synthesize_shape({V, tf, select_U0(V, tf, PotentialLaw::riccati), PotentialLaw::riccati}, a);
      const DeformationPath path{s.side_law(), SideLaw::constant(b), 0.0, s.T};
      Eigen::VectorXcd u1 = Eigen::VectorXcd::Zero(24), u2 = Eigen::VectorXcd::Zero(4);
      u1(0) = 0.6;
      u1(1) = Complex(0.0, 0.64);
      u1(2) = 0.48;
      u2(0) = 0.8;
      u2(1) = Complex(0.36, 0.48);
      // f is small early on, so a uniform step must resolve that phase.
      const double dt = s.T / 80000;
      const PropagationResult r2d = propagate(WaveState{u1 * u2.transpose()}, path, dt);
      rep.drift(r2d.max_norm_drift, "decoupling 2D");
      Eigen::VectorXcd v1 = propagate_1d(u1, V, tf, tf / 20000);
      Eigen::VectorXcd v2 = u2;
      for (int n = 1; n <= 4; ++n) v2(n - 1) *= std::polar(1.0, -kPi * kPi * n * n * s.T / (b * b));
      const double diff = (v1 * v2.transpose() - r2d.state.coeffs).cwiseAbs().maxCoeff();
      rep.note("synthesized horizontal law, T = %.4f, %zu steps: max |2D - 1D (x) 1D| = %.2e (required < 1e-6)", s.T,
               r2d.steps, diff);
      rep.note("largest norm drift over all runs: %.2e in '%s' (required < 1e-8)", rep.worst_drift,
               rep.worst_drift_run.c_str());
      return diff < 1e-6 && rep.worst_drift < 1e-8;
    });

  std::printf("%d criterion(s) failed\n", rep.failed);
  return strict && rep.failed > 0 ? 1 : 0;
}
