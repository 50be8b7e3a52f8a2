#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "boxctl/control.hpp"
#include "boxctl/error.hpp"
#include "boxctl/evolution.hpp"
#include "boxctl/kernels.hpp"
#include "boxctl/permutation.hpp"
#include "boxctl/protocols.hpp"
#include "boxctl/sah2.hpp"
#include "boxctl/spectrum.hpp"
#include "manifest.hpp"
#include "run_config.hpp"

namespace boxctl::cli {

namespace {

namespace fs = std::filesystem;

json mode_json(Mode k) { return json::array({k.m, k.n}); }

template <class Matrix>
json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json crossings_json(const std::vector<Crossing>& crossings) {
  json list = json::array();
  for (const auto& c : crossings)
    list.push_back({{"t", c.t}, {"first", mode_json(c.first)}, {"second", mode_json(c.second)}, {"energy", c.energy}});
  return list;
}

/// Options shared by every subcommand.
struct Output {
  std::string out;
  std::string manifest;

  void add(CLI::App* cmd, const std::string& default_out) {
    out = default_out;
    cmd->add_option("--out", out, "CSV output path")->capture_default_str();
    cmd->add_option("--manifest", manifest, "manifest path (default: <out>.manifest.json)");
  }
  fs::path manifest_path() const {
    if (!manifest.empty()) return manifest;
    if (!out.empty()) return out + ".manifest.json";
    return {};
  }
};

struct ProtocolArgs {
  double a = 1.2;
  double a_prime = 0.8;
  double b = 1.0;
  std::string start = "2,1";
  double speed = 0.02;
  double strength = 20.0;
  std::uint64_t seed = 1;
  int n = 24;
  double dt = 0.0025;
  bool serial = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--a", a, "initial horizontal side")->capture_default_str();
    cmd->add_option("--aprime", a_prime, "turning horizontal side")->capture_default_str();
    cmd->add_option("--b", b, "vertical side")->capture_default_str();
    cmd->add_option("--start", start, "initial mode m,n")->capture_default_str();
    cmd->add_option("--speed", speed, "wall speed |da/dt|")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--strength", strength, "symmetry-breaker strength (0 disables)")->capture_default_str();
    cmd->add_option("--seed", seed, "symmetry-breaker seed")->capture_default_str();
    cmd->add_option("--n", n, "basis size per axis")->capture_default_str()->check(CLI::Range(2, 512));
    cmd->add_option("--dt", dt, "time step")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_flag("--serial", serial, "use the serial reference kernels");
  }
  ProtocolSettings settings() const { return {n, n, dt, seed, !serial}; }
  json echo() const {
    return {{"a", a},          {"aprime", a_prime},   {"b", b},   {"start", start}, {"speed", speed},
            {"strength", strength}, {"seed", seed}, {"n", n}, {"dt", dt},     {"serial", serial}};
  }
};

json populations_json(const std::vector<ModePopulation>& pops, std::size_t limit) {
  json list = json::array();
  for (std::size_t i = 0; i < pops.size() && i < limit; ++i)
    list.push_back({{"mode", mode_json(pops[i].mode)}, {"population", pops[i].population}});
  return list;
}

void write_populations(const Output& o, const std::vector<ModePopulation>& pops, Manifest& m) {
  CsvWriter csv(o.out, {"rank", "m", "n", "population"});
  for (std::size_t i = 0; i < pops.size(); ++i) csv.row(i + 1, pops[i].mode.m, pops[i].mode.n, pops[i].population);
  csv.close(m);
}

// ---- spectrum ---------------------------------------------------------

struct SpectrumArgs {
  double a = 0, b = 1, tie_tol = kDefaultTieTolerance;
  std::size_t count = 0;
  Output o;
};

void run_spectrum(const SpectrumArgs& s, Manifest& m) {
  m.config = {{"a", s.a}, {"b", s.b}, {"count", s.count}, {"tie_tol", s.tie_tol}, {"out", s.o.out}};
  const Rect rect(s.a, s.b);
  const SpectrumIndex idx = build_index(rect, s.count, s.tie_tol);
  CsvWriter csv(s.o.out, {"rank", "m", "n", "energy"});
  for (std::size_t r = 1; r <= s.count; ++r) {
    const auto& e = idx.entries()[r - 1];
    csv.row(r, e.mode.m, e.mode.n, e.energy);
  }
  csv.close(m);
  json ties = json::array();
  for (const auto& [r1, r2] : idx.tie_report()) {
    if (r1 > s.count) continue;
    const Mode k1 = idx.mode_of(r1), k2 = idx.mode_of(r2);
    ties.push_back(json::array({r1, r2}));
    m.warn("degenerate pair: rank " + std::to_string(r1) + " (" + mode_label(k1) + ") and rank " +
           std::to_string(r2) + " (" + mode_label(k2) + ") share energy " + std::to_string(idx.energy_of_rank(r1)) +
           "; their order is by (m, n)");
  }
  const double top = idx.energy_of_rank(s.count);
  m.results = {{"count", s.count},
               {"largest_energy", top},
               {"modes_at_or_below_largest", count_modes_below(rect, top)},
               {"weyl_leading_term", weyl_count(rect, top)},
               {"tie_pairs", ties}};
}

// ---- crossings --------------------------------------------------------

struct CrossingsArgs {
  std::string path_file, law = "smoothstep", modes;
  double a0 = 0, a1 = 0, b0 = 1, t0 = 0, t1 = 1;
  std::optional<double> b1;
  int max_index = 4, grid = 1024;
  Output o;
};

void run_crossings(const CrossingsArgs& s, Manifest& m) {
  json spec;
  fs::path base = fs::current_path();
  if (!s.path_file.empty()) {
    std::ifstream in(s.path_file);
    if (!in) throw UsageError("cannot open path file '" + s.path_file + "'");
    json doc = json::parse(in);
    spec = doc.contains("path") ? doc["path"] : doc;
    base = fs::absolute(s.path_file).parent_path();
  } else {
    if (s.a0 <= 0 || s.a1 <= 0) throw UsageError("crossings: give --path or --a0 and --a1");
    spec = {{"type", s.law}, {"a0", s.a0}, {"a1", s.a1}, {"b0", s.b0}, {"b1", s.b1.value_or(s.b0)},
            {"t0", s.t0},    {"t1", s.t1}};
  }
  const DeformationPath path = path_from_json(spec, base);
  std::vector<Mode> modes;
  if (!s.modes.empty()) {
    modes = parse_mode_list(s.modes);
  } else {
    for (int mm = 1; mm <= s.max_index; ++mm)
      for (int nn = 1; nn <= s.max_index; ++nn) modes.push_back({mm, nn});
  }
  json mode_list = json::array();
  for (Mode k : modes) mode_list.push_back(mode_json(k));
  m.config = {{"path", spec}, {"modes", mode_list}, {"grid", s.grid}, {"out", s.o.out}};
  const CrossingScan scan = crossing_times(path, modes, path.t_start, path.t_end, s.grid);
  CsvWriter csv(s.o.out, {"t", "m1", "n1", "m2", "n2", "energy"});
  for (const auto& c : scan.crossings) csv.row(c.t, c.first.m, c.first.n, c.second.m, c.second.n, c.energy);
  csv.close(m);
  for (const auto& w : scan.warnings) m.warn(w);
  m.results = {{"count", scan.crossings.size()}, {"crossings", crossings_json(scan.crossings)}};
}

// ---- sigma / orbit / entropy ------------------------------------------

struct SigmaArgs {
  double a = 0, a_tilde = 0, b = 1;
  std::size_t K = 0;
  Output o;
};

void run_sigma(const SigmaArgs& s, Manifest& m) {
  m.config = {{"a", s.a}, {"atilde", s.a_tilde}, {"b", s.b}, {"K", s.K}, {"out", s.o.out}};
  const SigmaTable table = build_sigma(s.a, s.a_tilde, s.K, s.b);
  {
    std::ofstream out(s.o.out);
    if (!out) throw UsageError("cannot open '" + s.o.out + "' for writing");
    write_sigma_csv(out, table);
    if (!out) throw UsageError("write to '" + s.o.out + "' failed");
  }
  m.add_file(s.o.out, table.size(), {"k", "m", "n", "sigma_k"});
  std::size_t fixed = 0;
  for (std::size_t k = 1; k <= table.size(); ++k) fixed += table(k) == k;
  m.results = {{"K", table.size()},
               {"valid_to", table.valid_to},
               {"fixed_points", fixed},
               {"delta_E", mean_entropy_increase(table, table.valid_to)}};
}

/// Table from --table, or built from (a, atilde, K).
struct TableSource {
  std::string table;
  double a = 0, a_tilde = 0, b = 1;
  std::size_t K = 0;

  void add(CLI::App* cmd, const char* k_help) {
    cmd->add_option("--table", table, "sigma table CSV written by `boxctl sigma`");
    cmd->add_option("--a", a, "horizontal side of the pumped box");
    cmd->add_option("--atilde", a_tilde, "squeezed horizontal side");
    cmd->add_option("--b", b, "vertical side")->capture_default_str();
    cmd->add_option("--K", K, k_help);
  }
  json echo() const {
    json j = {{"b", b}, {"K", K}};
    if (!table.empty()) j["table"] = fs::absolute(table).lexically_normal().string();
    if (a > 0) j["a"] = a;
    if (a_tilde > 0) j["atilde"] = a_tilde;
    return j;
  }
  SigmaTable load(std::size_t needed) const {
    if (!table.empty()) {
      std::ifstream in(table);
      if (!in) throw UsageError("cannot open table '" + table + "'");
      return read_sigma_csv(in);
    }
    if (!(a > 0) || !(a_tilde > 0)) throw UsageError("give --table or both --a and --atilde");
    const std::size_t size = std::max(K, needed);
    if (size == 0) throw UsageError("give --K to size the table");
    return build_sigma(a, a_tilde, size, b);
  }
  /// (a, atilde) from the flags or the table's manifest.
  std::optional<std::pair<double, double>> ratio_sides() const {
    if (a > 0 && a_tilde > 0) return std::pair{a, a_tilde};
    if (table.empty()) return std::nullopt;
    std::ifstream in(table + ".manifest.json");
    if (!in) return std::nullopt;
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("config")) return std::nullopt;
    const json& c = doc["config"];
    if (!c.contains("a") || !c.contains("atilde")) return std::nullopt;
    return std::pair{c["a"].get<double>(), c["atilde"].get<double>()};
  }
};

struct OrbitArgs {
  TableSource src;
  std::size_t start = 0, steps = 1000, start_max = 0, period_max = 30;
  Output o;
};

void run_orbit(const OrbitArgs& s, Manifest& m) {
  if (s.start == 0 && s.start_max == 0) throw UsageError("orbit: give --start, --start-max, or both");
  m.config = s.src.echo();
  m.config["start"] = s.start;
  m.config["steps"] = s.steps;
  m.config["start_max"] = s.start_max;
  m.config["period_max"] = s.period_max;
  m.config["out"] = s.o.out;
  const SigmaTable table = s.src.load(std::max(s.start, s.start_max));
  m.results["valid_to"] = table.valid_to;
  if (s.start > 0) {
    const OrbitRecord rec = iterate_orbit(table, s.start, s.steps);
    CsvWriter csv(s.o.out, {"j", "rank", "log10rank"});
    for (std::size_t j = 0; j < rec.trajectory.size(); ++j)
      csv.row(j, rec.trajectory[j], std::log10(static_cast<double>(rec.trajectory[j])));
    csv.close(m);
    json orbit = {{"start", rec.start},
                  {"status", to_string(rec.status)},
                  {"length", rec.trajectory.size()},
                  {"growth_rate", rec.growth_rate}};
    if (rec.status == OrbitStatus::periodic) {
      orbit["period"] = rec.period;
      orbit["cycle"] = std::vector<std::uint64_t>(rec.trajectory.begin(), rec.trajectory.end() - 1);
    }
    m.results["orbit"] = orbit;
  }
  if (s.start_max > 0) {
    const auto cycles = find_periodic_orbits(table, s.start_max, s.period_max);
    std::size_t long_cycles = 0;
    for (const auto& c : cycles) long_cycles += c.size() > 2;
    m.results["cycles"] = cycles;
    m.results["cycle_count"] = cycles.size();
    m.results["cycles_longer_than_2"] = long_cycles;
  }
}

struct EntropyArgs {
  TableSource src;
  std::string out;
  std::string manifest;
};

void run_entropy(const EntropyArgs& s, Manifest& m) {
  if (s.src.K == 0) throw UsageError("entropy: --K is required");
  m.config = s.src.echo();
  m.config["out"] = s.out;
  const SigmaTable table = s.src.load(s.src.K);
  const double dE = mean_entropy_increase(table, s.src.K);
  m.results = {{"K", s.src.K}, {"delta_E", dE}};
  if (const auto sides = s.src.ratio_sides()) {
    const EntropyPrediction p = entropy_integral(sides->first, sides->second);
    m.results["integral"] = p.quadrature;
    m.results["closed_form"] = p.closed_form;
    m.results["delta_E_minus_integral"] = dE - p.quadrature;
  } else {
    m.warn("no side lengths known for the table; the limit prediction is omitted");
  }
  if (!s.out.empty()) {
    CsvWriter csv(s.out, {"K", "delta_E"});
    for (std::size_t k = 10; k < s.src.K; k *= 10) csv.row(k, mean_entropy_increase(table, k));
    csv.row(s.src.K, dE);
    csv.close(m);
  }
}

// ---- evolve -----------------------------------------------------------

struct EvolveArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  bool serial = false;
  Output o;
};

void run_evolve(const EvolveArgs& s, Manifest& m) {
  EvolveConfig c = load_evolve_config(s.config);
  if (s.seed) {
    c.seed = *s.seed;
    c.echo["breaker"]["seed"] = c.seed;
  }
  if (s.dt) {
    if (!(*s.dt > 0.0)) throw UsageError("--dt must be positive");
    c.dt = *s.dt;
    c.echo["dt"] = c.dt;
  }
  Output o = s.o;
  if (o.out.empty()) o.out = c.output.value_or("evolve.csv");
  c.echo["output"] = o.out;
  if (c.breaker_strength != 0.0 && !c.echo["breaker"].contains("seed")) c.echo["breaker"]["seed"] = c.seed;
  m.config = c.echo;

  const DeformationPath& path = c.path;
  Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(c.n1, c.n2);
  for (const auto& [k, z] : c.initial) amp(k.m - 1, k.n - 1) += z;
  const double norm0 = amp.norm();
  if (!(norm0 > 0.0)) throw UsageError("config: initial state is zero");
  if (std::abs(norm0 - 1.0) > 1e-12) m.warn("initial amplitudes normalized (norm was " + std::to_string(norm0) + ")");
  amp /= norm0;
  const double t0 = path.t_start, t1 = path.t_end;
  WaveState w0 = c.initial_physical
                     ? gauge_from_physical(amp, path.rect_at(t0), path.horizontal.rate(t0), path.vertical.rate(t0))
                     : WaveState{amp};

  if (std::abs(w0.norm() - 1.0) > 1e-6)
    m.warn("the basis truncates the initial state (norm " + std::to_string(w0.norm()) + "); enlarge 'basis'");

  std::unique_ptr<SymmetryBreaker> breaker;
  BreakerDrive drive;
  if (c.breaker_strength != 0.0) {
    breaker = std::make_unique<SymmetryBreaker>(c.n1, c.n2, c.breaker_strength, c.seed);
    drive = {breaker.get(), c.envelope == "bump" ? smooth_bump(t0, t1) : std::function<double(double)>{}};
  }

  std::vector<std::string> columns{"t", "norm"};
  for (Mode k : c.record) columns.push_back("pop_" + mode_label(k));
  CsvWriter csv(o.out, columns);
  auto physical = [&](double t, const WaveState& w) {
    return physical_amplitudes(w, path.rect_at(t), path.horizontal.rate(t), path.vertical.rate(t));
  };
  PropagateOptions opts;
  opts.tail_threshold = c.tail_threshold;
  opts.parallel = !s.serial;
  const auto steps = static_cast<long>(std::ceil(path.duration() / c.dt - 1e-9));
  opts.observe_every = c.observe_every > 0 ? c.observe_every : static_cast<int>(std::max(1L, steps / 200));
  opts.observer = [&](double t, const WaveState& w) {
    const Eigen::MatrixXcd p = physical(t, w);
    std::vector<double> row{t, w.norm()};
    for (Mode k : c.record) row.push_back(std::norm(p(k.m - 1, k.n - 1)));
    csv.row(row);
  };
  const PropagationResult r = propagate(w0, path, c.dt, drive, opts);
  csv.close(m);

  const Eigen::MatrixXcd final_amp = physical(t1, r.state);
  json recorded = json::array();
  for (Mode k : c.record) {
    const std::complex<double> z = final_amp(k.m - 1, k.n - 1);
    recorded.push_back({{"mode", mode_json(k)}, {"population", std::norm(z)}, {"phase", std::arg(z)}});
  }
  const auto pops = eigenbasis_populations(r.state, path, t1, breaker.get(), drive.active() ? drive.at(t1) : 0.0);
  m.results = {{"steps", r.steps},
               {"dt_used", r.dt},
               {"initial_norm", w0.norm()},
               {"max_norm_drift", r.max_norm_drift},
               {"max_tail", r.max_tail},
               {"final_norm", r.state.norm()},
               {"final_populations", populations_json(pops, 10)},
               {"recorded", recorded}};
}

// ---- pump / split -----------------------------------------------------

struct PumpArgs {
  ProtocolArgs p;
  bool refine = false;
  double refine_tol = 1e-6;
  int max_halvings = 4;
  Output o;
};

void run_pump(const PumpArgs& s, Manifest& m) {
  const Mode start = parse_mode(s.p.start);
  m.config = s.p.echo();
  m.config["refine"] = s.refine;
  m.config["refine_tol"] = s.refine_tol;
  m.config["max_halvings"] = s.max_halvings;
  m.config["out"] = s.o.out;
  auto run = [&](const ProtocolSettings& st) {
    return run_pumping(s.p.a, s.p.a_prime, s.p.b, start, s.p.speed, s.p.strength, st);
  };
  ProtocolResult r;
  double dt_used = s.p.dt;
  json refinement = json::object();
  if (s.refine) {
    RefinedRun rr = refine_time_step(run, s.p.settings(), s.refine_tol, s.max_halvings);
    r = std::move(rr.result);
    dt_used = rr.dt;
    refinement = {{"changes", rr.changes}, {"converged", rr.converged}};
    if (!rr.converged) m.warn("time-step refinement did not reach the tolerance within the halving budget");
  } else {
    r = run(s.p.settings());
  }
  for (const auto& w : r.warnings) m.warn(w);
  write_populations(s.o, r.populations, m);
  const Mode partner = rank_partner(s.p.a, s.p.a_prime, s.p.b, start);
  m.results = {{"start", mode_json(start)},
               {"partner", mode_json(partner)},
               {"population_start", r.population(start)},
               {"population_partner", r.population(partner)},
               {"dt_used", dt_used},
               {"duration", r.duration},
               {"steps", r.steps},
               {"max_norm_drift", r.max_norm_drift},
               {"max_tail", r.max_tail},
               {"crossings", crossings_json(r.crossings)},
               {"final_populations", populations_json(r.populations, 10)}};
  if (s.refine) m.results["refinement"] = refinement;
}

struct SplitArgs {
  ProtocolArgs p;
  double alpha = 1.0 / std::sqrt(2.0);
  double tol = 0.05;
  Output o;
};

void run_split(const SplitArgs& s, Manifest& m) {
  const Mode start = parse_mode(s.p.start);
  m.config = s.p.echo();
  m.config["alpha"] = s.alpha;
  m.config["tol"] = s.tol;
  m.config["out"] = s.o.out;
  const SplitResult r =
      find_split_speed(s.p.a, s.p.a_prime, s.p.b, start, s.alpha, s.tol, s.p.speed, s.p.strength, s.p.settings());
  CsvWriter csv(s.o.out, {"probe", "s", "tracked_population"});
  for (std::size_t i = 0; i < r.probes.size(); ++i) csv.row(i + 1, r.probes[i].s, r.probes[i].tracked_population);
  csv.close(m);
  m.results = {{"s", r.s},
               {"start", mode_json(r.start)},
               {"tracked", mode_json(r.tracked)},
               {"tracked_population", r.tracked_population},
               {"start_population", r.start_population},
               {"probes", r.probes.size()}};
}

// ---- synthesize -------------------------------------------------------

struct SynthesizeArgs {
  std::string V;
  double a = 0;
  std::optional<double> U0;
  std::string law = "riccati";
  int samples = 4097;
  Output o;
};

void run_synthesize(const SynthesizeArgs& s, Manifest& m) {
  const PotentialLaw law = potential_law_from_string(s.law);
  std::ifstream in(s.V);
  if (!in) throw UsageError("cannot open potential file '" + s.V + "'");
  const SampledPotential V = read_potential_csv(in);
  const std::function<double(double)> Vf = V;
  const double U0 = s.U0 ? *s.U0 : select_U0(Vf, V.tau_f(), law);
  m.config = {{"V", fs::absolute(s.V).lexically_normal().string()}, {"a", s.a}, {"law", s.law},
              {"samples", s.samples}, {"out", s.o.out}};
  if (s.U0) m.config["U0"] = *s.U0;
  const ShapeLaw shape = synthesize_shape({Vf, V.tau_f(), U0, law}, s.a, s.samples);
  {
    std::ofstream out(s.o.out);
    if (!out) throw UsageError("cannot open '" + s.o.out + "' for writing");
    write_shape_csv(out, shape);
    if (!out) throw UsageError("write to '" + s.o.out + "' failed");
  }
  m.add_file(s.o.out, shape.t.size(), {"t", "tau", "tau_prime", "f", "f_prime", "f_second"});
  m.results = {{"tau_f", V.tau_f()},
               {"T", shape.T},
               {"U0", U0},
               {"U0_selected", !s.U0.has_value()},
               {"law", to_string(law)},
               {"max_abs_U", shape.max_abs_U},
               {"escape_margin", shape.escape_margin},
               {"f_final", shape.f.back()}};
}

// ---- sah2 -------------------------------------------------------------

struct Sah2Args {
  std::string k = "3,1", l = "1,2";
  double b = 1.0, tol = 1e-8;
  std::string out, manifest;
};

void run_sah2(const Sah2Args& s, Manifest& m) {
  const Mode k = parse_mode(s.k), l = parse_mode(s.l);
  m.config = {{"k", mode_json(k)}, {"l", mode_json(l)}, {"b", s.b}, {"tol", s.tol}, {"out", s.out}};
  const Sah2Report r = verify_table(k, l, s.b, s.tol);
  for (const auto& x : r.mismatches) m.warn("closed form disagrees: " + x);
  m.results = {{"k", mode_json(k)},
               {"l", mode_json(l)},
               {"a", r.a},
               {"b", r.b},
               {"rows", {"I_kk", "I_ll", "I_kl"}},
               {"columns", {"g1", "g2", "g3", "g4", "g5"}},
               {"signed_matrix", matrix_json(r.signed_matrix)},
               {"matrix", matrix_json(r.I_matrix)},
               {"closed_form", matrix_json(r.closed_form)},
               {"closed_form_relative_error", matrix_json(r.closed_form_errors)},
               {"rank_g1_to_g4", r.rank_g1_to_g4},
               {"rank_g1_to_g5", r.rank_g1_to_g5},
               {"singular_values_g1_to_g4", r.singular_values},
               {"ratio_g1", r.ratio_g1},
               {"ratio_g2", r.ratio_g2},
               {"ratios_differ", r.rel1_holds},
               {"max_quadrature_change", r.max_quadrature_change},
               {"mismatches", r.mismatches},
               {"passed", r.passed()}};
  if (!s.out.empty()) {
    static const char* rows[3] = {"I_kk", "I_ll", "I_kl"};
    CsvWriter csv(s.out, {"row", "source", "g1", "g2", "g3", "g4", "g5"});
    for (int i = 0; i < 3; ++i) {
      csv.row(rows[i], "quadrature", r.I_matrix(i, 0), r.I_matrix(i, 1), r.I_matrix(i, 2), r.I_matrix(i, 3),
              r.I_matrix(i, 4));
      csv.row(rows[i], "closed_form", r.closed_form(i, 0), r.closed_form(i, 1), r.closed_form(i, 2),
              r.closed_form(i, 3), r.closed_form(i, 4));
    }
    csv.close(m);
  }
}

json error_object(const std::string& command, const char* kind, const std::string& code, const std::string& message,
                  int status) {
  json e;
  e["schema_version"] = kManifestSchemaVersion;
  e["tool"] = "boxctl";
  e["command"] = command;
  e["exit_status"] = status;
  e["error"] = {{"kind", kind}, {"code", code}, {"message", message}};
  return e;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum box deformation toolkit: spectra, pumping permutations, Galerkin evolution, control "
               "synthesis and boundary-functional checks.",
               "boxctl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));

  SpectrumArgs spectrum;
  auto* c_spectrum = app.add_subcommand("spectrum", "energy-ordered Dirichlet modes of a rectangle");
  c_spectrum->add_option("--a", spectrum.a, "horizontal side")->required()->check(CLI::PositiveNumber);
  c_spectrum->add_option("--b", spectrum.b, "vertical side")->capture_default_str()->check(CLI::PositiveNumber);
  c_spectrum->add_option("--count", spectrum.count, "number of ranks")->required()->check(CLI::PositiveNumber);
  c_spectrum->add_option("--tie-tol", spectrum.tie_tol, "relative energy tolerance for ties")->capture_default_str();
  spectrum.o.add(c_spectrum, "spectrum.csv");

  CrossingsArgs crossings;
  auto* c_cross = app.add_subcommand("crossings", "level-crossing times along a deformation path");
  c_cross->add_option("--path", crossings.path_file, "JSON path spec (or a run config with a 'path' member)");
  c_cross->add_option("--law", crossings.law, "inline path law: linear or smoothstep")->capture_default_str();
  c_cross->add_option("--a0", crossings.a0, "inline path: initial horizontal side");
  c_cross->add_option("--a1", crossings.a1, "inline path: final horizontal side");
  c_cross->add_option("--b0", crossings.b0, "inline path: initial vertical side")->capture_default_str();
  c_cross->add_option("--b1", crossings.b1, "inline path: final vertical side (default b0)");
  c_cross->add_option("--t0", crossings.t0, "inline path: start time")->capture_default_str();
  c_cross->add_option("--t1", crossings.t1, "inline path: end time")->capture_default_str();
  c_cross->add_option("--modes", crossings.modes, "modes to track, e.g. \"2,1;1,2\"");
  c_cross->add_option("--max-index", crossings.max_index, "track all modes with m, n <= this when --modes is absent")
      ->capture_default_str()
      ->check(CLI::Range(1, 64));
  c_cross->add_option("--grid", crossings.grid, "scan cells")->capture_default_str()->check(CLI::Range(2, 1 << 24));
  crossings.o.add(c_cross, "crossings.csv");

  SigmaArgs sigma;
  auto* c_sigma = app.add_subcommand("sigma", "pumping permutation table");
  c_sigma->add_option("--a", sigma.a, "horizontal side")->required()->check(CLI::PositiveNumber);
  c_sigma->add_option("--atilde", sigma.a_tilde, "squeezed horizontal side")->required()->check(CLI::PositiveNumber);
  c_sigma->add_option("--b", sigma.b, "vertical side")->capture_default_str()->check(CLI::PositiveNumber);
  c_sigma->add_option("--K", sigma.K, "table size")->required()->check(CLI::PositiveNumber);
  sigma.o.add(c_sigma, "sigma.csv");

  OrbitArgs orbit;
  auto* c_orbit = app.add_subcommand("orbit", "orbits and cycles of the pumping permutation");
  orbit.src.add(c_orbit, "table size when building (default: enough for the starts)");
  c_orbit->add_option("--start", orbit.start, "rank to iterate from");
  c_orbit->add_option("--steps", orbit.steps, "maximum iterations")->capture_default_str();
  c_orbit->add_option("--start-max", orbit.start_max, "search cycles through every start up to this rank");
  c_orbit->add_option("--period-max", orbit.period_max, "longest cycle searched")->capture_default_str();
  orbit.o.add(c_orbit, "orbit.csv");

  EntropyArgs entropy;
  auto* c_entropy = app.add_subcommand("entropy", "mean log-rank increase per pumping cycle");
  entropy.src.add(c_entropy, "number of ranks averaged");
  c_entropy->add_option("--out", entropy.out, "optional CSV of delta_E at decades of K");
  c_entropy->add_option("--manifest", entropy.manifest, "manifest path");

  EvolveArgs evolve;
  auto* c_evolve = app.add_subcommand("evolve", "propagate a wave function along a deformation path");
  c_evolve->add_option("--config", evolve.config, "run config JSON (or a previous evolve manifest)")->required();
  c_evolve->add_option("--seed", evolve.seed, "override the symmetry-breaker seed");
  c_evolve->add_option("--dt", evolve.dt, "override the time step");
  c_evolve->add_flag("--serial", evolve.serial, "use the serial reference kernels");
  c_evolve->add_option("--out", evolve.o.out, "CSV time series (default: config 'output' or evolve.csv)");
  c_evolve->add_option("--manifest", evolve.o.manifest, "manifest path (default: <out>.manifest.json)");

  PumpArgs pump;
  auto* c_pump = app.add_subcommand("pump", "shrink with the breaker off, return with it on");
  pump.p.add(c_pump);
  c_pump->add_flag("--refine", pump.refine, "halve dt until populations settle");
  c_pump->add_option("--refine-tol", pump.refine_tol, "population change accepted")->capture_default_str();
  c_pump->add_option("--max-halvings", pump.max_halvings, "refinement budget")->capture_default_str();
  pump.o.add(c_pump, "pump.csv");

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "breaker scale giving a target superposition after one sweep");
  split.p.add(c_split);
  c_split->add_option("--alpha", split.alpha, "target amplitude on the rank partner")->capture_default_str();
  c_split->add_option("--tol", split.tol, "population tolerance")->capture_default_str();
  split.o.add(c_split, "split.csv");

  SynthesizeArgs synth;
  auto* c_synth = app.add_subcommand("synthesize", "side-length law realising a harmonic control V(tau)");
  c_synth->add_option("--V", synth.V, "CSV with columns tau,V")->required();
  c_synth->add_option("--a", synth.a, "initial side length")->required()->check(CLI::PositiveNumber);
  c_synth->add_option("--U0", synth.U0, "initial U = f f'/4 (default: selected automatically)");
  c_synth->add_option("--law", synth.law, "riccati or linear")->capture_default_str();
  c_synth->add_option("--samples", synth.samples, "output rows")->capture_default_str()->check(CLI::Range(2, 1 << 24));
  synth.o.add(c_synth, "shape.csv");

  Sah2Args sah2;
  auto* c_sah2 = app.add_subcommand("sah2", "boundary functionals of the edge deformations at a resonance");
  c_sah2->add_option("--k", sah2.k, "first mode")->capture_default_str();
  c_sah2->add_option("--l", sah2.l, "second mode")->capture_default_str();
  c_sah2->add_option("--b", sah2.b, "vertical side")->capture_default_str()->check(CLI::PositiveNumber);
  c_sah2->add_option("--tol", sah2.tol, "relative tolerance for the closed forms")->capture_default_str();
  c_sah2->add_option("--out", sah2.out, "optional CSV of both tables");
  c_sah2->add_option("--manifest", sah2.manifest, "manifest path");

  std::vector<std::string> argv_store{"boxctl"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  std::string command = args.empty() || args[0].starts_with("-") ? "" : args[0];
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    command = app.get_subcommands().front()->get_name();
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << library_version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_object(command, "usage", "bad_arguments", e.what(), 2).dump(2) << '\n';
    return 2;
  }

  Manifest manifest(command, args);
  fs::path manifest_path;
  try {
    const int threads = kernels::configure_threads_from_env();
    if (command == "spectrum") {
      run_spectrum(spectrum, manifest);
      manifest_path = spectrum.o.manifest_path();
    } else if (command == "crossings") {
      run_crossings(crossings, manifest);
      manifest_path = crossings.o.manifest_path();
    } else if (command == "sigma") {
      run_sigma(sigma, manifest);
      manifest_path = sigma.o.manifest_path();
    } else if (command == "orbit") {
      run_orbit(orbit, manifest);
      manifest_path = orbit.o.manifest_path();
    } else if (command == "entropy") {
      run_entropy(entropy, manifest);
      manifest_path = Output{entropy.out, entropy.manifest}.manifest_path();
    } else if (command == "evolve") {
      run_evolve(evolve, manifest);
      manifest_path = evolve.o.manifest.empty() ? fs::path(manifest.config.value("output", "evolve.csv") + ".manifest.json")
                                                : fs::path(evolve.o.manifest);
    } else if (command == "pump") {
      run_pump(pump, manifest);
      manifest_path = pump.o.manifest_path();
    } else if (command == "split") {
      run_split(split, manifest);
      manifest_path = split.o.manifest_path();
    } else if (command == "synthesize") {
      run_synthesize(synth, manifest);
      manifest_path = synth.o.manifest_path();
    } else if (command == "sah2") {
      run_sah2(sah2, manifest);
      manifest_path = Output{sah2.out, sah2.manifest}.manifest_path();
    }
    const json doc = manifest.finish(threads);
    if (!manifest_path.empty()) {
      std::ofstream mf(manifest_path);
      if (!mf) throw UsageError("cannot open '" + manifest_path.string() + "' for writing");
      mf << doc.dump(2) << '\n';
    }
    out << doc.dump(2) << '\n';
    return 0;
  } catch (const UsageError& e) {
    err << error_object(command, "usage", "invalid_input", e.what(), 2).dump(2) << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << error_object(command, "usage", "bad_config", e.what(), 2).dump(2) << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << error_object(command, "numerical", e.code(), e.what(), 3).dump(2) << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << error_object(command, "internal", "unexpected", e.what(), 1).dump(2) << '\n';
    return 1;
  }
}

}  // namespace boxctl::cli
