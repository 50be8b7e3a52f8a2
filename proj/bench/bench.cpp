// Serial reference kernels against their OpenMP versions, plus one full
// propagation with each. Prints a table of best-of-N wall times.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "boxctl/evolution.hpp"
#include "boxctl/kernels.hpp"
#include "boxctl/spectrum.hpp"

using namespace boxctl;

namespace {

double best_of(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const std::string& name, double serial, double parallel) {
  std::printf("%-28s %12.6f %12.6f %8.2fx\n", name.c_str(), serial, parallel, serial / parallel);
}

volatile double sink = 0.0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel timings"};
  int reps = 5;
  double cutoff = 2e6;
  int dim = 1024;
  int basis = 24;
  app.add_option("--reps", reps, "repetitions per kernel (best time is kept)")->capture_default_str();
  app.add_option("--cutoff", cutoff, "energy cutoff for mode enumeration")->capture_default_str();
  app.add_option("--dim", dim, "matrix size for the matvecs")->capture_default_str();
  app.add_option("--basis", basis, "basis size per axis for the propagation")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  kernels::configure_threads_from_env();

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial [s]", "openmp [s]", "speedup");

  const double a = 1.5707963267948966, b = 1.0;
  report("enumerate_modes",
         best_of(reps, [&] { sink = sink + kernels::serial::enumerate_modes(a, b, cutoff).size(); }),
         best_of(reps, [&] { sink = sink + kernels::parallel::enumerate_modes(a, b, cutoff).size(); }));

  const auto modes = kernels::serial::enumerate_modes(a, b, cutoff);
  std::vector<std::uint32_t> image(modes.size());
  std::iota(image.begin(), image.end(), 1u);
  std::shuffle(image.begin(), image.end(), std::mt19937_64{7});
  report("mean_log_ratio", best_of(reps, [&] { sink = sink + kernels::serial::mean_log_ratio(image); }),
         best_of(reps, [&] { sink = sink + kernels::parallel::mean_log_ratio(image); }));

  const SpectrumIndex index = build_index(Rect(a / 3.0, b), modes.size() / 4);
  std::vector<Mode> queries;
  for (const auto& me : modes) queries.push_back(me.mode);
  std::vector<std::uint32_t> ranks(queries.size());
  report("lookup_ranks", best_of(reps, [&] { kernels::serial::lookup_ranks(queries, index.rank_table(), ranks); }),
         best_of(reps, [&] { kernels::parallel::lookup_ranks(queries, index.rank_table(), ranks); }));

  std::vector<double> A(static_cast<std::size_t>(dim) * dim);
  std::vector<kernels::Complex> x(dim), y(dim);
  std::mt19937_64 rng{3};
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : A) v = u(rng);
  for (auto& v : x) v = {u(rng), u(rng)};
  report("real_matvec", best_of(reps, [&] { kernels::serial::real_matvec(A, x, y); }),
         best_of(reps, [&] { kernels::parallel::real_matvec(A, x, y); }));
  report("real_matvec_transposed", best_of(reps, [&] { kernels::serial::real_matvec_transposed(A, x, y); }),
         best_of(reps, [&] { kernels::parallel::real_matvec_transposed(A, x, y); }));

  const DeformationPath path = DeformationPath::smoothstep(1.2, 0.8, 1.0, 1.0, 0.0, 2.0);
  const SymmetryBreaker W(basis, basis, 20.0, 1);
  const BreakerDrive drive{&W, smooth_bump(0.0, 2.0)};
  PropagateOptions ser, par;
  ser.parallel = false;
  ser.abort_on_tail = par.abort_on_tail = false;
  const WaveState w0 = WaveState::basis(basis, basis, {2, 1});
  const int prop_reps = std::max(1, reps / 2);
  report("propagate (400 steps)", best_of(prop_reps, [&] { sink = sink + propagate(w0, path, 0.005, drive, ser).max_tail; }),
         best_of(prop_reps, [&] { sink = sink + propagate(w0, path, 0.005, drive, par).max_tail; }));
  return 0;
}
