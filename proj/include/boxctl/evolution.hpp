#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "boxctl/path.hpp"
#include "boxctl/rect.hpp"

namespace boxctl {

/// Coefficients of w in the product sine basis of the unit square:
/// w = sum c(m-1, n-1) sqrt(2) sin(m pi y1) sqrt(2) sin(n pi y2).
/// Flattened vectors use the column-major order of `coeffs`.
struct WaveState {
  Eigen::MatrixXcd coeffs;

  int n1() const { return static_cast<int>(coeffs.rows()); }
  int n2() const { return static_cast<int>(coeffs.cols()); }
  double norm() const { return coeffs.norm(); }
  double population(Mode k) const;
  /// Population in the top 10% of either index range.
  double tail_population() const;

  static WaveState basis(int n1, int n2, Mode k);
};

/// Fixed potential W(y1, y2) = y1^2 y2 + sum c_pq cos(p pi y1) cos(q pi y2),
/// 0 <= p, q <= 2, (p, q) != (0, 0), with c_pq drawn uniformly from [-1, 1]
/// by a seeded mt19937_64, then scaled so that max |W| = 1 on the square.
class SymmetryBreaker {
 public:
  static constexpr int kOrder = 2;

  SymmetryBreaker(int n1, int n2, double strength, std::uint64_t seed);

  double strength() const { return strength_; }
  std::uint64_t seed() const { return seed_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  /// c_pq before normalization, indexed [p * (kOrder + 1) + q].
  const std::vector<double>& trig_coefficients() const { return coeffs_; }
  double scale() const { return scale_; }
  /// Normalized W at a point of the unit square.
  double potential(double y1, double y2) const;
  /// <e_m e_n | W | e_m' e_n'> for the normalized W (without strength).
  const Eigen::MatrixXd& potential_coeffs() const { return matrix_; }
  /// W = P diag(omega) P^T.
  const Eigen::MatrixXd& eigenvectors() const { return eigvecs_; }
  const Eigen::VectorXd& eigenvalues() const { return eigvals_; }

 private:
  int n1_, n2_;
  double strength_;
  std::uint64_t seed_;
  std::vector<double> coeffs_;
  double scale_ = 1.0;
  Eigen::MatrixXd matrix_;
  Eigen::MatrixXd eigvecs_;
  Eigen::VectorXd eigvals_;
};

/// Time profile of the breaker: epsilon(t) = strength * envelope(t).
struct BreakerDrive {
  const SymmetryBreaker* breaker = nullptr;
  std::function<double(double)> envelope;  // empty means constant 1

  double at(double t) const;
  bool active() const { return breaker != nullptr; }
};

/// C-infinity bump on [t0, t1]: exp(1 - 1/(1 - x^2)) with x in (-1, 1),
/// peak 1 at the midpoint, every derivative zero at both ends.
std::function<double(double)> smooth_bump(double t0, double t1);

/// H(t) = diag(pi^2 m^2/f1^2 + pi^2 n^2/f2^2) + (f1'' f1/4) M (x) I
///        + (f2'' f2/4) I (x) M + breaker_scale * W.
Eigen::MatrixXd assemble_hamiltonian(const DeformationPath& path, double t, int n1, int n2,
                                     const SymmetryBreaker* breaker = nullptr, double breaker_scale = 0.0);

struct PropagateOptions {
  double tail_threshold = 1e-6;
  bool abort_on_tail = true;
  /// Calls observer(t, state) at t_start and every `observe_every` steps.
  int observe_every = 0;
  std::function<void(double, const WaveState&)> observer;
  bool parallel = true;
};

struct PropagationResult {
  WaveState state;
  std::size_t steps = 0;
  double dt = 0.0;             // step actually used: duration / steps
  double max_norm_drift = 0.0;
  double max_tail = 0.0;
};

/// Advances w over [path.t_start, path.t_end] with the split exponential
/// midpoint rule: exact per-axis exponentials of the separable part at the
/// step midpoint around an exact exponential of the breaker term. Every
/// factor is unitary. The requested dt is shrunk so the steps tile the
/// interval. Throws NumericalError("tail_overflow") when the tail population
/// exceeds the threshold and abort_on_tail is set.
PropagationResult propagate(const WaveState& initial, const DeformationPath& path, double dt,
                            const BreakerDrive& drive = {}, const PropagateOptions& options = {});

/// Dense Crank-Nicolson stepping with the full H at the step midpoint.
/// Reference scheme for small bases.
PropagationResult propagate_crank_nicolson(const WaveState& initial, const DeformationPath& path, double dt,
                                           const BreakerDrive& drive = {});

/// Sampled physical field u on a cell-centred grid of the rectangle.
struct PhysicalField {
  double a = 1.0;
  double b = 1.0;
  Eigen::MatrixXcd values;  // values(i, j) at ((i + 1/2) a / grid, (j + 1/2) b / grid)

  int grid() const { return static_cast<int>(values.rows()); }
  double l2_norm() const;
  double x1(int i) const { return (i + 0.5) * a / grid(); }
  double x2(int j) const { return (j + 0.5) * b / grid(); }
};

/// u(x) = exp(i psi(x)) w(x1/a, x2/b) / sqrt(ab), psi = (f1'/a x1^2 + f2'/b x2^2) / 4.
PhysicalField gauge_to_physical(const WaveState& state, const Rect& rect, double f1p, double f2p, int grid);

/// Amplitudes of u on the rectangle's Dirichlet modes: G(alpha1) C G(alpha2)^T
/// with alpha_j = f_j f_j' / 4.
Eigen::MatrixXcd physical_amplitudes(const WaveState& state, const Rect& rect, double f1p, double f2p);

/// Inverse of physical_amplitudes: the w whose physical amplitudes are given.
WaveState gauge_from_physical(const Eigen::MatrixXcd& amplitudes, const Rect& rect, double f1p, double f2p);

}  // namespace boxctl
