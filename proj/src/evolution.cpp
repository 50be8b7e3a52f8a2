#include "boxctl/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>

#include "boxctl/kernels.hpp"
#include "boxctl/matrix_elements.hpp"

namespace boxctl {

namespace {

using Complex = std::complex<double>;
constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

int tail_start(int n) { return n - std::max(1, n / 10); }

// Adds coef * A (x) B to H in the flattened order i = i1 + n1 * i2.
void add_product(Eigen::MatrixXd& H, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double coef) {
  const Eigen::Index n1 = A.rows();
  const Eigen::Index n2 = B.rows();
  for (Eigen::Index j2 = 0; j2 < n2; ++j2)
    for (Eigen::Index j1 = 0; j1 < n1; ++j1)
      for (Eigen::Index i2 = 0; i2 < n2; ++i2) {
        const double b = coef * B(i2, j2);
        if (b == 0.0) continue;
        for (Eigen::Index i1 = 0; i1 < n1; ++i1) H(i1 + n1 * i2, j1 + n1 * j2) += A(i1, j1) * b;
      }
}

// One-axis generator pi^2 diag(m^2) / f^2 + (f'' f / 4) M.
struct AxisGenerator {
  Eigen::VectorXd kinetic;  // pi^2 m^2
  Eigen::MatrixXd moment;   // y^2 matrix

  explicit AxisGenerator(int n) : kinetic(n), moment(quadratic_moment_matrix(n)) {
    for (int m = 1; m <= n; ++m) kinetic(m - 1) = kPi2 * m * m;
  }

  // exp(-i h A) for the side state (f, f'').
  Eigen::MatrixXcd exponential(double h, double f, double fpp) const {
    const double c = fpp * f / 4.0;
    const Eigen::Index n = kinetic.size();
    if (c == 0.0) {
      Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) E(i, i) = std::exp(-kI * h * kinetic(i) / (f * f));
      return E;
    }
    Eigen::MatrixXd A = c * moment;
    A.diagonal() += kinetic / (f * f);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolver", "propagate: axis eigensolver failed");
    const Eigen::MatrixXd& Q = eig.eigenvectors();
    Eigen::VectorXcd phase(n);
    for (Eigen::Index i = 0; i < n; ++i) phase(i) = std::exp(-kI * h * eig.eigenvalues()(i));
    return Q.cast<Complex>() * phase.asDiagonal() * Q.transpose().cast<Complex>();
  }
};

void check_path(const DeformationPath& path) {
  if (!path.horizontal.value || !path.horizontal.rate || !path.horizontal.accel || !path.vertical.value ||
      !path.vertical.rate || !path.vertical.accel)
    throw UsageError("deformation path is missing a side law or one of its derivatives");
  if (!(path.t_end > path.t_start)) throw UsageError("deformation path: t_end must exceed t_start");
}

std::size_t step_count(const DeformationPath& path, double dt) {
  if (!(dt > 0.0)) throw UsageError("propagate: dt must be positive");
  return static_cast<std::size_t>(std::max(1.0, std::ceil(path.duration() / dt - 1e-9)));
}

}  // namespace

double WaveState::population(Mode k) const {
  if (k.m < 1 || k.m > n1() || k.n < 1 || k.n > n2()) return 0.0;
  return std::norm(coeffs(k.m - 1, k.n - 1));
}

double WaveState::tail_population() const {
  const int c1 = tail_start(n1());
  const int c2 = tail_start(n2());
  double tail = 0.0;
  for (int n = 0; n < n2(); ++n)
    for (int m = 0; m < n1(); ++m)
      if (m >= c1 || n >= c2) tail += std::norm(coeffs(m, n));
  return tail;
}

WaveState WaveState::basis(int n1, int n2, Mode k) {
  if (n1 < 1 || n2 < 1) throw UsageError("WaveState: basis sizes must be >= 1");
  if (k.m < 1 || k.m > n1 || k.n < 1 || k.n > n2) throw UsageError("WaveState: mode outside the basis");
  WaveState s{Eigen::MatrixXcd::Zero(n1, n2)};
  s.coeffs(k.m - 1, k.n - 1) = 1.0;
  return s;
}

SymmetryBreaker::SymmetryBreaker(int n1, int n2, double strength, std::uint64_t seed)
    : n1_(n1), n2_(n2), strength_(strength), seed_(seed) {
  if (n1 < 1 || n2 < 1) throw UsageError("SymmetryBreaker: basis sizes must be >= 1");
  constexpr int P = kOrder + 1;
  std::mt19937_64 rng(seed);
  coeffs_.assign(P * P, 0.0);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < P; ++q) {
      if (p == 0 && q == 0) continue;
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      coeffs_[p * P + q] = 2.0 * u - 1.0;
    }

  constexpr int grid = 400;
  double sup = 0.0;
  scale_ = 1.0;
  for (int i = 0; i <= grid; ++i)
    for (int j = 0; j <= grid; ++j)
      sup = std::max(sup, std::abs(potential(static_cast<double>(i) / grid, static_cast<double>(j) / grid)));
  scale_ = 1.0 / sup;

  const int dim = n1 * n2;
  matrix_ = Eigen::MatrixXd::Zero(dim, dim);
  add_product(matrix_, quadratic_moment_matrix(n1), linear_moment_matrix(n2), scale_);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < P; ++q)
      if (coeffs_[p * P + q] != 0.0)
        add_product(matrix_, cosine_matrix(n1, p), cosine_matrix(n2, q), scale_ * coeffs_[p * P + q]);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix_);
  if (eig.info() != Eigen::Success) throw NumericalError("eigensolver", "SymmetryBreaker: eigensolver failed");
  eigvecs_ = eig.eigenvectors();
  eigvals_ = eig.eigenvalues();
}

double SymmetryBreaker::potential(double y1, double y2) const {
  constexpr int P = kOrder + 1;
  double w = y1 * y1 * y2;
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < P; ++q) {
      const double c = coeffs_[p * P + q];
      if (c != 0.0) w += c * std::cos(p * std::numbers::pi * y1) * std::cos(q * std::numbers::pi * y2);
    }
  return scale_ * w;
}

double BreakerDrive::at(double t) const {
  if (!breaker) return 0.0;
  return breaker->strength() * (envelope ? envelope(t) : 1.0);
}

std::function<double(double)> smooth_bump(double t0, double t1) {
  if (!(t1 > t0)) throw UsageError("smooth_bump: t1 must exceed t0");
  return [t0, t1](double t) {
    const double x = 2.0 * (t - t0) / (t1 - t0) - 1.0;
    if (x <= -1.0 || x >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
  };
}

Eigen::MatrixXd assemble_hamiltonian(const DeformationPath& path, double t, int n1, int n2,
                                     const SymmetryBreaker* breaker, double breaker_scale) {
  check_path(path);
  if (n1 < 1 || n2 < 1) throw UsageError("assemble_hamiltonian: basis sizes must be >= 1");
  const double f1 = path.horizontal.value(t);
  const double f2 = path.vertical.value(t);
  const double c1 = path.horizontal.accel(t) * f1 / 4.0;
  const double c2 = path.vertical.accel(t) * f2 / 4.0;
  const int dim = n1 * n2;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 1; n <= n2; ++n)
    for (int m = 1; m <= n1; ++m) H((m - 1) + n1 * (n - 1), (m - 1) + n1 * (n - 1)) = mode_energy(f1, f2, {m, n});
  if (c1 != 0.0) add_product(H, quadratic_moment_matrix(n1), Eigen::MatrixXd::Identity(n2, n2), c1);
  if (c2 != 0.0) add_product(H, Eigen::MatrixXd::Identity(n1, n1), quadratic_moment_matrix(n2), c2);
  if (breaker && breaker_scale != 0.0) {
    if (breaker->n1() != n1 || breaker->n2() != n2)
      throw UsageError("assemble_hamiltonian: breaker basis does not match");
    H += breaker_scale * breaker->potential_coeffs();
  }
  return H;
}

PropagationResult propagate(const WaveState& initial, const DeformationPath& path, double dt,
                            const BreakerDrive& drive, const PropagateOptions& options) {
  check_path(path);
  const int n1 = initial.n1();
  const int n2 = initial.n2();
  if (n1 < 1 || n2 < 1) throw UsageError("propagate: empty state");
  if (drive.breaker && (drive.breaker->n1() != n1 || drive.breaker->n2() != n2))
    throw UsageError("propagate: breaker basis does not match the state");

  const std::size_t steps = step_count(path, dt);
  const double h = path.duration() / static_cast<double>(steps);
  const AxisGenerator axis1(n1);
  const AxisGenerator axis2(n2);
  const double norm0 = initial.norm();

  PropagationResult result;
  result.state = initial;
  result.steps = steps;
  result.dt = h;
  Eigen::MatrixXcd& C = result.state.coeffs;

  const int dim = n1 * n2;
  std::vector<Complex> work(static_cast<std::size_t>(dim));
  std::span<const double> P;
  if (drive.breaker) P = std::span<const double>(drive.breaker->eigenvectors().data(), static_cast<std::size_t>(dim) * dim);

  if (options.observer) options.observer(path.t_start, result.state);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t0 = path.t_start + static_cast<double>(s) * h;
    const double tm = t0 + 0.5 * h;
    const double f1 = path.horizontal.value(tm);
    const double f2 = path.vertical.value(tm);
    const Eigen::MatrixXcd E1 = axis1.exponential(0.5 * h, f1, path.horizontal.accel(tm));
    const Eigen::MatrixXcd E2 = axis2.exponential(0.5 * h, f2, path.vertical.accel(tm));

    C = E1 * C * E2.transpose();
    const double eps = drive.at(tm);
    if (eps != 0.0) {
      // P is column-major, so as a row-major buffer it holds P^T.
      std::span<Complex> v(C.data(), static_cast<std::size_t>(dim));
      if (options.parallel)
        kernels::parallel::real_matvec(P, v, work);
      else
        kernels::serial::real_matvec(P, v, work);
      const Eigen::VectorXd& omega = drive.breaker->eigenvalues();
      for (int k = 0; k < dim; ++k) work[k] *= std::exp(-kI * h * eps * omega(k));
      if (options.parallel)
        kernels::parallel::real_matvec_transposed(P, work, v);
      else
        kernels::serial::real_matvec_transposed(P, work, v);
    }
    C = E1 * C * E2.transpose();

    result.max_norm_drift = std::max(result.max_norm_drift, std::abs(result.state.norm() - norm0));
    const double tail = result.state.tail_population();
    result.max_tail = std::max(result.max_tail, tail);
    if (options.abort_on_tail && tail > options.tail_threshold)
      throw NumericalError("tail_overflow", "propagate: population " + std::to_string(tail) +
                                                " in the top 10% of modes at t=" + std::to_string(t0 + h) +
                                                "; enlarge the basis or slow the path");
    if (options.observer && options.observe_every > 0 &&
        ((s + 1) % static_cast<std::size_t>(options.observe_every) == 0 || s + 1 == steps))
      options.observer(s + 1 == steps ? path.t_end : t0 + h, result.state);
  }
  return result;
}

PropagationResult propagate_crank_nicolson(const WaveState& initial, const DeformationPath& path, double dt,
                                           const BreakerDrive& drive) {
  check_path(path);
  const int n1 = initial.n1();
  const int n2 = initial.n2();
  const std::size_t steps = step_count(path, dt);
  const double h = path.duration() / static_cast<double>(steps);
  const int dim = n1 * n2;
  const double norm0 = initial.norm();

  PropagationResult result;
  result.state = initial;
  result.steps = steps;
  result.dt = h;
  Eigen::Map<Eigen::VectorXcd> v(result.state.coeffs.data(), dim);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(dim, dim);
  for (std::size_t s = 0; s < steps; ++s) {
    const double tm = path.t_start + (static_cast<double>(s) + 0.5) * h;
    const Eigen::MatrixXcd H = assemble_hamiltonian(path, tm, n1, n2, drive.breaker, drive.at(tm)).cast<Complex>();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(I + (0.5 * h) * kI * H);
    const Eigen::VectorXcd rhs = v - (0.5 * h) * kI * (H * v);
    v = lu.solve(rhs);
    const double residual = ((I + (0.5 * h) * kI * H) * v - rhs).norm();
    if (!(residual < 1e-10 * std::max(1.0, rhs.norm())))
      throw NumericalError("linear_solve", "propagate_crank_nicolson: linear solve did not converge");
    result.max_norm_drift = std::max(result.max_norm_drift, std::abs(result.state.norm() - norm0));
  }
  result.max_tail = result.state.tail_population();
  return result;
}

double PhysicalField::l2_norm() const {
  const double cell = (a / grid()) * (b / grid());
  return std::sqrt(values.squaredNorm() * cell);
}

PhysicalField gauge_to_physical(const WaveState& state, const Rect& rect, double f1p, double f2p, int grid) {
  if (grid < 1) throw UsageError("gauge_to_physical: grid must be >= 1");
  const int n1 = state.n1();
  const int n2 = state.n2();
  PhysicalField field;
  field.a = rect.a();
  field.b = rect.b();
  Eigen::MatrixXd S1(grid, n1);
  Eigen::MatrixXd S2(grid, n2);
  for (int i = 0; i < grid; ++i) {
    const double y = (i + 0.5) / grid;
    for (int m = 1; m <= n1; ++m) S1(i, m - 1) = std::numbers::sqrt2 * std::sin(m * std::numbers::pi * y);
    for (int n = 1; n <= n2; ++n) S2(i, n - 1) = std::numbers::sqrt2 * std::sin(n * std::numbers::pi * y);
  }
  field.values = S1.cast<Complex>() * state.coeffs * S2.transpose().cast<Complex>();
  field.values /= std::sqrt(rect.a() * rect.b());
  for (int j = 0; j < grid; ++j) {
    const double x2 = field.x2(j);
    for (int i = 0; i < grid; ++i) {
      const double x1 = field.x1(i);
      const double psi = 0.25 * (f1p / rect.a() * x1 * x1 + f2p / rect.b() * x2 * x2);
      field.values(i, j) *= std::polar(1.0, psi);
    }
  }
  return field;
}

Eigen::MatrixXcd physical_amplitudes(const WaveState& state, const Rect& rect, double f1p, double f2p) {
  const Eigen::MatrixXcd G1 = gauge_phase_matrix(state.n1(), 0.25 * f1p * rect.a());
  const Eigen::MatrixXcd G2 = gauge_phase_matrix(state.n2(), 0.25 * f2p * rect.b());
  return G1 * state.coeffs * G2.transpose();
}

WaveState gauge_from_physical(const Eigen::MatrixXcd& amplitudes, const Rect& rect, double f1p, double f2p) {
  const int n1 = static_cast<int>(amplitudes.rows());
  const int n2 = static_cast<int>(amplitudes.cols());
  const Eigen::MatrixXcd G1 = gauge_phase_matrix(n1, -0.25 * f1p * rect.a());
  const Eigen::MatrixXcd G2 = gauge_phase_matrix(n2, -0.25 * f2p * rect.b());
  return WaveState{G1 * amplitudes * G2.transpose()};
}

}  // namespace boxctl
