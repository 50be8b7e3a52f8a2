#include "boxctl/matrix_elements.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "boxctl/error.hpp"

namespace boxctl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

void require_size(int N) {
  if (N < 1) throw UsageError("basis size must be >= 1");
}

}  // namespace

Eigen::MatrixXd quadratic_moment_matrix(int N) {
  require_size(N);
  Eigen::MatrixXd M(N, N);
  for (int m = 1; m <= N; ++m) {
    for (int n = 1; n <= N; ++n) {
      if (m == n) {
        M(m - 1, n - 1) = 1.0 / 3.0 - 1.0 / (2.0 * kPi2 * m * m);
      } else {
        const double d = static_cast<double>(m * m - n * n);
        const double sign = (m + n) % 2 == 0 ? 1.0 : -1.0;
        M(m - 1, n - 1) = sign * 8.0 * m * n / (kPi2 * d * d);
      }
    }
  }
  return M;
}

Eigen::MatrixXd linear_moment_matrix(int N) {
  require_size(N);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(N, N);
  for (int m = 1; m <= N; ++m) {
    for (int n = 1; n <= N; ++n) {
      if (m == n) {
        Y(m - 1, n - 1) = 0.5;
      } else if ((m + n) % 2 == 1) {
        const double d = static_cast<double>(m * m - n * n);
        Y(m - 1, n - 1) = -8.0 * m * n / (kPi2 * d * d);
      }
    }
  }
  return Y;
}

Eigen::MatrixXd cosine_matrix(int N, int p) {
  require_size(N);
  if (p < 0) throw UsageError("cosine_matrix: p must be >= 0");
  if (p == 0) return Eigen::MatrixXd::Identity(N, N);
  // cos(p pi y) * 2 sin sin = cos(p pi y) [cos((m-n) pi y) - cos((m+n) pi y)].
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);
  for (int m = 1; m <= N; ++m) {
    for (int n = 1; n <= N; ++n) {
      double v = 0.0;
      if (std::abs(m - n) == p) v += 0.5;
      if (m + n == p) v -= 0.5;
      C(m - 1, n - 1) = v;
    }
  }
  return C;
}

Eigen::MatrixXcd gauge_phase_matrix(int N, double alpha) {
  require_size(N);
  using Rule = boost::math::quadrature::gauss<double, 64>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  // Composite rule: the integrand oscillates with frequency up to 2N.
  const int panels = 2 * N + 8;
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(N, N);
  Eigen::VectorXd s(N);
  auto accumulate = [&](double y, double weight) {
    for (int m = 1; m <= N; ++m) s(m - 1) = std::sin(m * kPi * y);
    const std::complex<double> phase = std::polar(2.0 * weight, alpha * y * y);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < N; ++m) G(m, n) += phase * (s(m) * s(n));
  };
  const double h = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    const double half = 0.5 * h;
    // Boost stores the non-negative half of the symmetric rule.
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) {
        accumulate(mid, half * w[i]);
      } else {
        accumulate(mid - half * x[i], half * w[i]);
        accumulate(mid + half * x[i], half * w[i]);
      }
    }
  }
  return G;
}

}  // namespace boxctl
