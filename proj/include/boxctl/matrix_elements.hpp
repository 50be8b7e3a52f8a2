#pragma once

#include <Eigen/Dense>

namespace boxctl {

// Matrix elements <e_m | g | e_n> in the orthonormal sine basis
// e_m(y) = sqrt(2) sin(m pi y) of L^2(0,1), indices m, n = 1..N stored at
// (m-1, n-1). All closed form.

/// 2 int_0^1 y^2 sin(m pi y) sin(n pi y) dy.
Eigen::MatrixXd quadratic_moment_matrix(int N);

/// 2 int_0^1 y sin(m pi y) sin(n pi y) dy.
Eigen::MatrixXd linear_moment_matrix(int N);

/// 2 int_0^1 cos(p pi y) sin(m pi y) sin(n pi y) dy; p = 0 gives the identity.
Eigen::MatrixXd cosine_matrix(int N, int p);

/// 2 int_0^1 exp(i alpha y^2) sin(m pi y) sin(n pi y) dy, by Gauss-Legendre
/// quadrature. Multiplication by the gauge phase in the sine basis.
Eigen::MatrixXcd gauge_phase_matrix(int N, double alpha);

}  // namespace boxctl
