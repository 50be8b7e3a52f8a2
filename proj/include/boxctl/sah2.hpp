#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boxctl/rect.hpp"

namespace boxctl {

/// Edges of (0,a) x (0,b). The arclength s runs along the increasing
/// coordinate of the edge: x1 on bottom/top, x2 on left/right.
enum class Edge { bottom, right, top, left };

constexpr std::array<Edge, 4> kEdges{Edge::bottom, Edge::right, Edge::top, Edge::left};

double edge_length(const Rect& rect, Edge edge);

/// Outward normal derivative of the normalized Dirichlet mode
/// (2/sqrt(ab)) sin(m pi x1/a) sin(n pi x2/b) at arclength s on `edge`.
double normal_derivative(Mode mode, const Rect& rect, Edge edge, double s);

/// Tangent vector field of a boundary perturbation, pushed forward to the
/// rectangle. The table family displaces the right edge (g1, g3, g4, g5) or
/// the top edge (g2) by a profile in the normalized coordinate s = x2/b.
struct BoundaryDeformation {
  std::string id;
  std::function<std::array<double, 2>(double, double)> field;

  /// g1..g5 on `rect`: (x1/a, 0), (0, x2/b), ((s - 1/2) x1/a, 0),
  /// (s(1 - s) x1/a, 0), (s^2 x1/a, 0).
  static BoundaryDeformation table(int index, const Rect& rect);
};

/// Signed int over the boundary of d_nu phi_k d_nu phi_l <g, nu>, each edge by
/// `panels` panels of 128-point Gauss-Legendre.
double boundary_integral(Mode k, Mode l, const Rect& rect, const BoundaryDeformation& g, int panels = 1);

/// |boundary_integral|.
double boundary_functional(Mode k, Mode l, const Rect& rect, const BoundaryDeformation& g, int panels = 1);

/// Closed-form value of I_{k,k} (row 0), I_{l,l} (row 1) or I_{k,l} (row 2)
/// for deformation g1..g5 as tabulated: the cross terms of g3 and g4 carry
/// factors b and b^2, and g3 vanishes for k2 = l2 mod 2, g4 otherwise.
double tabulated_functional(int deformation, int row, Mode k, Mode l, const Rect& rect);

struct Sah2Report {
  Mode k;
  Mode l;
  double a = 0.0;
  double b = 0.0;
  Eigen::Matrix<double, 3, 5> signed_matrix;  // rows I_kk, I_ll, I_kl; columns g1..g5
  Eigen::Matrix<double, 3, 5> I_matrix;       // absolute values
  Eigen::Matrix<double, 3, 5> closed_form;
  Eigen::Matrix<double, 3, 5> closed_form_errors;  // |I - closed| / max(|closed|, largest |I| in the row)
  int rank_g1_to_g4 = 0;
  int rank_g1_to_g5 = 0;
  std::vector<double> singular_values;  // of the row-scaled 3x4 matrix
  double ratio_g1 = 0.0;                 // I_kk / I_ll for g1
  double ratio_g2 = 0.0;
  bool rel1_holds = false;
  double max_quadrature_change = 0.0;    // doubling the number of panels
  std::vector<std::string> mismatches;   // entries above the tolerance

  bool passed() const { return mismatches.empty() && rank_g1_to_g4 == 3 && rel1_holds; }
};

/// Numerical rank: singular values above rel_tol times the largest, after
/// scaling every row to unit max-norm. Rows below 1e-12 of the largest entry
/// are treated as zero.
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-8, std::vector<double>* singular_values = nullptr);

/// Evaluates the full table at the resonance a = resonance_length(k, l, b).
/// Throws UsageError when (k, l) has no resonance.
Sah2Report verify_table(Mode k, Mode l, double b, double tol = 1e-8);

}  // namespace boxctl
