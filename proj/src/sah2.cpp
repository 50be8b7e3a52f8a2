#include "boxctl/sah2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "boxctl/quadrature.hpp"
#include "boxctl/spectrum.hpp"

namespace boxctl {

namespace {

constexpr double kPi = std::numbers::pi;

std::array<double, 2> outward_normal(Edge e) {
  switch (e) {
    case Edge::bottom: return {0.0, -1.0};
    case Edge::right: return {1.0, 0.0};
    case Edge::top: return {0.0, 1.0};
    case Edge::left: return {-1.0, 0.0};
  }
  return {0.0, 0.0};
}

std::array<double, 2> edge_point(const Rect& r, Edge e, double s) {
  switch (e) {
    case Edge::bottom: return {s, 0.0};
    case Edge::right: return {r.a(), s};
    case Edge::top: return {s, r.b()};
    case Edge::left: return {0.0, s};
  }
  return {0.0, 0.0};
}

std::string mode_text(Mode k) { return "(" + std::to_string(k.m) + "," + std::to_string(k.n) + ")"; }

}  // namespace

double edge_length(const Rect& rect, Edge edge) {
  return edge == Edge::bottom || edge == Edge::top ? rect.a() : rect.b();
}

double normal_derivative(Mode mode, const Rect& rect, Edge edge, double s) {
  if (!valid(mode)) throw UsageError("normal_derivative: invalid mode");
  const double a = rect.a(), b = rect.b();
  const double amp = 2.0 / std::sqrt(a * b);
  const double sign_m = mode.m % 2 == 0 ? 1.0 : -1.0;  // cos(m pi)
  const double sign_n = mode.n % 2 == 0 ? 1.0 : -1.0;
  switch (edge) {
    case Edge::right: return amp * (mode.m * kPi / a) * sign_m * std::sin(mode.n * kPi * s / b);
    case Edge::left: return -amp * (mode.m * kPi / a) * std::sin(mode.n * kPi * s / b);
    case Edge::top: return amp * (mode.n * kPi / b) * sign_n * std::sin(mode.m * kPi * s / a);
    case Edge::bottom: return -amp * (mode.n * kPi / b) * std::sin(mode.m * kPi * s / a);
  }
  return 0.0;
}

BoundaryDeformation BoundaryDeformation::table(int index, const Rect& rect) {
  const double a = rect.a(), b = rect.b();
  switch (index) {
    case 1: return {"g1", [a](double x1, double) { return std::array<double, 2>{x1 / a, 0.0}; }};
    case 2: return {"g2", [b](double, double x2) { return std::array<double, 2>{0.0, x2 / b}; }};
    case 3:
      return {"g3", [a, b](double x1, double x2) { return std::array<double, 2>{(x2 / b - 0.5) * x1 / a, 0.0}; }};
    case 4:
      return {"g4", [a, b](double x1, double x2) {
                const double s = x2 / b;
                return std::array<double, 2>{s * (1.0 - s) * x1 / a, 0.0};
              }};
    case 5:
      return {"g5", [a, b](double x1, double x2) {
                const double s = x2 / b;
                return std::array<double, 2>{s * s * x1 / a, 0.0};
              }};
    default: throw UsageError("BoundaryDeformation::table: index must be 1..5");
  }
}

double boundary_integral(Mode k, Mode l, const Rect& rect, const BoundaryDeformation& g, int panels) {
  if (panels < 1) throw UsageError("boundary_integral: panels must be >= 1");
  double total = 0.0;
  for (Edge e : kEdges) {
    const auto nu = outward_normal(e);
    auto integrand = [&](double s) {
      const auto x = edge_point(rect, e, s);
      const auto v = g.field(x[0], x[1]);
      const double flux = v[0] * nu[0] + v[1] * nu[1];
      if (flux == 0.0) return 0.0;
      return normal_derivative(k, rect, e, s) * normal_derivative(l, rect, e, s) * flux;
    };
    const double len = edge_length(rect, e);
    for (int p = 0; p < panels; ++p)
      total += quadrature::gauss_legendre_128(integrand, len * p / panels, len * (p + 1) / panels);
  }
  return total;
}

double boundary_functional(Mode k, Mode l, const Rect& rect, const BoundaryDeformation& g, int panels) {
  return std::abs(boundary_integral(k, l, rect, g, panels));
}

double tabulated_functional(int deformation, int row, Mode k, Mode l, const Rect& rect) {
  if (row < 0 || row > 2) throw UsageError("tabulated_functional: row must be 0..2");
  const double a3 = std::pow(rect.a(), 3);
  const double b = rect.b();
  const double pi2 = kPi * kPi;
  if (row < 2) {
    const Mode q = row == 0 ? k : l;
    const double q1 = q.m, q2 = q.n;
    switch (deformation) {
      case 1: return 2.0 * q1 * q1 * pi2 / a3;
      case 2: return 2.0 * q2 * q2 * pi2 / (b * b * b);
      case 3: return 0.0;
      case 4: return q1 * q1 * (q2 * q2 * pi2 + 3.0) / (3.0 * a3 * q2 * q2);
      case 5: return q1 * q1 * (2.0 * q2 * q2 * pi2 - 3.0) / (3.0 * q2 * q2 * a3);
      default: throw UsageError("tabulated_functional: deformation must be 1..5");
    }
  }
  const double k1 = k.m, k2 = k.n, l1 = l.m, l2 = l.n;
  const double d = k2 * k2 - l2 * l2;
  const bool same_parity = (k.n - l.n) % 2 == 0;
  const double base = d == 0.0 ? 0.0 : 16.0 * k1 * l1 * k2 * l2 / (a3 * d * d);
  switch (deformation) {
    case 1:
    case 2: return 0.0;
    case 3: return same_parity ? 0.0 : b * base;
    case 4: return same_parity ? b * b * base : 0.0;
    case 5: return base;
    default: throw UsageError("tabulated_functional: deformation must be 1..5");
  }
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol, std::vector<double>* singular_values) {
  Eigen::MatrixXd scaled = m;
  // Rows that are rounding noise next to the largest entry count as zero;
  // scaling them to unit norm would invent a direction.
  const double global = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
    const double top = scaled.row(i).cwiseAbs().maxCoeff();
    if (top > 1e-12 * global)
      scaled.row(i) /= top;
    else
      scaled.row(i).setZero();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  const Eigen::VectorXd sv = svd.singularValues();
  if (singular_values) singular_values->assign(sv.data(), sv.data() + sv.size());
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return rank;
}

Sah2Report verify_table(Mode k, Mode l, double b, double tol) {
  if (!valid(k) || !valid(l)) throw UsageError("verify_table: invalid mode");
  const auto a = resonance_length(k, l, b);
  if (!a) throw UsageError("verify_table: modes " + mode_text(k) + " and " + mode_text(l) + " never cross for b=" +
                           std::to_string(b));
  const Rect rect(*a, b);
  Sah2Report r;
  r.k = k;
  r.l = l;
  r.a = *a;
  r.b = b;
  static const char* row_names[3] = {"I_kk", "I_ll", "I_kl"};
  for (int j = 0; j < 5; ++j) {
    const BoundaryDeformation g = BoundaryDeformation::table(j + 1, rect);
    const std::array<std::pair<Mode, Mode>, 3> pairs{{{k, k}, {l, l}, {k, l}}};
    for (int i = 0; i < 3; ++i) {
      const double v = boundary_integral(pairs[i].first, pairs[i].second, rect, g, 1);
      const double v2 = boundary_integral(pairs[i].first, pairs[i].second, rect, g, 2);
      r.max_quadrature_change = std::max(r.max_quadrature_change, std::abs(v - v2));
      r.signed_matrix(i, j) = v;
      r.I_matrix(i, j) = std::abs(v);
      r.closed_form(i, j) = tabulated_functional(j + 1, i, k, l, rect);
    }
  }
  for (int i = 0; i < 3; ++i) {
    const double row_scale = r.I_matrix.row(i).maxCoeff();
    for (int j = 0; j < 5; ++j) {
      const double ref = std::max(std::abs(r.closed_form(i, j)), row_scale);
      r.closed_form_errors(i, j) = std::abs(r.I_matrix(i, j) - r.closed_form(i, j)) / ref;
      if (!(r.closed_form_errors(i, j) <= tol))
        r.mismatches.push_back(std::string(row_names[i]) + "(g" + std::to_string(j + 1) +
                               "): quadrature " + std::to_string(r.I_matrix(i, j)) + " vs closed form " +
                               std::to_string(r.closed_form(i, j)));
    }
  }
  r.rank_g1_to_g4 = numerical_rank(r.signed_matrix.leftCols(4), 1e-8, &r.singular_values);
  r.rank_g1_to_g5 = numerical_rank(r.signed_matrix, 1e-8);
  r.ratio_g1 = r.I_matrix(0, 0) / r.I_matrix(1, 0);
  r.ratio_g2 = r.I_matrix(0, 1) / r.I_matrix(1, 1);
  r.rel1_holds = std::abs(r.ratio_g1 - r.ratio_g2) > 1e-8 * std::max(r.ratio_g1, r.ratio_g2);
  return r;
}

}  // namespace boxctl
