#pragma once

// B-splines and local extrema splines.
//
// A local extrema spline column is
//   B*_k(x) = M * integral_{-inf}^{x} prod_h (xi - alpha_h) * B_k(xi) dxi,
// so any combination with nonnegative weights has a derivative whose sign is
// fixed by M * prod_h (x - alpha_h). All quantities here are in working units.

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lxs {

inline constexpr int kMaxOrder = 6;
inline constexpr double kMinAlphaSeparation = 1e-6;

/// Breakpoints tau_1 <= ... <= tau_K plus the spline order. The end knots are
/// padded to multiplicity `order` internally (clamped knot vector), which
/// gives K + order - 2 B-splines on [tau_1, tau_K].
class KnotVector {
 public:
  KnotVector(std::vector<double> breakpoints, int order);

  int order() const { return order_; }
  int size() const { return static_cast<int>(breakpoints_.size()); }
  int n_basis() const { return static_cast<int>(padded_.size()) - order_; }
  double lo() const { return breakpoints_.front(); }
  double hi() const { return breakpoints_.back(); }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& padded() const { return padded_; }

  /// Index s into padded() with t[s] <= x < t[s+1]; the last nonempty
  /// interval is closed on the right. Throws DomainError outside [lo, hi].
  int span(double x) const;

  /// Support of B-spline k (1-based) as [padded[k-1], padded[k-1+order]].
  double support_lo(int k) const { return padded_[k - 1]; }
  double support_hi(int k) const { return padded_[k - 1 + order_]; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> padded_;
  int order_;
};

/// Values of the `order` B-splines that are nonzero on interval `span`
/// (0-based spline indices span-order+1 .. span), written to `out`.
void basis_funs(const KnotVector& knots, int span, double x, double* out);

/// B_{(j,k)}(x), 1-based k in [1, n_basis].
double bspline_eval(const KnotVector& knots, int k, double x);

/// prod_h (x - alpha_h).
double alpha_poly(std::span<const double> alpha, double x);

/// Knot vector + change points + signed scale. Construction precomputes the
/// exact per-interval integrals used by every evaluation routine.
class LxBasis {
 public:
  LxBasis(KnotVector knots, std::vector<double> alpha, double m);

  const KnotVector& knots() const { return knots_; }
  const std::vector<double>& alpha() const { return alpha_; }
  double m() const { return m_; }
  int order() const { return knots_.order(); }
  int n_basis() const { return knots_.n_basis(); }
  /// Intercept plus n_basis() local extrema splines.
  int n_columns() const { return n_basis() + 1; }
  /// Gauss-Legendre points per knot interval; exact for the integrand degree.
  int quadrature_points() const { return n_quad_; }

  /// M * integral over the full support of G * B_k (1-based k).
  double total_integral(int k) const { return m_ * cum_[k - 1].back(); }

  /// Writes B*_1(x) .. B*_{n_basis}(x) to `row` for x in interval `span`.
  void eval_span(int span, double x, double* row) const;

 private:
  KnotVector knots_;
  std::vector<double> alpha_;
  double m_;
  int n_quad_;
  // cum_[k][q]: integral of G*B_{k+1} from its support start to the end of
  // its q-th support interval.
  std::vector<std::vector<double>> cum_;

  void partial_integrals(int span, double x, double* partial) const;
};

/// B*_{(j,k)}(x); k = 0 is the intercept (identically 1).
double lx_basis_eval(const LxBasis& basis, int k, double x);

/// f'(x) = M prod_h (x - alpha_h) sum_{k>=1} beta_k B_k(x); coeffs[0] is the
/// intercept. Throws ConstraintError when a non-intercept weight is negative.
double lx_derivative_eval(const LxBasis& basis, const Eigen::VectorXd& coeffs, double x);

/// sum_{k>=1} beta_k B_k(x), the nonnegative factor of the derivative.
double bspline_combination(const LxBasis& basis, const Eigen::VectorXd& coeffs, double x);

/// n x n_columns() matrix; column 0 is the intercept.
Eigen::MatrixXd lx_design_matrix(const LxBasis& basis, std::span<const double> xs);

/// Single column k (1-based) of the design matrix.
Eigen::VectorXd lx_column(const LxBasis& basis, int k, std::span<const double> xs);

/// Piecewise polynomial in local monomials: on [breaks[p], breaks[p+1]] the
/// value is sum_d coeffs[p][d] * (x - breaks[p])^d. Zero to the left, `tail`
/// to the right.
struct PiecewisePoly {
  std::vector<double> breaks;
  std::vector<Eigen::VectorXd> coeffs;
  double tail = 0.0;  // value to the right of breaks.back()

  double operator()(double x) const;
  /// Continuous antiderivative that vanishes at breaks.front() and stays
  /// constant to the right of breaks.back().
  PiecewisePoly antiderivative() const;
  double integral() const;
};

/// Exact piecewise polynomial form of M * G(x) * B_k(x) over the support of
/// B_k (1-based k).
PiecewisePoly lx_integrand(const LxBasis& basis, int k);

}  // namespace lxs
