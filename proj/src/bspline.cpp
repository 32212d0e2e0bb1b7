#include "lxs/bspline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lxs/errors.hpp"
#include "lxs/quadrature.hpp"

namespace lxs {

KnotVector::KnotVector(std::vector<double> breakpoints, int order)
    : breakpoints_(std::move(breakpoints)), order_(order) {
  if (order_ < 1 || order_ > kMaxOrder)
    throw DomainError("spline order must be in [1, " + std::to_string(kMaxOrder) + "]");
  if (breakpoints_.size() < 2) throw DomainError("knot vector needs at least two knots");
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()))
    throw DomainError("knots must be sorted");
  if (!(breakpoints_.front() < breakpoints_.back()))
    throw DomainError("knot vector needs two distinct end knots");
  for (double t : breakpoints_)
    if (!std::isfinite(t)) throw DomainError("knots must be finite");
  // Interior knots strictly inside, multiplicity below the order.
  const double lo = breakpoints_.front(), hi = breakpoints_.back();
  for (std::size_t i = 1; i + 1 < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > lo && breakpoints_[i] < hi))
      throw DomainError("interior knots must lie strictly between the end knots");
  }
  padded_.reserve(breakpoints_.size() + 2 * (order_ - 1));
  padded_.insert(padded_.end(), order_ - 1, lo);
  padded_.insert(padded_.end(), breakpoints_.begin(), breakpoints_.end());
  padded_.insert(padded_.end(), order_ - 1, hi);
}

int KnotVector::span(double x) const {
  const double lo = this->lo(), hi = this->hi();
  const double tol = 1e-12 * (hi - lo);
  if (!(x >= lo - tol && x <= hi + tol)) {
    std::ostringstream os;
    os << "x = " << x << " outside knot span [" << lo << ", " << hi << "]";
    throw DomainError(os.str());
  }
  const auto& t = padded_;
  const int nb = n_basis();
  if (x >= t[nb]) {
    int s = nb - 1;
    while (s > order_ - 1 && t[s] == t[s + 1]) --s;
    return s;
  }
  if (x <= t[order_ - 1]) x = t[order_ - 1];
  const auto it = std::upper_bound(t.begin() + (order_ - 1), t.begin() + nb, x);
  return static_cast<int>(it - t.begin()) - 1;
}

void basis_funs(const KnotVector& knots, int span, double x, double* out) {
  const auto& t = knots.padded();
  const int p = knots.order() - 1;
  std::array<double, kMaxOrder> left{}, right{};
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - t[span + 1 - j];
    right[j] = t[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

double bspline_eval(const KnotVector& knots, int k, double x) {
  if (k < 1 || k > knots.n_basis())
    throw IndexError("B-spline index " + std::to_string(k) + " outside [1, " +
                     std::to_string(knots.n_basis()) + "]");
  const int s = knots.span(x);
  const int first = s - knots.order() + 1;
  const int r = (k - 1) - first;
  if (r < 0 || r >= knots.order()) return 0.0;
  std::array<double, kMaxOrder> vals{};
  basis_funs(knots, s, std::clamp(x, knots.lo(), knots.hi()), vals.data());
  return vals[r];
}

double alpha_poly(std::span<const double> alpha, double x) {
  double g = 1.0;
  for (double a : alpha) g *= (x - a);
  return g;
}

LxBasis::LxBasis(KnotVector knots, std::vector<double> alpha, double m)
    : knots_(std::move(knots)), alpha_(std::move(alpha)), m_(m) {
  if (!(m_ != 0.0) || !std::isfinite(m_)) throw DomainError("M must be a nonzero finite scale");
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    if (!std::isfinite(alpha_[i])) throw DomainError("change points must be finite");
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(alpha_[i] - alpha_[j]) < kMinAlphaSeparation)
        throw DegenerateAlphaError("change points closer than the minimum separation");
    }
  }
  const int j = order();
  const int h = static_cast<int>(alpha_.size());
  n_quad_ = (j + h + 2) / 2;  // ceil((j + H + 1) / 2)

  const auto& t = knots_.padded();
  const int nb = n_basis();
  cum_.assign(nb, std::vector<double>(j, 0.0));
  std::array<double, kMaxOrder> part{};
  for (int s = j - 1; s <= nb - 1; ++s) {
    if (t[s + 1] > t[s]) {
      partial_integrals(s, t[s + 1], part.data());
    } else {
      part.fill(0.0);
    }
    const int first = s - j + 1;
    for (int r = 0; r < j; ++r) {
      const int k = first + r;
      const int q = s - k;
      cum_[k][q] = part[r];
    }
  }
  for (auto& c : cum_)
    for (int q = 1; q < j; ++q) c[q] += c[q - 1];
}

void LxBasis::partial_integrals(int span, double x, double* partial) const {
  const int j = order();
  const double a = knots_.padded()[span];
  const double half = 0.5 * (x - a);
  for (int r = 0; r < j; ++r) partial[r] = 0.0;
  if (half <= 0.0) return;
  const auto& rule = gauss_legendre_cached(n_quad_);
  std::array<double, kMaxOrder> vals{};
  for (int q = 0; q < n_quad_; ++q) {
    const double xi = a + half * (1.0 + rule.nodes[q]);
    basis_funs(knots_, span, xi, vals.data());
    const double wg = rule.weights[q] * half * alpha_poly(alpha_, xi);
    for (int r = 0; r < j; ++r) partial[r] += wg * vals[r];
  }
}

void LxBasis::eval_span(int span, double x, double* row) const {
  const int j = order();
  const int nb = n_basis();
  const int first = span - j + 1;
  for (int k = 0; k < first; ++k) row[k] = m_ * cum_[k].back();
  std::array<double, kMaxOrder> part{};
  partial_integrals(span, x, part.data());
  for (int r = 0; r < j; ++r) {
    const int k = first + r;
    const int q = span - k;
    row[k] = m_ * ((q > 0 ? cum_[k][q - 1] : 0.0) + part[r]);
  }
  for (int k = span + 1; k < nb; ++k) row[k] = 0.0;
}

double lx_basis_eval(const LxBasis& basis, int k, double x) {
  if (k < 0 || k > basis.n_basis())
    throw IndexError("basis index " + std::to_string(k) + " outside [0, " +
                     std::to_string(basis.n_basis()) + "]");
  const int s = basis.knots().span(x);
  if (k == 0) return 1.0;
  std::vector<double> row(basis.n_basis());
  basis.eval_span(s, std::clamp(x, basis.knots().lo(), basis.knots().hi()), row.data());
  return row[k - 1];
}

double bspline_combination(const LxBasis& basis, const Eigen::VectorXd& coeffs, double x) {
  if (coeffs.size() != basis.n_columns())
    throw DomainError("coefficient vector length does not match the basis");
  const auto& knots = basis.knots();
  const int s = knots.span(x);
  std::array<double, kMaxOrder> vals{};
  basis_funs(knots, s, std::clamp(x, knots.lo(), knots.hi()), vals.data());
  const int first = s - basis.order() + 1;
  double acc = 0.0;
  for (int r = 0; r < basis.order(); ++r) acc += coeffs[first + r + 1] * vals[r];
  return acc;
}

double lx_derivative_eval(const LxBasis& basis, const Eigen::VectorXd& coeffs, double x) {
  if (coeffs.size() != basis.n_columns())
    throw DomainError("coefficient vector length does not match the basis");
  for (Eigen::Index k = 1; k < coeffs.size(); ++k) {
    if (coeffs[k] < 0.0)
      throw ConstraintError("coefficient " + std::to_string(k) + " is negative");
  }
  return basis.m() * alpha_poly(basis.alpha(), x) * bspline_combination(basis, coeffs, x);
}

Eigen::MatrixXd lx_design_matrix(const LxBasis& basis, std::span<const double> xs) {
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  const int nb = basis.n_basis();
  // Row-major scratch keeps eval_span writes contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(n, nb + 1);
  const auto& knots = basis.knots();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int s = knots.span(xs[i]);
    out(i, 0) = 1.0;
    basis.eval_span(s, std::clamp(xs[i], knots.lo(), knots.hi()), &out(i, 1));
  }
  return out;
}

Eigen::VectorXd lx_column(const LxBasis& basis, int k, std::span<const double> xs) {
  if (k < 1 || k > basis.n_basis()) throw IndexError("basis index out of range");
  const auto& knots = basis.knots();
  const int j = basis.order();
  Eigen::VectorXd col(static_cast<Eigen::Index>(xs.size()));
  std::vector<double> row(basis.n_basis());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const int s = knots.span(xs[i]);
    const int first = s - j + 1;
    if (k - 1 < first) {
      col[i] = basis.total_integral(k);
    } else if (k - 1 > s) {
      col[i] = 0.0;
    } else {
      basis.eval_span(s, std::clamp(xs[i], knots.lo(), knots.hi()), row.data());
      col[i] = row[k - 1];
    }
  }
  return col;
}

double PiecewisePoly::operator()(double x) const {
  if (breaks.empty() || x < breaks.front()) return 0.0;
  if (x > breaks.back()) return tail;
  auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  std::size_t p = static_cast<std::size_t>(it - breaks.begin());
  p = std::min(p == 0 ? 0 : p - 1, coeffs.size() - 1);
  const double u = x - breaks[p];
  const auto& c = coeffs[p];
  double acc = 0.0;
  for (Eigen::Index d = c.size() - 1; d >= 0; --d) acc = acc * u + c[d];
  return acc;
}

PiecewisePoly PiecewisePoly::antiderivative() const {
  PiecewisePoly out;
  out.breaks = breaks;
  double running = 0.0;
  for (std::size_t p = 0; p < coeffs.size(); ++p) {
    const auto& c = coeffs[p];
    Eigen::VectorXd a(c.size() + 1);
    a[0] = running;
    for (Eigen::Index d = 0; d < c.size(); ++d) a[d + 1] = c[d] / static_cast<double>(d + 1);
    const double h = breaks[p + 1] - breaks[p];
    double end = 0.0;
    for (Eigen::Index d = a.size() - 1; d >= 0; --d) end = end * h + a[d];
    running = end;
    out.coeffs.push_back(std::move(a));
  }
  out.tail = running;
  return out;
}

double PiecewisePoly::integral() const { return antiderivative().tail; }

namespace {

Eigen::VectorXd poly_mul(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

}  // namespace

PiecewisePoly lx_integrand(const LxBasis& basis, int k) {
  if (k < 1 || k > basis.n_basis()) throw IndexError("basis index out of range");
  const auto& knots = basis.knots();
  const auto& t = knots.padded();
  const int j = basis.order();
  PiecewisePoly out;
  std::array<double, kMaxOrder> vals{};
  for (int s = k - 1; s < k - 1 + j; ++s) {
    if (!(t[s + 1] > t[s])) continue;
    const double a = t[s], h = t[s + 1] - t[s];
    // Interpolate B_k on the interval at Chebyshev points in v = (x - a) / h.
    Eigen::MatrixXd vander(j, j);
    Eigen::VectorXd rhs(j);
    for (int i = 0; i < j; ++i) {
      const double v = 0.5 * (1.0 + std::cos(std::numbers::pi * (2 * i + 1) / (2.0 * j)));
      basis_funs(knots, s, a + h * v, vals.data());
      rhs[i] = vals[(k - 1) - (s - j + 1)];
      double pw = 1.0;
      for (int d = 0; d < j; ++d, pw *= v) vander(i, d) = pw;
    }
    Eigen::VectorXd cv = vander.fullPivLu().solve(rhs);
    Eigen::VectorXd cu(j);
    double scale = 1.0;
    for (int d = 0; d < j; ++d, scale /= h) cu[d] = cv[d] * scale;
    Eigen::VectorXd g = Eigen::VectorXd::Constant(1, basis.m());
    for (double al : basis.alpha()) {
      Eigen::Vector2d lin(a - al, 1.0);
      g = poly_mul(g, lin);
    }
    if (out.breaks.empty()) out.breaks.push_back(a);
    out.breaks.push_back(t[s + 1]);
    out.coeffs.push_back(poly_mul(g, cu));
  }
  return out;
}

}  // namespace lxs
