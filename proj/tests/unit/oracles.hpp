#pragma once

// Test-side reference implementations, written without the library's
// evaluation code paths.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

/// Clamped knot vector: end knots repeated `order` times.
inline std::vector<double> clamped(const std::vector<double>& breaks, int order) {
  std::vector<double> t(order - 1, breaks.front());
  t.insert(t.end(), breaks.begin(), breaks.end());
  t.insert(t.end(), order - 1, breaks.back());
  return t;
}

/// Cox-de Boor recursion with the order-1 indicator pinned to interval p of
/// the clamped vector, giving the exact polynomial piece on that interval.
inline double cox_de_boor_piece(const std::vector<double>& t, int i, int order, int p, double x) {
  if (order == 1) return i == p ? 1.0 : 0.0;
  double v = 0.0;
  const double d1 = t[i + order - 1] - t[i];
  const double d2 = t[i + order] - t[i + 1];
  if (d1 > 0.0) v += (x - t[i]) / d1 * cox_de_boor_piece(t, i, order - 1, p, x);
  if (d2 > 0.0) v += (t[i + order] - x) / d2 * cox_de_boor_piece(t, i + 1, order - 1, p, x);
  return v;
}

/// Interval index p with t[p] <= x < t[p+1], right end closed.
inline int interval_of(const std::vector<double>& t, double x) {
  int p = -1;
  for (int q = 0; q + 1 < static_cast<int>(t.size()); ++q) {
    if (t[q] < t[q + 1] && t[q] <= x && (x < t[q + 1] || x == t.back())) p = q;
  }
  return p;
}

/// B-spline i (0-based) of the clamped vector at x.
inline double bspline(const std::vector<double>& t, int i, int order, double x) {
  return cox_de_boor_piece(t, i, order, interval_of(t, x), x);
}

inline double poly(const std::vector<double>& alpha, double x) {
  double v = 1.0;
  for (double a : alpha) v *= (x - a);
  return v;
}

/// M * integral_{lo}^{x} prod (xi - alpha) B_i(xi) dxi by composite
/// trapezoid with `n_total` subintervals spread over the knot intervals.
inline double lx_trapezoid(const std::vector<double>& t, int i, int order,
                           const std::vector<double>& alpha, double m, double x, long n_total) {
  const double lo = t.front(), hi = std::min(x, t.back());
  if (hi <= lo) return 0.0;
  double total = 0.0;
  for (int p = 0; p + 1 < static_cast<int>(t.size()); ++p) {
    const double a = t[p], b = std::min(t[p + 1], hi);
    if (b <= a) continue;
    const long n = std::max<long>(2, static_cast<long>(n_total * (b - a) / (hi - lo)));
    const double h = (b - a) / static_cast<double>(n);
    double s = 0.0;
    for (long q = 0; q <= n; ++q) {
      const double xi = a + h * static_cast<double>(q);
      const double f = poly(alpha, xi) * cox_de_boor_piece(t, i, order, p, xi);
      s += (q == 0 || q == n) ? 0.5 * f : f;
    }
    total += s * h;
  }
  return m * total;
}

}  // namespace oracle
