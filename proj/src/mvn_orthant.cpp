#include "lxs/mvn_orthant.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "lxs/errors.hpp"

namespace lxs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::array<int, kMaxOrthantDim> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// Upper-bounded form: Y ~ N(0, C), P(Y < b). Rows of `l` hold the Cholesky
// factor of the reordered covariance, scaled so the diagonal is 1.
struct Factored {
  Eigen::MatrixXd l;
  Eigen::VectorXd b;
};

bool try_factor(Eigen::MatrixXd c, Eigen::VectorXd b, Factored& out) {
  const Eigen::Index d = c.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
  const double tiny = 1e-300;
  for (Eigen::Index i = 0; i < d; ++i) {
    // Variable with the smallest conditional probability goes next.
    Eigen::Index best = i;
    double best_val = kInf;
    for (Eigen::Index j = i; j < d; ++j) {
      const double s = c(j, j) - l.row(j).head(i).squaredNorm();
      if (!(s > tiny)) return false;
      const double t = (b[j] - l.row(j).head(i).dot(y.head(i))) / std::sqrt(s);
      const double v = norm_logcdf(t);
      if (v < best_val) best_val = v, best = j;
    }
    if (best != i) {
      c.row(i).swap(c.row(best));
      c.col(i).swap(c.col(best));
      l.row(i).swap(l.row(best));
      std::swap(b[i], b[best]);
    }
    const double s = c(i, i) - l.row(i).head(i).squaredNorm();
    if (!(s > tiny)) return false;
    const double lii = std::sqrt(s);
    l(i, i) = lii;
    for (Eigen::Index j = i + 1; j < d; ++j)
      l(j, i) = (c(j, i) - l.row(j).head(i).dot(l.row(i).head(i))) / lii;
    const double t = (b[i] - l.row(i).head(i).dot(y.head(i))) / lii;
    if (t == kInf) {
      y[i] = 0.0;
    } else if (t == -kInf) {
      y[i] = -kInf;
    } else {
      y[i] = -std::exp(norm_logpdf(t) - norm_logcdf(t));
    }
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lii = l(i, i);
    l.row(i).head(i + 1) /= lii;
    b[i] /= lii;
  }
  out = Factored{std::move(l), std::move(b)};
  return true;
}

Factored factor(const OrthantProblem& p) {
  const Eigen::VectorXd b = p.mean - p.lower;
  Factored f;
  if (try_factor(p.cov, b, f)) return f;
  const double jitter = 1e-10 * p.cov.diagonal().maxCoeff();
  Eigen::MatrixXd c = p.cov;
  c.diagonal().array() += jitter;
  if (try_factor(c, b, f)) return f;
  throw MatrixError("covariance is not positive definite");
}

// log of the separation-of-variables integrand at w in [0,1)^(d-1).
double sov_log_integrand(const Factored& f, const double* w, double* y) {
  const Eigen::Index d = f.b.size();
  double logf = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    double shift = 0.0;
    for (Eigen::Index k = 0; k < i; ++k) shift += f.l(i, k) * y[k];
    const double t = f.b[i] - shift;
    const double le = t == kInf ? 0.0 : norm_logcdf(t);
    logf += le;
    if (i + 1 < d) y[i] = norm_quantile_log(std::log(w[i]) + le);
  }
  return logf;
}

}  // namespace

void check_problem(const OrthantProblem& p) {
  const Eigen::Index d = p.mean.size();
  if (d < 1 || d > kMaxOrthantDim) throw MatrixError("orthant dimension must be in [1, 16]");
  if (p.cov.rows() != d || p.cov.cols() != d || p.lower.size() != d)
    throw MatrixError("orthant problem has inconsistent sizes");
  if (!p.mean.allFinite() || !p.cov.allFinite() || p.lower.hasNaN())
    throw MatrixError("orthant problem has non-finite entries");
  const double scale = std::max(1.0, p.cov.cwiseAbs().maxCoeff());
  if ((p.cov - p.cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw MatrixError("covariance is not symmetric");
  if ((p.cov.diagonal().array() <= 0.0).any()) throw MatrixError("covariance has a nonpositive diagonal");
}

OrthantResult orthant_prob(const OrthantProblem& p, Rng& rng, const OrthantOptions& opt) {
  check_problem(p);
  const Eigen::Index d = p.mean.size();
  OrthantResult res;
  if ((p.lower.array() == kInf).any()) {
    res.log_estimate = -kInf;
    return res;
  }
  if (d == 1) {
    const double t = (p.mean[0] - p.lower[0]) / std::sqrt(p.cov(0, 0));
    res.log_estimate = t == kInf ? 0.0 : norm_logcdf(t);
    res.estimate = std::exp(res.log_estimate);
    return res;
  }

  const Factored f = factor(p);
  const int dims = static_cast<int>(d) - 1;
  const int n_shift = std::max(opt.shifts, 2);
  std::vector<double> gen(dims), shifts(static_cast<std::size_t>(n_shift) * dims);
  for (int k = 0; k < dims; ++k) {
    const double r = std::sqrt(static_cast<double>(kPrimes[k]));
    gen[k] = r - std::floor(r);
  }
  for (double& s : shifts) s = uniform01(rng);

  std::vector<double> log_sums(n_shift, -kInf), w(dims), y(d);
  long done = 0;
  long target = std::max(opt.min_points, 1);
  while (true) {
    for (int s = 0; s < n_shift; ++s) {
      const double* sh = &shifts[static_cast<std::size_t>(s) * dims];
      for (long i = done + 1; i <= target; ++i) {
        for (int k = 0; k < dims; ++k) {
          double x = static_cast<double>(i) * gen[k] + sh[k];
          x -= std::floor(x);
          w[k] = std::clamp(std::abs(2.0 * x - 1.0), 1e-16, 1.0 - 1e-16);
        }
        log_sums[s] = log_add(log_sums[s], sov_log_integrand(f, w.data(), y.data()));
      }
    }
    done = target;

    const double log_n = std::log(static_cast<double>(done));
    const double mx = *std::max_element(log_sums.begin(), log_sums.end()) - log_n;
    double mean = 0.0, sq = 0.0;
    if (mx == -kInf) {
      res = OrthantResult{0.0, 0.0, -kInf, static_cast<int>(done)};
      return res;
    }
    for (double ls : log_sums) mean += std::exp(ls - log_n - mx);
    mean /= n_shift;
    for (double ls : log_sums) {
      const double v = std::exp(ls - log_n - mx) - mean;
      sq += v * v;
    }
    const double se = std::sqrt(sq / (n_shift * (n_shift - 1.0)));
    res.log_estimate = mx + std::log(mean);
    res.estimate = std::exp(res.log_estimate);
    res.error = std::exp(mx) * se;
    res.points = static_cast<int>(done);

    const bool ok = opt.rel_tol > 0.0 ? se <= opt.rel_tol * mean : res.error <= opt.abs_tol;
    if (ok || done >= opt.max_points) break;
    target = std::min<long>(2 * done, opt.max_points);
  }
  return res;
}

OrthantResult mc_oracle(const OrthantProblem& p, long n_samples, Rng& rng) {
  check_problem(p);
  if (n_samples < 1) throw DomainError("need at least one sample");
  const Eigen::Index d = p.mean.size();
  Eigen::LLT<Eigen::MatrixXd> llt(p.cov);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd c = p.cov;
    c.diagonal().array() += 1e-10 * p.cov.diagonal().maxCoeff();
    llt.compute(c);
    if (llt.info() != Eigen::Success) throw MatrixError("covariance is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::VectorXd z(d), x(d);
  long hits = 0;
  for (long s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = std_normal(rng);
    x.noalias() = p.mean + l * z;
    if (((x - p.lower).array() > 0.0).all()) ++hits;
  }
  OrthantResult res;
  res.estimate = static_cast<double>(hits) / static_cast<double>(n_samples);
  res.error = std::sqrt(res.estimate * (1.0 - res.estimate) / static_cast<double>(n_samples));
  res.log_estimate = std::log(res.estimate);
  res.points = static_cast<int>(std::min<long>(n_samples, std::numeric_limits<int>::max()));
  return res;
}

double bvn_upper(double h, double k, double r) {
  // Drezner-Wesolowsky with Genz's Gauss-Legendre refinements.
  if (h == kInf || k == kInf) return 0.0;
  if (h == -kInf) return k == -kInf ? 1.0 : norm_cdf(-k);
  if (k == -kInf) return norm_cdf(-h);
  if (r == 0.0) return norm_cdf(-h) * norm_cdf(-k);

  static constexpr double w6[] = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
  static constexpr double x6[] = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
  static constexpr double w12[] = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                   0.2031674267230659, 0.2334925365383547, 0.2491470458134029};
  static constexpr double x12[] = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                   0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
  static constexpr double w20[] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                   0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
                                   0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
                                   0.1527533871307259};
  static constexpr double x20[] = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                                   0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                                   0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                                   0.07652652113349733};
  const double* wp;
  const double* xp;
  int ng;
  if (std::abs(r) < 0.3) {
    wp = w6, xp = x6, ng = 3;
  } else if (std::abs(r) < 0.75) {
    wp = w12, xp = x12, ng = 6;
  } else {
    wp = w20, xp = x20, ng = 10;
  }
  const double tp = 2.0 * std::numbers::pi;
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(r);
    for (int i = 0; i < ng; ++i) {
      for (double xi : {1.0 - xp[i], 1.0 + xp[i]}) {
        const double sn = std::sin(asr * xi);
        bvn += wp[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / tp + norm_cdf(-h) * norm_cdf(-k);
  } else {
    if (r < 0.0) k = -k, hk = -hk;
    if (std::abs(r) < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      double asr = -0.5 * (bs / as + hk);
      const double c = (4.0 - hk) / 8.0;
      const double dd = (12.0 - hk) / 80.0;
      if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - dd * bs) / 3.0 + c * dd * as * as);
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(tp) * norm_cdf(-b / a);
        bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - dd * bs) / 3.0);
      }
      a *= 0.5;
      double acc = 0.0;
      for (int i = 0; i < ng; ++i) {
        for (double xi : {1.0 - xp[i], 1.0 + xp[i]}) {
          const double xs = (a * xi) * (a * xi);
          asr = -0.5 * (bs / xs + hk);
          if (asr <= -100.0) continue;
          const double sp = 1.0 + c * xs * (1.0 + 5.0 * dd * xs);
          const double rs = std::sqrt(1.0 - xs);
          const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
          acc += wp[i] * std::exp(asr) * (sp - ep);
        }
      }
      bvn = (a * acc - bvn) / tp;
    }
    if (r > 0.0) {
      bvn += norm_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double span = h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
      bvn = span - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

namespace {

// log of the integral of exp(g) over [lo, inf) for concave g with a finite
// maximum, integrated around the mode where g is within 40 of its peak.
template <class G>
double log_integral_concave(G g, double lo) {
  const double unit = 1.0 / std::max(1.0, std::abs(lo));
  double mode = lo, peak = g(lo);
  if (g(lo + 1e-6 * unit) > peak) {
    double a = lo, b = lo + unit, c = b;
    double gb = g(b);
    if (gb > peak) {
      double step = unit;
      while (true) {
        step *= 2.0;
        c = b + step;
        const double gc = g(c);
        if (!(gc > gb)) break;
        a = b, b = c, gb = gc;
        if (step > 1e6) return std::numeric_limits<double>::quiet_NaN();
      }
    }
    auto neg = [&](double x) { return -g(x); };
    boost::uintmax_t iters = 60;
    const auto [m, neg_peak] = boost::math::tools::brent_find_minima(neg, a, c, 24, iters);
    mode = m, peak = -neg_peak;
  }
  if (!std::isfinite(peak)) return peak;

  // Length scale from curvature, or from the slope when the mode is at lo.
  const double eps = 1e-4 * unit;
  double w;
  if (mode - eps >= lo) {
    const double curv = (2.0 * peak - g(mode + eps) - g(mode - eps)) / (eps * eps);
    w = curv > 0.0 ? 1.0 / std::sqrt(curv) : unit;
  } else {
    const double g1 = g(mode + eps), g2 = g(mode + 2.0 * eps);
    const double slope = (peak - g1) / eps, curv = (2.0 * g1 - peak - g2) / (eps * eps);
    w = std::min(slope > 0.0 ? 1.0 / slope : unit, curv > 0.0 ? 1.0 / std::sqrt(curv) : unit);
  }
  w = std::clamp(w, 1e-9, 1.0);
  // Where g falls 30 below the peak, by doubling then a few bisections.
  const double drop = peak - 30.0;
  auto edge = [&](double dir) {
    double in = mode, out = mode + dir * w;
    while (true) {
      if (dir < 0.0 && out <= lo) {
        if (g(lo) > drop) return lo;
        out = lo;
        break;
      }
      if (!(g(out) > drop)) break;
      in = out;
      out = mode + 2.0 * (out - mode);
    }
    for (int it = 0; it < 5; ++it) {
      const double mid = 0.5 * (in + out);
      (g(mid) > drop ? in : out) = mid;
    }
    return out;
  };
  const double right = edge(1.0);
  const double left = mode > lo ? edge(-1.0) : lo;
  auto f = [&](double x) { return std::exp(g(x) - peak); };
  using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;
  // One panel per side of the mode is usually far more accurate than its
  // error estimate says.
  double err = 0.0, e2 = 0.0, val = Rule::integrate(f, mode, right, 0, 0.0, &err);
  if (left < mode) val += Rule::integrate(f, left, mode, 0, 0.0, &e2);
  if (err + e2 > 1e-3 * val) val = Rule::integrate(f, left, right, 6, 1e-6, &err);
  return peak + std::log(val);
}

double log_bvn_integral(double h, double k, double r) {
  // The closed form is relatively accurate to ~1e-12 above 1e-3, far below
  // the nested quadrature tolerance.
  const double p = bvn_upper(h, k, r);
  if (p > 1e-3) return std::log(p);
  if (h == kInf || k == kInf) return -kInf;
  if (h < k) std::swap(h, k);
  if (k == -kInf) return norm_logcdf(-h);
  const double s2 = 1.0 - r * r;
  if (!(s2 > 1e-14)) {
    if (r > 0.0) return norm_logcdf(-h);
    // X > h and X < -k
    if (!(h < -k)) return -kInf;
    const double hi = norm_logcdf(-h), lo = norm_logcdf(k);
    return hi + std::log1p(-std::exp(lo - hi));
  }
  const double s = std::sqrt(s2);
  return log_integral_concave([&](double x) { return norm_logpdf(x) + norm_logcdf((r * x - k) / s); }, h);
}

}  // namespace

double log_bvn_upper(double h, double k, double r) {
  const double p = bvn_upper(h, k, r);
  return p > 1e-6 ? std::log(p) : log_bvn_integral(h, k, r);
}

namespace {

double bvn_density(double x, double y, double r) {
  const double s2 = 1.0 - r * r;
  return std::exp(-(x * x - 2.0 * r * x * y + y * y) / (2.0 * s2)) / (2.0 * std::numbers::pi * std::sqrt(s2));
}

// P(Y < c) for the standard trivariate normal by Plackett's identity: the two
// correlations touching w move from 0 to their values, r(u, v) stays put.
double tvn_plackett(const Eigen::Vector3d& c, const Eigen::Matrix3d& r, int w, int u, int v, double& err) {
  const double rwu = r(w, u), rwv = r(w, v), ruv = r(u, v);
  const double base = norm_cdf(c[w]) * bvn_upper(-c[u], -c[v], ruv);
  auto cond = [&](double rho_a, double rho_b, double ca, double cb) {
    // Phi of the third variable given Y_w = c_w and the variable with
    // correlation rho_a to w sitting at ca; rho_b couples w to the third.
    const double d = 1.0 - rho_a * rho_a;
    const double mu = (c[w] * (rho_b - rho_a * ruv) + ca * (ruv - rho_a * rho_b)) / d;
    const double var = 1.0 - (rho_b * rho_b + ruv * ruv - 2.0 * rho_a * rho_b * ruv) / d;
    if (!(var > 0.0)) return cb >= mu ? 1.0 : 0.0;
    return norm_cdf((cb - mu) / std::sqrt(var));
  };
  auto deriv = [&](double t) {
    const double a = t * rwu, b = t * rwv;
    double out = 0.0;
    if (rwu != 0.0) out += rwu * bvn_density(c[w], c[u], a) * cond(a, b, c[u], c[v]);
    if (rwv != 0.0) out += rwv * bvn_density(c[w], c[v], b) * cond(b, a, c[v], c[u]);
    return out;
  };
  const double inc = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(deriv, 0.0, 1.0, 10, 1e-10, &err);
  return base + inc;
}

}  // namespace

double log_tvn_upper(const Eigen::Vector3d& h, const Eigen::Matrix3d& r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  int p = 0;
  for (int i = 1; i < 3; ++i)
    if (h[i] > h[p]) p = i;
  if (h[p] == kInf) return -kInf;
  if (h[p] == -kInf) return nan;
  const int a = (p + 1) % 3, b = (p + 2) % 3;
  const double ra = r(a, p), rb = r(b, p);
  const double sa2 = 1.0 - ra * ra, sb2 = 1.0 - rb * rb;
  if (!(sa2 > 1e-12 && sb2 > 1e-12)) return nan;
  const double sa = std::sqrt(sa2), sb = std::sqrt(sb2);
  const double rab = (r(a, b) - ra * rb) / (sa * sb);
  if (!(std::abs(rab) < 1.0)) return nan;
  if (h.allFinite()) {
    // Keep the strongest correlation fixed.
    int w = 0;
    double best = std::abs(r(1, 2));
    if (std::abs(r(0, 2)) > best) w = 1, best = std::abs(r(0, 2));
    if (std::abs(r(0, 1)) > best) w = 2;
    double err = 0.0;
    const double prob = tvn_plackett(-h, r, w, (w + 1) % 3, (w + 2) % 3, err);
    if (prob > 1e-6 && err <= 1e-7 * prob) return std::log(prob);
  }
  return log_integral_concave(
      [&](double z) { return norm_logpdf(z) + log_bvn_integral((h[a] - ra * z) / sa, (h[b] - rb * z) / sb, rab); },
      h[p]);
}

}  // namespace lxs
