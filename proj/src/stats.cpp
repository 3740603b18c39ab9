#include "brforest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "brforest/dataset.hpp"

namespace brf {

namespace {

// Continued fraction for the incomplete beta function (Lentz).
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  constexpr int kMaxIter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to working precision anyway for our a,b ranges
}

// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_sf(double t, int dof) {
  if (dof < 1) throw DataError("student_t_sf: dof must be >= 1");
  if (std::isnan(t)) throw DataError("student_t_sf: non-finite t");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double v = static_cast<double>(dof);
  const double x = v / (v + t * t);
  const double half_tail = 0.5 * beta_inc(v / 2.0, 0.5, x);
  return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

TestResult paired_t_greater(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("paired_t_greater: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw DataError("paired_t_greater: need at least 2 pairs");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
      throw DataError("paired_t_greater: non-finite input");

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);

  bool all_equal = true;
  for (double v : d)
    if (v != d[0]) {
      all_equal = false;
      break;
    }

  TestResult r;
  r.dof = static_cast<int>(n) - 1;
  if (all_equal) {
    if (d[0] > 0.0) {
      r.t_statistic = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    } else if (d[0] < 0.0) {
      r.t_statistic = -std::numeric_limits<double>::infinity();
      r.p_value = 1.0;
    } else {
      r.t_statistic = 0.0;
      r.p_value = 0.5;
    }
    return r;
  }

  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = student_t_sf(r.t_statistic, r.dof);
  return r;
}

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("spearman_rho: length mismatch");
  if (x.size() < 2) throw DataError("spearman_rho: need at least 2 points");

  auto constant = [](std::span<const double> v) {
    for (double e : v)
      if (e != v[0]) return false;
    return true;
  };
  if (constant(x) || constant(y)) throw DataError("spearman_rho: undefined correlation (constant input)");

  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace brf
