#pragma once

// Test-only reference computations. None of these call the code under test.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Core>

namespace oracle {

inline double phi_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

template <class F>
double integrate(F&& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

// int_0^inf f via x = t^2.
template <class F>
double integrate_half_line(F&& f) {
  return integrate([&](double t) { return t > 0.0 ? 2.0 * t * f(t * t) : 0.0; }, 0.0,
                   std::numeric_limits<double>::infinity());
}

// Closed-form inverse Gaussian CDF.
inline double ig_cdf(double x, double mu, double lambda) {
  if (x <= 0.0) return 0.0;
  const double s = std::sqrt(lambda / x);
  return phi_cdf(s * (x / mu - 1.0)) + std::exp(2.0 * lambda / mu) * phi_cdf(-s * (x / mu + 1.0));
}

// Largest gap between the empirical CDF of `xs` and `cdf`.
template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf&& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double f = cdf(xs[k]);
    d = std::max({d, std::abs(f - static_cast<double>(k) / n), std::abs(static_cast<double>(k + 1) / n - f)});
  }
  return d;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// 2x2 inverse by cofactors.
inline Eigen::Matrix2d inverse2(const Eigen::Matrix2d& m) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Eigen::Matrix2d inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

// Average ranks (ties share the mean rank).
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t k = 0;
  while (k < idx.size()) {
    std::size_t e = k;
    while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[k]]) ++e;
    const double avg = 0.5 * static_cast<double>(k + e) + 1.0;
    for (std::size_t q = k; q <= e; ++q) r[idx[q]] = avg;
    k = e + 1;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

// P(gamma = 1) for p = 1 from explicit 1-D integrals over beta:
//   gamma = 1: pi * int N(beta; 0, v) exp(-P beta^2 / 2 + b beta) dbeta
//   gamma = 0: (1 - pi) * 1
inline double inclusion_by_enumeration(double P, double b, double v, double pi) {
  const double peak = b / (P + 1.0 / v);
  const double scale = 1.0 / std::sqrt(P + 1.0 / v);
  const auto f = [&](double beta) {
    return std::exp(-0.5 * beta * beta / v - 0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * P * beta * beta +
                    b * beta - (-0.5 * P * peak * peak + b * peak));
  };
  const double in = pi * integrate(f, peak - 40.0 * scale, peak + 40.0 * scale);
  const double out = (1.0 - pi) * std::exp(-(-0.5 * P * peak * peak + b * peak));
  return in / (in + out);
}

}  // namespace oracle
