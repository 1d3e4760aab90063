#pragma once

// Chebyshev interpolation on [-R, R] and root finding through the colleague matrix.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace specband::cheb {

/// Coefficients c_0..c_deg of sum c_j T_j(x / R) interpolating f at deg+1 first-kind Chebyshev points.
/// Exact (up to rounding) when f is a polynomial of degree <= deg.
inline std::vector<double> interpolate(const std::function<double(double)>& f, std::size_t deg, double R) {
  const std::size_t n = deg + 1;
  std::vector<double> theta(n), fx(n);
  for (std::size_t k = 0; k < n; ++k) {
    theta[k] = std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    fx[k] = f(R * std::cos(theta[k]));
  }
  std::vector<double> c(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += fx[k] * std::cos(static_cast<double>(j) * theta[k]);
    c[j] = 2.0 * s / static_cast<double>(n);
  }
  c[0] *= 0.5;
  return c;
}

/// Clenshaw evaluation of sum c_j T_j(x / R).
inline double evaluate(const std::vector<double>& c, double x, double R) {
  const double y = x / R;
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = c.size(); j-- > 1;) {
    const double b0 = 2.0 * y * b1 - b2 + c[j];
    b2 = b1;
    b1 = b0;
  }
  return (c.empty() ? 0.0 : c[0]) + y * b1 - b2;
}

/// Coefficients of d/dx of sum c_j T_j(x / R).
inline std::vector<double> derivative(const std::vector<double>& c, double R) {
  const std::size_t n = c.size();
  if (n <= 1) return {0.0};
  std::vector<double> d(n - 1, 0.0);
  // d_{k-1} = d_{k+1} + 2k c_k, run downward.
  std::vector<double> tmp(n + 1, 0.0);
  for (std::size_t k = n - 1; k >= 1; --k) {
    tmp[k - 1] = tmp[k + 1] + 2.0 * static_cast<double>(k) * c[k];
    if (k == 1) break;
  }
  for (std::size_t k = 0; k + 1 < n; ++k) d[k] = tmp[k] / R;
  d[0] *= 0.5;
  return d;
}

/// Leading monomial coefficient of sum_{j<=deg} c_j T_j(x / R), taken at the declared degree.
inline double leading_monomial(const std::vector<double>& c, double R) {
  const std::size_t deg = c.size() - 1;
  if (deg == 0) return c[0];
  return c[deg] * std::ldexp(1.0, static_cast<int>(deg) - 1) / std::pow(R, static_cast<double>(deg));
}

/// Real roots of sum c_j T_j(x / R) inside [-R, R] (slightly widened), sorted.
/// Trailing coefficients below `trim_tol` times the largest are dropped first.
inline std::vector<double> real_roots(std::vector<double> c, double R, double imag_tol = 1e-6,
                                      double trim_tol = 1e-13) {
  double cmax = 0.0;
  for (double v : c) cmax = std::max(cmax, std::abs(v));
  if (cmax == 0.0) return {};
  while (c.size() > 1 && std::abs(c.back()) <= trim_tol * cmax) c.pop_back();
  const std::size_t d = c.size() - 1;
  std::vector<double> roots;
  if (d == 0) return roots;
  if (d == 1) {
    roots.push_back(-c[0] / c[1]);
  } else {
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    C(0, 1) = 1.0;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      C(i, i - 1) = 0.5;
      C(i, i + 1) = 0.5;
    }
    for (Eigen::Index j = 0; j < n; ++j) C(n - 1, j) -= c[static_cast<std::size_t>(j)] / (2.0 * c[d]);
    C(n - 1, n - 2) += 0.5;
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ev = es.eigenvalues()(i);
      if (std::abs(ev.imag()) <= imag_tol) roots.push_back(ev.real());
    }
  }
  std::vector<double> out;
  for (double y : roots)
    if (std::abs(y) <= 1.0 + 1e-8) out.push_back(R * y);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace specband::cheb
