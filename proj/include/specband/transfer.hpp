#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "specband/chebyshev.hpp"
#include "specband/errors.hpp"
#include "specband/operator.hpp"

namespace specband {

struct Mat2 {
  double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;

  static constexpr Mat2 identity() { return {}; }
  static constexpr Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }

  double det() const { return m11 * m22 - m12 * m21; }
  double trace() const { return m11 + m22; }

  friend Mat2 operator*(const Mat2& l, const Mat2& r) {
    return {l.m11 * r.m11 + l.m12 * r.m21, l.m11 * r.m12 + l.m12 * r.m22,
            l.m21 * r.m11 + l.m22 * r.m21, l.m21 * r.m12 + l.m22 * r.m22};
  }
  friend Mat2 operator+(const Mat2& l, const Mat2& r) {
    return {l.m11 + r.m11, l.m12 + r.m12, l.m21 + r.m21, l.m22 + r.m22};
  }
  friend Mat2 operator*(double s, const Mat2& m) { return {s * m.m11, s * m.m12, s * m.m21, s * m.m22}; }

  double max_abs() const {
    return std::max(std::max(std::abs(m11), std::abs(m12)), std::max(std::abs(m21), std::abs(m22)));
  }
};

/// One-step matrix (1/a) [[x - b, -1], [a^2, 0]].
inline Mat2 step_matrix(double a, double b, double x) {
  if (!(a > 0.0)) throw Error(ErrorCode::NonPositiveHopping, "step_matrix needs a > 0, got " + std::to_string(a));
  return {(x - b) / a, -1.0 / a, a, 0.0};
}

/// T_n(x) = A(a_n, b_n, x) ... A(a_1, b_1, x); T_0 is the identity.
inline Mat2 transfer_matrix(const JacobiOperator& J, std::size_t n, double x) {
  Mat2 t = Mat2::identity();
  for (std::size_t k = 1; k <= n; ++k) t = step_matrix(J.a_at(k), J.b_at(k), x) * t;
  return t;
}

namespace detail {

/// rho_0..rho_count from rho_0 = 0, rho_1 = 1, rho_{l+1} = delta rho_l - rho_{l-1}.
inline std::vector<double> rho_values(double delta, std::size_t count) {
  std::vector<double> r(count + 1, 0.0);
  if (count >= 1) r[1] = 1.0;
  for (std::size_t l = 1; l < count; ++l) r[l + 1] = delta * r[l] - r[l - 1];
  return r;
}

}  // namespace detail

/// Monodromy T_q(x) with derivatives in x up to order 4 (entries are polynomials of degree <= q).
struct MonodromyJet {
  std::array<Mat2, 5> d{};  // d[k] = k-th derivative of T_q at x

  double delta(std::size_t k = 0) const { return d[k].trace(); }
};

/// Evaluators for the monodromy entries and the discriminant, plus their Chebyshev forms on [-R, R].
class MonodromyData {
 public:
  explicit MonodromyData(JacobiOperator J) : op_(std::move(J)) {
    R_ = norm_bound(op_) + 1.0;
    const std::size_t q = op_.period();
    c11_ = cheb::interpolate([this](double x) { return entries(x).m11; }, q, R_);
    c12_ = cheb::interpolate([this](double x) { return entries(x).m12; }, q, R_);
    c21_ = cheb::interpolate([this](double x) { return entries(x).m21; }, q, R_);
    c22_ = cheb::interpolate([this](double x) { return entries(x).m22; }, q, R_);
    cdelta_ = cheb::interpolate([this](double x) { return delta(x); }, q, R_);
  }

  const JacobiOperator& op() const { return op_; }
  std::size_t period() const { return op_.period(); }
  /// Half-width of the bracketing interval [-R, R].
  double bracket() const { return R_; }

  Mat2 entries(double x) const { return transfer_matrix(op_, op_.period(), x); }
  double t11(double x) const { return entries(x).m11; }
  double t12(double x) const { return entries(x).m12; }
  double t21(double x) const { return entries(x).m21; }
  double t22(double x) const { return entries(x).m22; }
  double delta(double x) const { return entries(x).trace(); }

  /// Forward-mode derivatives of the period product; A(x) is affine in x with dA/dx = (1/a) e11.
  MonodromyJet jet(double x) const {
    MonodromyJet j;
    j.d[0] = Mat2::identity();
    for (std::size_t k = 1; k < 5; ++k) j.d[k] = Mat2::zero();
    for (std::size_t n = 1; n <= op_.period(); ++n) {
      const double a = op_.a_at(n);
      const Mat2 A = step_matrix(a, op_.b_at(n), x);
      const Mat2 dA{1.0 / a, 0.0, 0.0, 0.0};
      std::array<Mat2, 5> next;
      for (std::size_t k = 0; k < 5; ++k) {
        next[k] = A * j.d[k];
        if (k >= 1) next[k] = next[k] + static_cast<double>(k) * (dA * j.d[k - 1]);
      }
      j.d = next;
    }
    return j;
  }

  double delta_derivative(double x, std::size_t order) const { return jet(x).delta(order); }

  const std::vector<double>& cheb_t11() const { return c11_; }
  const std::vector<double>& cheb_t12() const { return c12_; }
  const std::vector<double>& cheb_t21() const { return c21_; }
  const std::vector<double>& cheb_t22() const { return c22_; }
  const std::vector<double>& cheb_delta() const { return cdelta_; }

 private:
  JacobiOperator op_;
  double R_ = 0.0;
  std::vector<double> c11_, c12_, c21_, c22_, cdelta_;
};

inline MonodromyData monodromy(const JacobiOperator& J) { return MonodromyData(J); }

/// T_{sq}(x) = [[t11 rho_s - rho_{s-1}, t12 rho_s], [t21 rho_s, rho_{s+1} - t11 rho_s]] for |Delta(x)| < 2,
/// i.e. T^s = rho_s T - rho_{s-1} I for a unimodular T.
inline Mat2 power_via_rho(const MonodromyData& M, std::size_t s, double x) {
  const Mat2 T = M.entries(x);
  const double delta = T.trace();
  if (!(std::abs(delta) < 2.0))
    throw Error(ErrorCode::OutsideBandInterior,
                "|Delta(" + std::to_string(x) + ")| = " + std::to_string(std::abs(delta)) + " >= 2");
  if (s == 0) return Mat2::identity();
  const auto rho = detail::rho_values(delta, s + 1);
  return {T.m11 * rho[s] - rho[s - 1], T.m12 * rho[s], T.m21 * rho[s], rho[s + 1] - T.m11 * rho[s]};
}

}  // namespace specband
