#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specband/errors.hpp"

namespace specband {

using cplx = std::complex<double>;

/// Finitely supported state on the half-line. `values[0]` is site 1.
struct FiniteState {
  std::vector<cplx> values;

  FiniteState() = default;
  explicit FiniteState(std::size_t n) : values(n, cplx{0.0, 0.0}) {}
  explicit FiniteState(std::vector<cplx> v) : values(std::move(v)) {}

  /// Unit vector at `site` (1-based).
  static FiniteState delta(std::size_t site) {
    FiniteState s(site);
    s.values[site - 1] = 1.0;
    return s;
  }

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  /// 1-based access; sites beyond the stored range read as zero.
  cplx at_site(std::size_t site) const {
    return (site >= 1 && site <= values.size()) ? values[site - 1] : cplx{0.0, 0.0};
  }

  double l2_norm() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return std::sqrt(s);
  }

  /// Index of the last nonzero site (0 if the state vanishes).
  std::size_t support_end() const {
    for (std::size_t i = values.size(); i > 0; --i)
      if (values[i - 1] != cplx{0.0, 0.0}) return i;
    return 0;
  }
};

/// <w, v> = sum conj(w_n) v_n over the common stored range.
inline cplx inner(const FiniteState& w, const FiniteState& v) {
  const std::size_t n = std::min(w.size(), v.size());
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) s += std::conj(w.values[i]) * v.values[i];
  return s;
}

/// Symmetric tridiagonal matrix: `diag` has N entries, `off` has N-1.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }

  Eigen::MatrixXd dense() const {
    const auto n = static_cast<Eigen::Index>(diag.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      m(i, i + 1) = off[static_cast<std::size_t>(i)];
      m(i + 1, i) = off[static_cast<std::size_t>(i)];
    }
    return m;
  }

  /// y = M x for a complex vector of the same size.
  void multiply(std::span<const cplx> x, std::span<cplx> y) const {
    const std::size_t n = diag.size();
    if (n == 0) return;
    if (n == 1) {
      y[0] = diag[0] * x[0];
      return;
    }
    y[0] = diag[0] * x[0] + off[0] * x[1];
    for (std::size_t i = 1; i + 1 < n; ++i)
      y[i] = off[i - 1] * x[i - 1] + diag[i] * x[i] + off[i] * x[i + 1];
    y[n - 1] = off[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
  }
};

/// Half-line Jacobi operator with periodic coefficients, stored over one minimal period.
class JacobiOperator {
 public:
  /// Validates the coefficients and reduces them to the minimal period.
  JacobiOperator(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyCoefficients, "coefficient lists must be nonempty");
    if (a.size() != b.size())
      throw Error(ErrorCode::LengthMismatch,
                  "a has " + std::to_string(a.size()) + " entries, b has " + std::to_string(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a[i] > 0.0))
        throw Error(ErrorCode::NonPositiveHopping, "a_" + std::to_string(i + 1) + " = " + std::to_string(a[i]));

    const std::size_t given = a.size();
    const std::size_t q = minimal_period(a, b);
    if (q < given) {
      reduction_notice_ = "period " + std::to_string(given) + " reduced to minimal period " + std::to_string(q);
      a.resize(q);
      b.resize(q);
    }
    a_ = std::move(a);
    b_ = std::move(b);
  }

  std::size_t period() const { return a_.size(); }
  std::span<const double> a() const { return a_; }
  std::span<const double> b() const { return b_; }

  /// a_n for a 1-based site index, extended periodically.
  double a_at(std::size_t n) const { return a_[(n - 1) % a_.size()]; }
  double b_at(std::size_t n) const { return b_[(n - 1) % b_.size()]; }

  const std::optional<std::string>& reduction_notice() const { return reduction_notice_; }

 private:
  static std::size_t minimal_period(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t q = a.size();
    for (std::size_t d = 1; d < q; ++d) {
      if (q % d != 0) continue;
      bool periodic = true;
      for (std::size_t i = d; i < q && periodic; ++i) periodic = a[i] == a[i - d] && b[i] == b[i - d];
      if (periodic) return d;
    }
    return q;
  }

  std::vector<double> a_;
  std::vector<double> b_;
  std::optional<std::string> reduction_notice_;
};

/// (Jv)_1 = b_1 v_1 + a_1 v_2, (Jv)_n = a_{n-1} v_{n-1} + b_n v_n + a_n v_{n+1}.
/// The output carries one more site than the input.
inline FiniteState apply(const JacobiOperator& J, const FiniteState& v) {
  const std::size_t n = v.size();
  if (n == 0) return {};
  FiniteState out(n + 1);
  for (std::size_t site = 1; site <= n + 1; ++site) {
    cplx s = J.b_at(site) * v.at_site(site) + J.a_at(site) * v.at_site(site + 1);
    if (site >= 2) s += J.a_at(site - 1) * v.at_site(site - 1);
    out.values[site - 1] = s;
  }
  return out;
}

/// Upper-left N x N block of J.
inline SymTridiagonal truncate(const JacobiOperator& J, std::size_t N) {
  SymTridiagonal m;
  m.diag.resize(N);
  m.off.resize(N > 0 ? N - 1 : 0);
  for (std::size_t n = 1; n <= N; ++n) {
    m.diag[n - 1] = J.b_at(n);
    if (n < N) m.off[n - 1] = J.a_at(n);
  }
  return m;
}

/// max|b| + 2 max a, an upper bound on the operator norm.
inline double norm_bound(const JacobiOperator& J) {
  double bmax = 0.0, amax = 0.0;
  for (double v : J.b()) bmax = std::max(bmax, std::abs(v));
  for (double v : J.a()) amax = std::max(amax, v);
  return bmax + 2.0 * amax;
}

}  // namespace specband
