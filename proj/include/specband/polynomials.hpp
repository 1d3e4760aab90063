#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "specband/errors.hpp"
#include "specband/operator.hpp"
#include "specband/transfer.hpp"

namespace specband {

/// p_0(x) .. p_N(x) at a single point.
struct PolyEval {
  double x = 0.0;
  std::vector<double> values;
};

/// a_n p_{n+1} = (x - b_n) p_n - a_{n-1} p_{n-1}, p_{-1} = 0, p_0 = 1.
inline PolyEval poly_recurrence(const JacobiOperator& J, double x, std::size_t N) {
  PolyEval out{x, std::vector<double>(N + 1, 0.0)};
  out.values[0] = 1.0;
  double prev = 0.0, a_prev = 1.0;
  for (std::size_t n = 1; n <= N; ++n) {
    const double an = J.a_at(n);
    const double next = ((x - J.b_at(n)) * out.values[n - 1] - a_prev * prev) / an;
    prev = out.values[n - 1];
    out.values[n] = next;
    a_prev = an;
  }
  return out;
}

/// rho_l = sin(l Theta) / sin(Theta), via the Chebyshev-U recurrence in Delta.
inline double rho(const MonodromyData& M, std::size_t ell, double x) {
  return detail::rho_values(M.delta(x), ell)[ell];
}

/// p_n through n = sq + r: [A_r ... A_1 T_{sq}]_{11}.
inline double poly_closed_form(const MonodromyData& M, double x, std::size_t n) {
  const std::size_t q = M.period();
  const std::size_t s = n / q, r = n % q;
  Mat2 t = power_via_rho(M, s, x);
  for (std::size_t k = 1; k <= r; ++k) t = step_matrix(M.op().a_at(k), M.op().b_at(k), x) * t;
  return t.m11;
}

}  // namespace specband
