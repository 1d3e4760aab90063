#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "specband/errors.hpp"
#include "specband/measure.hpp"
#include "specband/operator.hpp"
#include "specband/parallel.hpp"
#include "specband/polynomials.hpp"
#include "specband/quadrature.hpp"
#include "specband/spectrum.hpp"
#include "specband/transfer.hpp"

namespace specband {

enum class Method { Spectral, Oracle };

inline std::string_view to_string(Method m) { return m == Method::Spectral ? "spectral" : "oracle"; }

struct PropagatorOptions {
  std::size_t node_budget = 10'000'000;
  std::size_t truncation_cap = 2'000'000;
  std::size_t nodes_per_panel = 16;
};

/// psi_n(t) for n = 1..n_max at each requested time; amplitudes[i][n - 1] belongs to times[i].
struct EvolutionResult {
  std::vector<double> times;
  std::size_t n_max = 0;
  std::vector<std::vector<cplx>> amplitudes;
  Method method = Method::Spectral;
};

/// Normalized eigenvector at a gap eigenvalue, phi_n = sqrt(weight) p_{n-1}(E), cut where it drops below `cutoff`.
/// Built from p_{sq+r} = t11^s p_r so that the growing companion solution never enters.
inline std::vector<double> eigenvector(const JacobiOperator& J, double E, double weight, double cutoff = 1e-14) {
  const std::size_t q = J.period();
  const double t11 = transfer_matrix(J, q, E).m11;
  const auto p = poly_recurrence(J, E, q - 1).values;
  double block_max = 0.0;
  for (double v : p) block_max = std::max(block_max, std::abs(v));
  std::vector<double> phi;
  double scale = std::sqrt(weight);
  while (std::abs(scale) * block_max >= cutoff) {
    for (double v : p) phi.push_back(scale * v);
    scale *= t11;
  }
  return phi;
}

/// P_c u = u - sum_E <phi_E, u> phi_E.
inline FiniteState project_continuous(const SpectralMeasure& S, const FiniteState& u) {
  FiniteState out = u;
  for (const auto& e : S.point_masses()) {
    const auto phi = eigenvector(S.op(), e.value, e.weight);
    if (out.size() < phi.size()) out.values.resize(phi.size(), cplx{0.0, 0.0});
    cplx c{0.0, 0.0};
    for (std::size_t n = 0; n < phi.size(); ++n) c += phi[n] * out.values[n];
    for (std::size_t n = 0; n < phi.size(); ++n) out.values[n] -= c * phi[n];
  }
  return out;
}

/// Band-wise quadrature in phi of the continuous part of the eigenfunction expansion.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const SpectralMeasure& S, PropagatorOptions opt = {}) : S_(S), opt_(opt) {
    constexpr int samples = 1024;
    for (const auto& k : S_.phases()) {
      double kmax = 0.0;
      for (int i = 0; i < samples; ++i) {
        const double phi = -std::numbers::pi * (i + 0.5) / samples;
        const double x = k.eval(phi);
        kmax = std::max(kmax, std::abs(2.0 * std::sin(phi) / S_.monodromy().delta_derivative(x, 1)));
      }
      osc_.push_back(kmax * std::numbers::pi);
    }
    for (const auto& e : S_.point_masses())
      bound_reach_ = std::max(bound_reach_, eigenvector(S_.op(), e.value, e.weight).size());
  }

  const SpectralMeasure& measure() const { return S_; }
  double oscillation(std::size_t band) const { return osc_.at(band); }

  /// Panels for band `band` at time t when polynomials up to degree `degree` enter the integrand: 8 per wave of
  /// e^{-itk}, and at least 2 per wave of the full integrand, where p_n contributes about n / 2q waves.
  std::size_t panels(std::size_t band, double t, std::size_t degree = 0) const {
    const double time_waves = std::ceil(t * osc_.at(band) / (2.0 * std::numbers::pi));
    const double poly_waves = std::ceil(static_cast<double>(degree) / (2.0 * static_cast<double>(S_.op().period())));
    return static_cast<std::size_t>(std::max({16.0, 8.0 * time_waves, 2.0 * (time_waves + poly_waves)}));
  }

  std::size_t node_count(double t, std::size_t degree = 0) const {
    std::size_t total = 0;
    for (std::size_t j = 0; j < osc_.size(); ++j) total += panels(j, t, degree) * opt_.nodes_per_panel;
    return total;
  }

  /// Sites that can carry amplitude above ~1e-14: the support of u widened by the Chebyshev degree needed for
  /// e^{-itJ} on [-|J|, |J|], or the extent of the removed bound states if longer.
  std::size_t reach(const FiniteState& u, double t) const {
    const double z = norm_bound(S_.op()) * t;
    const auto cone = u.support_end() + static_cast<std::size_t>(std::ceil(z + 15.0 * std::cbrt(z) + 40.0));
    return std::max(cone, bound_reach_);
  }

  /// psi_n(t), n = 1..n_max, for psi(0) = P_c u. Sites beyond reach(u, t) are set to zero.
  std::vector<cplx> row(const FiniteState& u, double t, std::size_t n_max) const {
    const std::size_t n_full = n_max;
    n_max = std::min(n_max, reach(u, t));
    const std::size_t total = node_count(t, std::max(n_max, u.size()));
    if (total > opt_.node_budget)
      throw Error(ErrorCode::QuadratureBudgetExceeded, std::to_string(total) + " nodes needed at t = " +
                                                           std::to_string(t) + ", budget " +
                                                           std::to_string(opt_.node_budget));
    struct Node {
      std::size_t band;
      double phi, w;
    };
    std::vector<Node> nodes;
    nodes.reserve(total);
    for (std::size_t j = 0; j < osc_.size(); ++j) {
      const auto rule =
          quad::composite(-std::numbers::pi, 0.0, panels(j, t, std::max(n_max, u.size())), opt_.nodes_per_panel);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) nodes.push_back({j, rule.nodes[i], rule.weights[i]});
    }

    const JacobiOperator& J = S_.op();
    const std::size_t len = std::max(n_max, u.size());
    // Per-site coefficients of p_n = ((x - b_n) p_{n-1} - a_{n-1} p_{n-2}) / a_n, n = 1..len-1.
    std::vector<double> b_site(len), a_prev(len), inv_a(len);
    for (std::size_t n = 1; n < len; ++n) {
      b_site[n] = J.b_at(n);
      a_prev[n] = n >= 2 ? J.a_at(n - 1) : 1.0;
      inv_a[n] = 1.0 / J.a_at(n);
    }

    // Nodes are processed in lanes of L so the recurrence vectorizes across nodes. A fixed partition keeps the
    // summation order independent of the worker count.
    constexpr std::size_t L = 8;
    const std::size_t groups = std::min<std::size_t>(64, nodes.size());
    std::vector<std::vector<cplx>> partial(groups);
    parallel_chunks(groups, [&](std::size_t g) {
      const std::size_t lo = nodes.size() * g / groups, hi = nodes.size() * (g + 1) / groups;
      std::vector<double> acc_re(n_max, 0.0), acc_im(n_max, 0.0);
      std::vector<double> p(len * L);
      for (std::size_t i0 = lo; i0 < hi; i0 += L) {
        std::array<double, L> x{}, c_re{}, c_im{};
        const std::size_t lanes = std::min(L, hi - i0);
        for (std::size_t l = 0; l < lanes; ++l) {
          const Node& nd = nodes[i0 + l];
          x[l] = S_.phases()[nd.band].eval(nd.phi);
          const MonodromyJet jet = S_.monodromy().jet(x[l]);
          const double s = std::sin(nd.phi);
          const double weight = nd.w * 2.0 * s * s / (std::numbers::pi * std::abs(jet.d[0].m21 * jet.delta(1)));
          c_re[l] = weight * std::cos(t * x[l]);
          c_im[l] = -weight * std::sin(t * x[l]);
        }
        for (std::size_t l = lanes; l < L; ++l) x[l] = x[0];
        for (std::size_t l = 0; l < L; ++l) p[l] = 1.0;
        if (len > 1)
          for (std::size_t l = 0; l < L; ++l) p[L + l] = (x[l] - b_site[1]) * inv_a[1];
        for (std::size_t n = 2; n < len; ++n) {
          const double bn = b_site[n], an1 = a_prev[n], ia = inv_a[n];
          const double* p1 = &p[(n - 1) * L];
          const double* p2 = &p[(n - 2) * L];
          double* p0 = &p[n * L];
          for (std::size_t l = 0; l < L; ++l) p0[l] = ((x[l] - bn) * p1[l] - an1 * p2[l]) * ia;
        }
        // Coefficient e^{-itx} w <p(x), u> per lane.
        for (std::size_t l = 0; l < lanes; ++l) {
          cplx proj{0.0, 0.0};
          for (std::size_t m = 0; m < u.size(); ++m) proj += p[m * L + l] * u.values[m];
          const cplx c = cplx{c_re[l], c_im[l]} * proj;
          c_re[l] = c.real();
          c_im[l] = c.imag();
        }
        for (std::size_t l = lanes; l < L; ++l) c_re[l] = c_im[l] = 0.0;
        for (std::size_t n = 0; n < n_max; ++n) {
          const double* pn = &p[n * L];
          double sr = 0.0, si = 0.0;
          for (std::size_t l = 0; l < L; ++l) {
            sr += c_re[l] * pn[l];
            si += c_im[l] * pn[l];
          }
          acc_re[n] += sr;
          acc_im[n] += si;
        }
      }
      std::vector<cplx> acc(n_max);
      for (std::size_t n = 0; n < n_max; ++n) acc[n] = {acc_re[n], acc_im[n]};
      partial[g] = std::move(acc);
    });
    std::vector<cplx> psi(n_full, cplx{0.0, 0.0});
    for (const auto& part : partial)
      for (std::size_t n = 0; n < n_max; ++n) psi[n] += part[n];
    return psi;
  }

 private:
  const SpectralMeasure& S_;
  PropagatorOptions opt_;
  std::vector<double> osc_;
  std::size_t bound_reach_ = 0;
};

inline std::vector<cplx> evolve_spectral(const SpectralMeasure& S, const FiniteState& u, double t, std::size_t n_max,
                                         PropagatorOptions opt = {}) {
  return SpectralPropagator(S, opt).row(u, t, n_max);
}

namespace detail {

/// J_0(z) .. J_K(z) by Miller's backward recurrence normalized with J_0 + 2 sum J_{2k} = 1.
/// K is the last order with |J_K| above `tail`.
inline std::vector<double> bessel_j_sequence(double z, double tail = 1e-14) {
  if (z < 1e-300) return {1.0};
  const auto start = static_cast<std::size_t>(z + 15.0 * std::cbrt(z) + 40.0) | 1u;
  std::vector<double> J(start + 2, 0.0);
  J[start] = 1e-300;
  for (std::size_t k = start; k >= 1; --k) {
    J[k - 1] = 2.0 * static_cast<double>(k) / z * J[k] - J[k + 1];
    if (std::abs(J[k - 1]) > 1e250)
      for (std::size_t m = k - 1; m <= start; ++m) J[m] *= 1e-250;
  }
  double norm = J[0];
  for (std::size_t k = 2; k <= start; k += 2) norm += 2.0 * J[k];
  for (double& v : J) v /= norm;
  std::size_t K = start;
  while (K > 0 && std::abs(J[K]) <= tail) --K;
  J.resize(K + 1);
  return J;
}

/// Solves (M - sigma I) X = Y column by column with partial pivoting.
class ShiftedTridiagonalSolver {
 public:
  ShiftedTridiagonalSolver(const SymTridiagonal& M, double sigma) : n_(M.size()) {
    // Rows of the eliminated system carry up to two superdiagonals.
    d_.resize(n_);
    u1_.assign(n_, 0.0);
    u2_.assign(n_, 0.0);
    l_.assign(n_, 0.0);
    swap_.assign(n_, false);
    std::vector<double> diag(n_), sub(n_, 0.0), sup(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      diag[i] = M.diag[i] - sigma;
      if (i + 1 < n_) sub[i] = sup[i] = M.off[i];
    }
    double scale = 1.0;
    for (std::size_t i = 0; i < n_; ++i) scale = std::max(scale, std::abs(diag[i]) + 2.0 * std::abs(sup[i]));
    // Floor for exactly singular pivots: the shift then sits on an eigenvalue and the solve only needs direction.
    const double tiny = 1e-15 * scale;
    // Current row i holds (diag[i], sup[i], extra) starting at column i.
    double cd = diag.empty() ? 0.0 : diag[0], cu = n_ > 1 ? sup[0] : 0.0, cu2 = 0.0;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      // Next row starts at column i with entries (sub[i], diag[i+1], sup[i+1]).
      double nl = sub[i], nd = diag[i + 1], nu = i + 2 < n_ ? sup[i + 1] : 0.0;
      if (std::abs(nl) > std::abs(cd)) {
        swap_[i] = true;
        std::swap(cd, nl);
        std::swap(cu, nd);
        std::swap(cu2, nu);
      }
      if (cd == 0.0) cd = tiny;
      const double m = nl / cd;
      l_[i] = m;
      d_[i] = cd;
      u1_[i] = cu;
      u2_[i] = cu2;
      cd = nd - m * cu;
      cu = nu - m * cu2;
      cu2 = 0.0;
    }
    if (n_ > 0) {
      d_[n_ - 1] = cd == 0.0 ? tiny : cd;
    }
  }

  std::vector<double> solve(std::vector<double> y) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (swap_[i]) std::swap(y[i], y[i + 1]);
      y[i + 1] -= l_[i] * y[i];
    }
    for (std::size_t i = n_; i-- > 0;) {
      double s = y[i];
      if (i + 1 < n_) s -= u1_[i] * y[i + 1];
      if (i + 2 < n_) s -= u2_[i] * y[i + 2];
      y[i] = s / d_[i];
    }
    return y;
  }

 private:
  std::size_t n_;
  std::vector<double> d_, u1_, u2_, l_;
  std::vector<bool> swap_;
};

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline void normalize(std::vector<double>& x) {
  const double n = std::sqrt(dot(x, x));
  for (double& v : x) v /= n;
}

inline std::vector<double> multiply(const SymTridiagonal& M, const std::vector<double>& x) {
  const std::size_t n = M.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = M.diag[i] * x[i];
    if (i > 0) s += M.off[i - 1] * x[i - 1];
    if (i + 1 < n) s += M.off[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

/// Unit vector in the truncation's eigenspace near E with the largest overlap with delta_1.
/// Two-vector inverse iteration captures both the half-line edge state and a possible partner localized at
/// the cut, which can hybridize with it; Ritz pairs away from E are discarded.
inline std::vector<double> truncation_edge_state(const SymTridiagonal& M, double E) {
  const std::size_t N = M.size();
  if (N == 1) return {1.0};
  const ShiftedTridiagonalSolver solver(M, E);
  std::vector<std::vector<double>> X(2, std::vector<double>(N, 0.0));
  X[0][0] = 1.0;
  X[1][N - 1] = 1.0;
  // Gram-Schmidt; a second vector that collapses onto the first means the near-E eigenspace is one-dimensional.
  auto orthonormalize = [&] {
    normalize(X[0]);
    if (X.size() < 2) return;
    const double before = std::sqrt(dot(X[1], X[1]));
    const double c = dot(X[0], X[1]);
    for (std::size_t i = 0; i < N; ++i) X[1][i] -= c * X[0][i];
    if (std::sqrt(dot(X[1], X[1])) <= 1e-10 * before)
      X.pop_back();
    else
      normalize(X[1]);
  };
  orthonormalize();
  for (int it = 0; it < 6; ++it) {
    for (auto& x : X) x = solver.solve(x);
    orthonormalize();
  }
  const auto k = static_cast<Eigen::Index>(X.size());
  Eigen::MatrixXd H(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto MXi = multiply(M, X[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j) H(j, i) = dot(X[static_cast<std::size_t>(j)], MXi);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  std::vector<double> out(N, 0.0);
  for (Eigen::Index r = 0; r < k; ++r) {
    if (std::abs(es.eigenvalues()(r) - E) > 1e-6) continue;
    std::vector<double> y(N, 0.0);
    for (Eigen::Index j = 0; j < k; ++j)
      for (std::size_t i = 0; i < N; ++i) y[i] += es.eigenvectors()(j, r) * X[static_cast<std::size_t>(j)][i];
    const double overlap = y[0];
    for (std::size_t i = 0; i < N; ++i) out[i] += overlap * y[i];
  }
  const double n = std::sqrt(dot(out, out));
  if (n == 0.0) throw Error(ErrorCode::EigenvalueInBand, "no truncation eigenvalue near " + std::to_string(E));
  for (double& v : out) v /= n;
  return out;
}

}  // namespace detail

/// Reference propagator: Chebyshev expansion of e^{-itM} on a truncation M sized beyond the light cone.
class OracleEvolver {
 public:
  explicit OracleEvolver(const JacobiOperator& J, PropagatorOptions opt = {}) : J_(J), opt_(opt) {
    const MonodromyData M(J_);
    const auto B = band_structure(M);
    for (const auto& e : point_spectrum(M, B)) {
      eigenvalues_.push_back(e.value);
      const double r = std::abs(M.t11(e.value));
      tail_ = std::max(tail_, J_.period() * static_cast<std::size_t>(std::ceil(16.0 / -std::log10(r))));
    }
    nb_ = norm_bound(J_);
  }

  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  /// n_max + 2 ceil(|J| t) + 64, extended by the slowest eigenvector decay length so the bound states fit.
  std::size_t truncation_size(const FiniteState& u, double t, std::size_t n_max) const {
    const auto cone = static_cast<std::size_t>(std::ceil(nb_ * t));
    return std::max(n_max, u.size()) + 2 * cone + 64 + tail_;
  }

  std::vector<cplx> row(const FiniteState& u, double t, std::size_t n_max) const {
    const std::size_t N = truncation_size(u, t, n_max);
    if (N > opt_.truncation_cap)
      throw Error(ErrorCode::TruncationTooLarge,
                  "truncation " + std::to_string(N) + " exceeds cap " + std::to_string(opt_.truncation_cap));
    const SymTridiagonal M = truncate(J_, N);
    std::vector<cplx> v(N, cplx{0.0, 0.0});
    std::copy(u.values.begin(), u.values.end(), v.begin());
    for (double E : eigenvalues_) {
      const auto phi = detail::truncation_edge_state(M, E);
      cplx c{0.0, 0.0};
      for (std::size_t i = 0; i < N; ++i) c += phi[i] * v[i];
      for (std::size_t i = 0; i < N; ++i) v[i] -= c * phi[i];
    }

    const auto bessel = detail::bessel_j_sequence(t * nb_);
    // T_k(M / nb) v by the three-term recurrence, accumulated with (2 - delta_k0) (-i)^k J_k(t nb).
    std::vector<cplx> prev = v, cur(N), next(N), psi(N);
    const cplx minus_i{0.0, -1.0};
    for (std::size_t i = 0; i < N; ++i) psi[i] = bessel[0] * prev[i];
    if (bessel.size() > 1) {
      M.multiply(prev, cur);
      for (auto& c : cur) c /= nb_;
      cplx phase = minus_i;
      for (std::size_t i = 0; i < N; ++i) psi[i] += 2.0 * bessel[1] * phase * cur[i];
      for (std::size_t k = 2; k < bessel.size(); ++k) {
        M.multiply(cur, next);
        for (std::size_t i = 0; i < N; ++i) next[i] = 2.0 / nb_ * next[i] - prev[i];
        phase *= minus_i;
        const cplx coef = 2.0 * bessel[k] * phase;
        for (std::size_t i = 0; i < N; ++i) psi[i] += coef * next[i];
        std::swap(prev, cur);
        std::swap(cur, next);
      }
    }
    psi.resize(n_max);
    return psi;
  }

 private:
  JacobiOperator J_;
  PropagatorOptions opt_;
  std::vector<double> eigenvalues_;
  std::size_t tail_ = 0;
  double nb_ = 1.0;
};

inline std::vector<cplx> evolve_oracle(const JacobiOperator& J, const FiniteState& u, double t, std::size_t n_max,
                                       PropagatorOptions opt = {}) {
  return OracleEvolver(J, opt).row(u, t, n_max);
}

/// Rows for every time in `times`.
inline EvolutionResult evolve(const SpectralMeasure& S, const FiniteState& u, const std::vector<double>& times,
                              std::size_t n_max, Method method, PropagatorOptions opt = {}) {
  EvolutionResult out{times, n_max, {}, method};
  if (method == Method::Spectral) {
    const SpectralPropagator prop(S, opt);
    for (double t : times) out.amplitudes.push_back(prop.row(u, t, n_max));
  } else {
    const OracleEvolver oracle(S.op(), opt);
    for (double t : times) out.amplitudes.push_back(oracle.row(u, t, n_max));
  }
  return out;
}

}  // namespace specband
