#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "specband/errors.hpp"
#include "specband/polynomials.hpp"
#include "specband/quadrature.hpp"
#include "specband/spectrum.hpp"
#include "specband/transfer.hpp"

namespace specband {

/// sqrt(4 - Delta^2) / (2 pi |t21|) on the bands.
inline double density(const MonodromyData& M, const BandStructure& B, double x) {
  if (!B.band_of(x, tol::edge_clamp))
    throw Error(ErrorCode::OutsideSpectrum, "density requested at x = " + std::to_string(x));
  const Mat2 T = M.entries(x);
  const double d = T.trace();
  return std::sqrt(std::max(0.0, 4.0 - d * d)) / (2.0 * std::numbers::pi * std::abs(T.m21));
}

/// Weight of the eigenvalue E in the spectral measure of delta_1: 1 / sum_n p_n(E)^2.
///
/// At an eigenvalue t21(E) = 0, so T_q(E) maps (1, 0) to (t11, 0) and p_{sq+r}(E) = t11^s p_r(E).
/// Summing block by block in that form keeps the exponentially growing companion solution, which
/// rounding in E would otherwise seed, out of the tail.
inline double point_mass(const JacobiOperator& J, double E) {
  const std::size_t q = J.period();
  const Mat2 T = transfer_matrix(J, q, E);
  if (std::abs(T.m21) > 1e-8 * std::max(1.0, T.max_abs()) || !(std::abs(T.m11) < 1.0))
    throw Error(ErrorCode::DivergentNormSum, "p_n(" + std::to_string(E) + ") does not decay: t21 = " +
                                                 std::to_string(T.m21) + ", t11 = " + std::to_string(T.m11));
  const auto p = poly_recurrence(J, E, q - 1).values;
  double first_block = 0.0;
  for (double v : p) first_block += v * v;
  const double ratio = T.m11 * T.m11;
  double sum = 0.0, block = first_block;
  for (std::size_t s = 0; s < 1000000; ++s) {
    sum += block;
    if (block <= 1e-16 * sum) return 1.0 / sum;
    block *= ratio;
  }
  throw Error(ErrorCode::DivergentNormSum, "sum of p_n(" + std::to_string(E) + ")^2 did not converge");
}

/// Nodes x_i = k_j(phi_i) and weights W_i with sum f(x_i) W_i ~ integral of f against w(x) dx on one band.
struct BandNodes {
  std::vector<double> phi;
  std::vector<double> x;
  std::vector<double> weight;
  std::vector<double> k_prime;
};

/// Gauss-Legendre in phi; the substitution turns w(x) dx into 2 sin^2(phi) / (pi |t21 Delta'|) dphi.
inline BandNodes band_nodes(const PhaseFunction& k, const MonodromyData& M, std::size_t panels, std::size_t per_panel) {
  const auto rule = quad::composite(-std::numbers::pi, 0.0, panels, per_panel);
  BandNodes out;
  const std::size_t n = rule.nodes.size();
  out.phi = rule.nodes;
  out.x.resize(n);
  out.weight.resize(n);
  out.k_prime.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = rule.nodes[i];
    const double x = k.eval(phi);
    const MonodromyJet jet = M.jet(x);
    const double s = std::sin(phi);
    const double d1 = jet.delta(1);
    out.x[i] = x;
    out.k_prime[i] = -2.0 * s / d1;
    out.weight[i] = rule.weights[i] * 2.0 * s * s / (std::numbers::pi * std::abs(jet.d[0].m21 * d1));
  }
  return out;
}

/// Continuous density on the bands plus point masses at the gap eigenvalues.
class SpectralMeasure {
 public:
  explicit SpectralMeasure(const JacobiOperator& J, std::size_t nodes_per_band = 256)
      : M_(J), B_(band_structure(M_)), eigen_(point_spectrum(M_, B_)) {
    for (auto& e : eigen_) e.weight = point_mass(M_.op(), e.value);
    for (std::size_t j = 0; j < B_.band_count(); ++j) {
      phases_.push_back(phase_function(M_, B_, j));
      nodes_.push_back(band_nodes(phases_.back(), M_, 1, nodes_per_band));
    }
    continuous_mass_ = 0.0;
    for (const auto& bn : nodes_)
      for (double w : bn.weight) continuous_mass_ += w;
  }

  // The phase functions refer to M_, so the object stays where it was built.
  SpectralMeasure(const SpectralMeasure&) = delete;
  SpectralMeasure& operator=(const SpectralMeasure&) = delete;

  const JacobiOperator& op() const { return M_.op(); }
  const MonodromyData& monodromy() const { return M_; }
  const BandStructure& bands() const { return B_; }
  const std::vector<EigenvalueInfo>& point_masses() const { return eigen_; }
  const std::vector<PhaseFunction>& phases() const { return phases_; }
  const std::vector<BandNodes>& nodes() const { return nodes_; }
  double continuous_mass() const { return continuous_mass_; }

  double density(double x) const { return specband::density(M_, B_, x); }

  double total_mass() const {
    double m = continuous_mass_;
    for (const auto& e : eigen_) m += e.weight;
    return m;
  }

 private:
  MonodromyData M_;
  BandStructure B_;
  std::vector<EigenvalueInfo> eigen_;
  std::vector<PhaseFunction> phases_;
  std::vector<BandNodes> nodes_;
  double continuous_mass_ = 0.0;
};

/// Integral of x^k against the full measure.
inline double moment(const SpectralMeasure& S, std::size_t k) {
  const auto kk = static_cast<int>(k);
  double m = 0.0;
  for (const auto& bn : S.nodes())
    for (std::size_t i = 0; i < bn.x.size(); ++i) m += std::pow(bn.x[i], kk) * bn.weight[i];
  for (const auto& e : S.point_masses()) m += std::pow(e.value, kk) * e.weight;
  return m;
}

/// (J^k)_{11} by k-fold application to delta_1.
inline double moment_exact(const JacobiOperator& J, std::size_t k) {
  FiniteState v = FiniteState::delta(1);
  for (std::size_t i = 0; i < k; ++i) v = apply(J, v);
  return v.at_site(1).real();
}

/// G[n][m] = integral of p_n p_m dmu for n, m <= N.
inline std::vector<std::vector<double>> gram_matrix(const SpectralMeasure& S, std::size_t N) {
  std::vector<std::vector<double>> G(N + 1, std::vector<double>(N + 1, 0.0));
  auto accumulate = [&](double x, double w) {
    const auto p = poly_recurrence(S.op(), x, N).values;
    for (std::size_t n = 0; n <= N; ++n)
      for (std::size_t m = 0; m <= n; ++m) G[n][m] += w * p[n] * p[m];
  };
  for (const auto& bn : S.nodes())
    for (std::size_t i = 0; i < bn.x.size(); ++i) accumulate(bn.x[i], bn.weight[i]);
  for (const auto& e : S.point_masses()) accumulate(e.value, e.weight);
  for (std::size_t n = 0; n <= N; ++n)
    for (std::size_t m = n + 1; m <= N; ++m) G[n][m] = G[m][n];
  return G;
}

}  // namespace specband
