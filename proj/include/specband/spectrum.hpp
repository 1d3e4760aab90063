#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "specband/chebyshev.hpp"
#include "specband/errors.hpp"
#include "specband/transfer.hpp"

namespace specband {

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  int orientation = 1;  // sign of Delta' on the band interior
  bool gapped_lo = true;
  bool gapped_hi = true;

  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  double width() const { return hi - lo; }
};

/// Edges, bands, critical points and gap classification of the continuous spectrum.
struct BandStructure {
  std::vector<double> edges;            // lambda_1 .. lambda_{2q}
  std::vector<Band> bands;              // I_j = [lambda_{2j-1}, lambda_{2j}]
  std::vector<double> critical_points;  // kappa_1 .. kappa_{q-1}
  std::vector<bool> endpoint_gapped;    // one flag per edge

  std::size_t band_count() const { return bands.size(); }
  bool all_gapped() const {
    return std::all_of(endpoint_gapped.begin(), endpoint_gapped.end(), [](bool g) { return g; });
  }
  /// 0-based index of the band containing x, if any.
  std::optional<std::size_t> band_of(double x, double tol = 0.0) const {
    for (std::size_t j = 0; j < bands.size(); ++j)
      if (bands[j].contains(x, tol)) return j;
    return std::nullopt;
  }
};

struct EigenvalueInfo {
  double value = 0.0;
  std::size_t gap_index = 0;  // number of bands lying below the eigenvalue
  double weight = std::numeric_limits<double>::quiet_NaN();
};

namespace tol {
inline constexpr double touching = 1e-7;
inline constexpr double edge_clamp = 1e-10;
inline constexpr double nondegenerate = 1e-6;
}  // namespace tol

namespace detail {

/// Newton refinement of a root of f with derivative df, keeping the step bounded.
template <class F, class DF>
double newton_polish(double x, F f, DF df, double scale, int max_iter = 60) {
  for (int it = 0; it < max_iter; ++it) {
    const double d = df(x);
    if (d == 0.0) break;
    const double step = f(x) / d;
    if (!std::isfinite(step) || std::abs(step) > 0.1 * scale) break;
    x -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace detail

inline BandStructure band_structure(const MonodromyData& M) {
  const std::size_t q = M.period();
  const double R = M.bracket();
  auto delta = [&](double x) { return M.delta(x); };
  auto d1 = [&](double x) { return M.delta_derivative(x, 1); };
  auto d2 = [&](double x) { return M.delta_derivative(x, 2); };

  BandStructure B;

  // Critical points: roots of Delta'.
  if (q >= 2) {
    auto kappas = cheb::real_roots(cheb::derivative(M.cheb_delta(), R), R);
    for (double& k : kappas) k = detail::newton_polish(k, d1, d2, R);
    std::sort(kappas.begin(), kappas.end());
    B.critical_points = kappas;
  }

  // Edges: roots of Delta - 2 and Delta + 2.
  std::vector<double> raw;
  for (double level : {2.0, -2.0}) {
    auto c = M.cheb_delta();
    c[0] -= level;
    for (double r : cheb::real_roots(c, R)) {
      const double polished = detail::newton_polish(r, [&](double x) { return delta(x) - level; }, d1, R);
      raw.push_back(polished);
    }
  }
  std::sort(raw.begin(), raw.end());

  // Cluster split double roots; a cluster sits on a critical point where |Delta| touches 2.
  std::vector<double> edges;
  std::vector<bool> touching;
  for (std::size_t i = 0; i < raw.size();) {
    std::size_t j = i + 1;
    while (j < raw.size() && raw[j] - raw[j - 1] <= tol::touching) ++j;
    if (j - i >= 2) {
      double c = 0.0;
      for (std::size_t k = i; k < j; ++k) c += raw[k];
      c /= static_cast<double>(j - i);
      for (double kappa : B.critical_points)
        if (std::abs(kappa - c) <= 10.0 * tol::touching) c = kappa;
      edges.push_back(c);
      edges.push_back(c);
      touching.push_back(true);
      touching.push_back(true);
    } else {
      edges.push_back(raw[i]);
      touching.push_back(false);
    }
    i = j;
  }
  // A touching the colleague solve reported as a complex pair still shows up at a critical point.
  for (double kappa : B.critical_points) {
    if (std::abs(std::abs(delta(kappa)) - 2.0) > 1e-9) continue;
    const bool present = std::any_of(edges.begin(), edges.end(),
                                     [&](double e) { return std::abs(e - kappa) <= tol::touching; });
    if (!present) {
      edges.push_back(kappa);
      edges.push_back(kappa);
      touching.push_back(true);
      touching.push_back(true);
    }
  }
  {
    std::vector<std::size_t> order(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return edges[l] < edges[r]; });
    std::vector<double> e2;
    std::vector<bool> t2;
    for (auto i : order) {
      e2.push_back(edges[i]);
      t2.push_back(touching[i]);
    }
    edges = std::move(e2);
    touching = std::move(t2);
  }

  if (edges.size() != 2 * q)
    throw Error(ErrorCode::RootCountMismatch,
                "found " + std::to_string(edges.size()) + " band edges, expected " + std::to_string(2 * q));

  B.edges = edges;
  B.endpoint_gapped.resize(2 * q);
  for (std::size_t i = 0; i < 2 * q; ++i) B.endpoint_gapped[i] = !touching[i];
  for (std::size_t j = 0; j < q; ++j) {
    Band band;
    band.lo = edges[2 * j];
    band.hi = edges[2 * j + 1];
    if (!(band.lo < band.hi))
      throw Error(ErrorCode::RootCountMismatch, "degenerate band " + std::to_string(j + 1));
    band.orientation = d1(0.5 * (band.lo + band.hi)) > 0.0 ? 1 : -1;
    band.gapped_lo = B.endpoint_gapped[2 * j];
    band.gapped_hi = B.endpoint_gapped[2 * j + 1];
    B.bands.push_back(band);
  }
  return B;
}

/// Eigenvalues: real roots of t21 with |t11| < 1, all lying in gaps.
inline std::vector<EigenvalueInfo> point_spectrum(const MonodromyData& M, const BandStructure& B) {
  const double R = M.bracket();
  std::vector<EigenvalueInfo> out;
  auto roots = cheb::real_roots(M.cheb_t21(), R);
  for (double r : roots) {
    const double E = detail::newton_polish(
        r, [&](double x) { return M.t21(x); }, [&](double x) { return M.jet(x).d[1].m21; }, R);
    const Mat2 T = M.entries(E);
    if (!(std::abs(T.m11) < 1.0 - 1e-9)) continue;
    for (const auto& band : B.bands) {
      const double depth = std::min(E - band.lo, band.hi - E);
      if (depth > 1e-8)
        throw Error(ErrorCode::EigenvalueInBand,
                    "t21 root " + std::to_string(E) + " with |t11| < 1 lies inside [" + std::to_string(band.lo) +
                        ", " + std::to_string(band.hi) + "]");
    }
    if (std::any_of(out.begin(), out.end(), [&](const EigenvalueInfo& e) { return std::abs(e.value - E) < 1e-10; }))
      continue;
    EigenvalueInfo info;
    info.value = E;
    info.gap_index = static_cast<std::size_t>(
        std::count_if(B.bands.begin(), B.bands.end(), [&](const Band& b) { return b.hi < E; }));
    out.push_back(info);
  }
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.value < r.value; });
  return out;
}

/// Theta(x) = -arccos(Delta(x)/2) in [-pi, 0]; x may overshoot a band edge by 1e-10.
inline double theta(const MonodromyData& M, const BandStructure& B, double x) {
  const auto j = B.band_of(x, tol::edge_clamp);
  if (!j) throw Error(ErrorCode::OutsideSpectrum, "x = " + std::to_string(x) + " is not in any band");
  const Band& band = B.bands[*j];
  const double xc = std::clamp(x, band.lo, band.hi);
  const double c = std::clamp(M.delta(xc) / 2.0, -1.0, 1.0);
  return -std::acos(c);
}

/// k_j and its first three derivatives at one phase.
struct PhaseJet {
  double phi = 0.0;
  double k = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
};

/// Inverse of Theta on one band: Delta(k_j(phi)) = 2 cos(phi).
class PhaseFunction {
 public:
  PhaseFunction(const MonodromyData& M, const Band& band, std::size_t index)
      : M_(M), band_(band), index_(index) {}

  std::size_t index() const { return index_; }
  const Band& band() const { return band_; }

  double operator()(double phi) const { return eval(phi); }

  double eval(double phi) const {
    if (phi <= -std::numbers::pi) return end_at_minus_pi();
    if (phi >= 0.0) return end_at_zero();
    const double target = 2.0 * std::cos(phi);
    // f is increasing in x when orientation > 0.
    auto f = [&](double x) { return band_.orientation * (M_.delta(x) - target); };
    double lo = band_.lo, hi = band_.hi;
    // Linear start in Delta from the band geometry.
    const double frac = band_.orientation > 0 ? (target + 2.0) / 4.0 : (2.0 - target) / 4.0;
    double x = lo + frac * (hi - lo);
    for (int it = 0; it < 200; ++it) {
      const double fx = f(x);
      if (fx == 0.0) return x;
      if (fx > 0.0)
        hi = x;
      else
        lo = x;
      const double d = band_.orientation * M_.delta_derivative(x, 1);
      double xn = (d != 0.0) ? x - fx / d : 0.5 * (lo + hi);
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      const double step = std::abs(xn - x);
      x = xn;
      if (step <= 1e-16 * std::max(1.0, std::abs(x)) || hi - lo <= 4e-16 * std::max(1.0, std::abs(x))) break;
    }
    return x;
  }

  /// k, k', k'', k''' from differentiating Delta(k(phi)) = 2 cos(phi).
  PhaseJet derivatives(double phi) const {
    PhaseJet out;
    out.phi = phi;
    const bool at_minus_pi = phi <= -std::numbers::pi;
    const bool at_zero = phi >= 0.0;
    out.k = eval(phi);
    const MonodromyJet jet = M_.jet(out.k);
    const double D1 = jet.delta(1), D2 = jet.delta(2), D3 = jet.delta(3), D4 = jet.delta(4);
    const double s = at_minus_pi ? 0.0 : (at_zero ? 0.0 : std::sin(phi));
    const double c = at_minus_pi ? -1.0 : (at_zero ? 1.0 : std::cos(phi));

    if (at_minus_pi || at_zero) {
      if (endpoint_gapped(at_zero)) {
        out.k1 = 0.0;
        out.k2 = -2.0 * c / D1;
        out.k3 = 0.0;
      } else {
        if (D2 == 0.0)
          throw Error(ErrorCode::DerivativeSingularity,
                      "Delta'' vanishes at the ungapped endpoint of band " + std::to_string(index_ + 1));
        // Delta' = 0 here, so k' comes from the second identity and k'' from the third.
        out.k1 = band_.orientation * std::sqrt(std::max(0.0, -2.0 * c / D2));
        out.k2 = -out.k1 * out.k1 * out.k1 * D3 / (3.0 * D2);
        const double k1sq = out.k1 * out.k1;
        out.k3 = (2.0 * c - D4 * k1sq * k1sq - 6.0 * D3 * k1sq * out.k2 - 3.0 * D2 * out.k2 * out.k2) /
                 (4.0 * D2 * out.k1);
      }
      return out;
    }
    out.k1 = -2.0 * s / D1;
    out.k2 = (-2.0 * c - D2 * out.k1 * out.k1) / D1;
    out.k3 = (2.0 * s - D3 * out.k1 * out.k1 * out.k1 - 3.0 * D2 * out.k1 * out.k2) / D1;
    return out;
  }

  /// Delta'(k_j(phi)) as a by-product, used by the quadrature weights.
  double delta_prime_at(double phi) const { return M_.delta_derivative(eval(phi), 1); }

 private:
  // Delta = -2 at phi = -pi and +2 at phi = 0.
  double end_at_minus_pi() const { return band_.orientation > 0 ? band_.lo : band_.hi; }
  double end_at_zero() const { return band_.orientation > 0 ? band_.hi : band_.lo; }
  bool endpoint_gapped(bool at_zero) const {
    const bool upper = (band_.orientation > 0) == at_zero;
    return upper ? band_.gapped_hi : band_.gapped_lo;
  }

  MonodromyData M_;
  Band band_;
  std::size_t index_;
};

/// `j` is 0-based.
inline PhaseFunction phase_function(const MonodromyData& M, const BandStructure& B, std::size_t j) {
  if (j >= B.bands.size())
    throw Error(ErrorCode::OutsideSpectrum, "band index " + std::to_string(j + 1) + " out of range");
  return PhaseFunction(M, B.bands[j], j);
}

struct BandAudit {
  bool gapped_lo = true;
  bool gapped_hi = true;
  std::vector<double> t2;  // roots of k''
  std::vector<double> t3;  // roots of k'''
  double min_k3_on_t2 = std::numeric_limits<double>::infinity();
};

struct AuditReport {
  std::size_t period = 0;
  std::vector<BandAudit> bands;
  bool nondegenerate = true;
  bool evenq_all_gapped = false;
  double predicted_local_exponent = -0.5;
  std::optional<double> predicted_global_exponent;  // empty means unclassified
  std::optional<double> c_est;                      // only when q is even and every edge is gapped
};

namespace detail {

/// Sign-change roots of g on the grid plus exact grid zeros, refined by bisection to `xtol`.
template <class G>
std::vector<double> scan_roots(G g, const std::vector<double>& grid, const std::vector<double>& values,
                               double zero_tol, double xtol) {
  std::vector<double> roots;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(values[i]) <= zero_tol) roots.push_back(grid[i]);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double va = values[i], vb = values[i + 1];
    if (std::abs(va) <= zero_tol || std::abs(vb) <= zero_tol) continue;
    if ((va < 0.0) == (vb < 0.0)) continue;
    double a = grid[i], b = grid[i + 1], fa = va;
    while (b - a > xtol) {
      const double m = 0.5 * (a + b);
      const double fm = g(m);
      if (fm == 0.0) {
        a = b = m;
        break;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> merged;
  for (double r : roots)
    if (merged.empty() || r - merged.back() > 1e-9) merged.push_back(r);
  return merged;
}

/// m-th finite difference of f at phi with step h, stencil shifted to stay in [-pi, 0].
template <class F>
double shifted_difference(F f, double phi, std::size_t m, double h) {
  double start = phi - 0.5 * static_cast<double>(m) * h;
  start = std::clamp(start, -std::numbers::pi, -static_cast<double>(m) * h);
  double sum = 0.0, binom = 1.0;
  for (std::size_t i = 0; i <= m; ++i) {
    const double sign = ((m - i) % 2 == 0) ? 1.0 : -1.0;
    sum += sign * binom * f(start + static_cast<double>(i) * h);
    binom = binom * static_cast<double>(m - i) / static_cast<double>(i + 1);
  }
  return sum / std::pow(h, static_cast<double>(m));
}

}  // namespace detail

/// Stationary sets of every band and the decay exponents they predict.
inline AuditReport stationary_audit(const MonodromyData& M, const BandStructure& B, std::size_t grid_points = 4096) {
  AuditReport rep;
  rep.period = M.period();
  std::vector<double> grid(grid_points + 1);
  for (std::size_t i = 0; i <= grid_points; ++i)
    grid[i] = -std::numbers::pi + std::numbers::pi * static_cast<double>(i) / static_cast<double>(grid_points);
  grid.back() = 0.0;

  std::vector<PhaseFunction> phases;
  for (std::size_t j = 0; j < B.band_count(); ++j) phases.push_back(phase_function(M, B, j));

  double min_k3 = std::numeric_limits<double>::infinity();
  for (const auto& k : phases) {
    BandAudit ba;
    ba.gapped_lo = k.band().gapped_lo;
    ba.gapped_hi = k.band().gapped_hi;
    std::vector<double> v2(grid.size()), v3(grid.size());
    double scale2 = 0.0, scale3 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto d = k.derivatives(grid[i]);
      v2[i] = d.k2;
      v3[i] = d.k3;
      scale2 = std::max(scale2, std::abs(d.k2));
      scale3 = std::max(scale3, std::abs(d.k3));
    }
    ba.t2 = detail::scan_roots([&](double p) { return k.derivatives(p).k2; }, grid, v2, 1e-13 * std::max(1.0, scale2),
                               1e-10);
    ba.t3 = detail::scan_roots([&](double p) { return k.derivatives(p).k3; }, grid, v3, 1e-13 * std::max(1.0, scale3),
                               1e-10);
    for (double r : ba.t2) ba.min_k3_on_t2 = std::min(ba.min_k3_on_t2, std::abs(k.derivatives(r).k3));
    min_k3 = std::min(min_k3, ba.min_k3_on_t2);
    rep.bands.push_back(ba);
  }

  const std::size_t q = rep.period;
  rep.nondegenerate = !(min_k3 <= tol::nondegenerate);
  rep.evenq_all_gapped = (q % 2 == 0) && B.all_gapped();
  if (rep.nondegenerate)
    rep.predicted_global_exponent = -1.0 / 3.0;
  else if (rep.evenq_all_gapped)
    rep.predicted_global_exponent = -1.0 / static_cast<double>(q + 1);

  if (rep.evenq_all_gapped) {
    // Orders 2 and 3 in closed form, higher orders by differencing k'''.
    const double h = 1e-3;
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < phases.size(); ++j) {
      const auto& k = phases[j];
      std::vector<double> pts = grid;
      pts.insert(pts.end(), rep.bands[j].t2.begin(), rep.bands[j].t2.end());
      pts.insert(pts.end(), rep.bands[j].t3.begin(), rep.bands[j].t3.end());
      auto k3 = [&](double p) { return k.derivatives(p).k3; };
      for (double p : pts) {
        const auto d = k.derivatives(p);
        double sum = std::abs(d.k2);
        if (q >= 3) sum += std::abs(d.k3);
        for (std::size_t ell = 4; ell <= q; ++ell) sum += std::abs(detail::shifted_difference(k3, p, ell - 3, h));
        c = std::min(c, sum);
      }
    }
    rep.c_est = c;
  }
  return rep;
}

}  // namespace specband
