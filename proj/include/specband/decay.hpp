#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "specband/errors.hpp"
#include "specband/measure.hpp"
#include "specband/propagator.hpp"
#include "specband/spectrum.hpp"

namespace specband {

enum class NormKind { Sup, WeightedSup, L2 };

inline std::string_view to_string(NormKind k) {
  switch (k) {
    case NormKind::Sup: return "sup";
    case NormKind::WeightedSup: return "wsup";
    case NormKind::L2: return "l2";
  }
  return "unknown";
}

inline std::optional<NormKind> parse_norm_kind(std::string_view s) {
  if (s == "sup") return NormKind::Sup;
  if (s == "wsup") return NormKind::WeightedSup;
  if (s == "l2") return NormKind::L2;
  return std::nullopt;
}

/// sup |psi_n|, sup |psi_n| / n, or the l2 norm. With `wavefront` = |J| t, the stored range must reach
/// wavefront + 64 sites.
inline double state_norm(const std::vector<cplx>& psi, NormKind kind, std::optional<double> wavefront = std::nullopt) {
  if (wavefront && static_cast<double>(psi.size()) < *wavefront + 64.0)
    throw Error(ErrorCode::RangeTooSmall, "stored sites " + std::to_string(psi.size()) + " below wavefront " +
                                              std::to_string(*wavefront) + " + 64");
  double out = 0.0;
  for (std::size_t n = 0; n < psi.size(); ++n) {
    const double v = std::abs(psi[n]);
    switch (kind) {
      case NormKind::Sup: out = std::max(out, v); break;
      case NormKind::WeightedSup: out = std::max(out, v / static_cast<double>(n + 1)); break;
      case NormKind::L2: out += v * v; break;
    }
  }
  return kind == NormKind::L2 ? std::sqrt(out) : out;
}

namespace tol {
inline constexpr double slope = 0.07;
inline constexpr double l2_slope = 0.02;
}  // namespace tol

struct DecayFit {
  NormKind kind = NormKind::Sup;
  std::vector<double> times;
  std::vector<double> norms;
  double t_min = 20.0;
  std::size_t points_used = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  double half_width = 0.0;  // 1.96 standard errors of the slope
  std::optional<double> predicted;
  bool pass = false;
};

/// Least squares of log norm against log t over t >= t_min.
inline DecayFit fit_exponent(const std::vector<double>& times, const std::vector<double>& norms, double t_min = 20.0,
                             NormKind kind = NormKind::Sup) {
  if (times.size() != norms.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(times.size()) + " times, " + std::to_string(norms.size()) +
                                               " norms");
  DecayFit fit{kind, times, norms, t_min};
  std::vector<double> X, Y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(norms[i] > 0.0))
      throw Error(ErrorCode::NonPositiveNorm, "norm " + std::to_string(norms[i]) + " at t = " + std::to_string(times[i]));
    if (times[i] >= t_min) {
      X.push_back(std::log(times[i]));
      Y.push_back(std::log(norms[i]));
    }
  }
  const std::size_t n = X.size();
  if (n < 8) throw Error(ErrorCode::InsufficientPoints, std::to_string(n) + " points with t >= " + std::to_string(t_min));
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += X[i], my += Y[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  fit.points_used = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = Y[i] - fit.intercept - fit.slope * X[i];
    ssr += r * r;
  }
  fit.residual_rms = std::sqrt(ssr / static_cast<double>(n));
  fit.half_width = 1.96 * std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return fit;
}

/// Predicted exponent for each norm: sup from the audit (0, the unitarity bound, when unclassified), -1/2 for the
/// weighted sup, 0 for l2.
inline double predicted_exponent(NormKind kind, const AuditReport& audit) {
  switch (kind) {
    case NormKind::Sup: return audit.predicted_global_exponent.value_or(0.0);
    case NormKind::WeightedSup: return audit.predicted_local_exponent;
    case NormKind::L2: return 0.0;
  }
  return 0.0;
}

/// One-sided for the bounds, two-sided for l2 conservation.
inline void judge(DecayFit& fit, double predicted) {
  fit.predicted = predicted;
  fit.pass = fit.kind == NormKind::L2 ? std::abs(fit.slope - predicted) <= tol::l2_slope
                                      : fit.slope <= predicted + tol::slope;
}

/// Geometric time grid START..STOP with COUNT points.
struct TimeGrid {
  double start = 20.0;
  double stop = 2000.0;
  std::size_t count = 24;

  std::vector<double> points() const {
    if (!(start > 0.0) || count < 2 || !(stop > start))
      throw std::invalid_argument("geometric grid needs 0 < start < stop and count >= 2");
    std::vector<double> t(count);
    const double r = std::log(stop / start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) t[i] = start * std::exp(r * static_cast<double>(i));
    t.back() = stop;
    return t;
  }
};

struct ExperimentOptions {
  double t_min = 20.0;
  std::optional<std::size_t> n_max;  // default: |J| t_max + 64 + support of u
  Method method = Method::Spectral;
  PropagatorOptions propagator;
};

struct ExperimentResult {
  EvolutionResult evolution;
  AuditReport audit;
  std::vector<DecayFit> fits;
};

inline std::size_t default_n_max(const JacobiOperator& J, const FiniteState& u, double t_max) {
  return static_cast<std::size_t>(std::ceil(norm_bound(J) * t_max)) + 64 + u.size();
}

/// Norms of each evolved row.
inline std::vector<double> norms_of(const EvolutionResult& r, NormKind kind, std::optional<double> speed = std::nullopt) {
  std::vector<double> out;
  for (std::size_t i = 0; i < r.times.size(); ++i)
    out.push_back(state_norm(r.amplitudes[i], kind,
                             speed ? std::optional<double>(*speed * r.times[i]) : std::nullopt));
  return out;
}

/// Evolves u over the grid (spectral, falling back to the oracle when the node budget is exceeded), fits every
/// requested norm and attaches the audit's predictions.
inline ExperimentResult decay_experiment(const SpectralMeasure& S, const FiniteState& u, const std::vector<double>& times,
                                         const std::vector<NormKind>& kinds, const ExperimentOptions& opt = {}) {
  const JacobiOperator& J = S.op();
  const double t_max = *std::max_element(times.begin(), times.end());
  const std::size_t n_max = opt.n_max.value_or(default_n_max(J, u, t_max));
  ExperimentResult out{EvolutionResult{}, stationary_audit(S.monodromy(), S.bands()), {}};
  try {
    out.evolution = evolve(S, u, times, n_max, opt.method, opt.propagator);
  } catch (const Error& e) {
    if (opt.method != Method::Spectral || e.code() != ErrorCode::QuadratureBudgetExceeded) throw;
    out.evolution = evolve(S, u, times, n_max, Method::Oracle, opt.propagator);
  }
  const double speed = norm_bound(J);
  for (NormKind kind : kinds) {
    DecayFit fit = fit_exponent(times, norms_of(out.evolution, kind, speed), opt.t_min, kind);
    judge(fit, predicted_exponent(kind, out.audit));
    out.fits.push_back(std::move(fit));
  }
  return out;
}

}  // namespace specband
