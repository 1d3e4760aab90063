#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "specband/decay.hpp"
#include "specband/measure.hpp"
#include "specband/propagator.hpp"
#include "specband/spectrum.hpp"

namespace specband::cli {

using nlohmann::json;

enum Exit : int { Ok = 0, ValidationFailure = 1, Usage = 2, Numerical = 3 };

/// Bad flags, unreadable inputs, malformed files.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double; fixed for byte-identical outputs.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct OperatorConfig {
  std::vector<double> a, b;
  std::string hash;  // FNV-1a 64 of the canonical {"a": .., "b": ..} JSON

  JacobiOperator op() const { return JacobiOperator(a, b); }
};

inline std::string config_hash(const std::vector<double>& a, const std::vector<double>& b) {
  const json canonical{{"a", a}, {"b", b}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical.dump())));
  return buf;
}

inline OperatorConfig make_config(std::vector<double> a, std::vector<double> b) {
  OperatorConfig c{std::move(a), std::move(b), {}};
  c.hash = config_hash(c.a, c.b);
  return c;
}

inline OperatorConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path);
  json j;
  try {
    in >> j;
    return make_config(j.at("a").get<std::vector<double>>(), j.at("b").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw UsageError("malformed config " + path + ": " + e.what());
  }
}

/// "geometric:START,STOP,COUNT".
inline TimeGrid parse_times(const std::string& spec) {
  const std::string prefix = "geometric:";
  if (spec.rfind(prefix, 0) != 0) throw UsageError("time grid must be geometric:START,STOP,COUNT, got " + spec);
  std::stringstream ss(spec.substr(prefix.size()));
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ',')) parts.push_back(part);
  if (parts.size() != 3) throw UsageError("time grid needs three fields, got " + spec);
  TimeGrid g;
  try {
    g.start = std::stod(parts[0]);
    g.stop = std::stod(parts[1]);
    const long count = std::stol(parts[2]);
    if (count < 2) throw UsageError("time grid count must be >= 2");
    g.count = static_cast<std::size_t>(count);
  } catch (const std::logic_error&) {
    throw UsageError("unparsable time grid " + spec);
  }
  if (!(g.start > 0.0) || !(g.stop > g.start)) throw UsageError("time grid needs 0 < START < STOP");
  return g;
}

inline std::vector<NormKind> parse_norms(const std::vector<std::string>& names,
                                         std::vector<NormKind> fallback = {NormKind::Sup, NormKind::WeightedSup,
                                                                           NormKind::L2}) {
  if (names.empty()) return fallback;
  std::vector<NormKind> out;
  for (const auto& n : names) {
    const auto k = parse_norm_kind(n);
    if (!k) throw UsageError("unknown norm " + n);
    if (std::find(out.begin(), out.end(), *k) == out.end()) out.push_back(*k);
  }
  return out;
}

inline std::string join(const std::vector<double>& v, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + fmt(v[i]);
  return s;
}

// ---- evolution CSV ----

struct EvolutionCsv {
  OperatorConfig config;
  EvolutionResult result;
};

inline void write_evolution_csv(std::ostream& out, const OperatorConfig& cfg, const EvolutionResult& r) {
  out << "# config_hash=" << cfg.hash << " method=" << to_string(r.method) << " a=" << join(cfg.a)
      << " b=" << join(cfg.b) << "\n";
  out << "t,n,re,im,abs\n";
  for (std::size_t i = 0; i < r.times.size(); ++i)
    for (std::size_t n = 0; n < r.n_max; ++n) {
      const cplx v = r.amplitudes[i][n];
      out << fmt(r.times[i]) << ',' << (n + 1) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << ','
          << fmt(std::abs(v)) << '\n';
    }
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

inline EvolutionCsv read_evolution_csv(std::istream& in) {
  EvolutionCsv csv;
  std::string line;
  std::map<std::string, std::string> meta;
  bool header = false;
  std::map<double, std::vector<cplx>> rows;
  std::size_t lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      if (line[0] == '#') {
        std::stringstream ss(line.substr(1));
        std::string tok;
        while (ss >> tok)
          if (auto eq = tok.find('='); eq != std::string::npos) meta[tok.substr(0, eq)] = tok.substr(eq + 1);
        continue;
      }
      if (!header) {
        if (line != "t,n,re,im,abs") throw UsageError("expected header t,n,re,im,abs, got " + line);
        header = true;
        continue;
      }
      const auto f = parse_list(line);
      if (f.size() != 5) throw UsageError("line " + std::to_string(lineno) + ": expected 5 fields");
      const auto n = static_cast<std::size_t>(f[1]);
      if (n < 1) throw UsageError("line " + std::to_string(lineno) + ": site index must be >= 1");
      auto& row = rows[f[0]];
      if (row.size() < n) row.resize(n, cplx{0.0, 0.0});
      row[n - 1] = cplx{f[2], f[3]};
    }
  } catch (const std::logic_error& e) {
    throw UsageError("line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!header) throw UsageError("evolution CSV has no header row");
  if (!meta.count("a") || !meta.count("b")) throw UsageError("evolution CSV header lacks operator coefficients");
  csv.config = make_config(parse_list(meta["a"]), parse_list(meta["b"]));
  if (meta.count("config_hash") && meta["config_hash"] != csv.config.hash)
    throw UsageError("config hash mismatch: header " + meta["config_hash"] + ", coefficients " + csv.config.hash);
  csv.result.method = meta["method"] == "oracle" ? Method::Oracle : Method::Spectral;
  std::size_t n_max = 0;
  for (const auto& [t, row] : rows) n_max = std::max(n_max, row.size());
  csv.result.n_max = n_max;
  for (auto& [t, row] : rows) {
    row.resize(n_max, cplx{0.0, 0.0});
    csv.result.times.push_back(t);
    csv.result.amplitudes.push_back(row);
  }
  return csv;
}

// ---- SVG ----

struct PlotSeries {
  std::string label;
  std::vector<double> t, norm;
  std::optional<DecayFit> fit;
};

/// Log-log chart of norm against t with the fitted line (solid) and the predicted slope (dashed).
inline std::string svg_plot(const std::vector<PlotSeries>& series, const std::string& title) {
  const double W = 640, H = 480, L = 70, R = 160, T = 40, B = 50;
  double tmin = std::numeric_limits<double>::infinity(), tmax = 0, ymin = tmin, ymax = 0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!(s.norm[i] > 0)) continue;
      tmin = std::min(tmin, s.t[i]), tmax = std::max(tmax, s.t[i]);
      ymin = std::min(ymin, s.norm[i]), ymax = std::max(ymax, s.norm[i]);
    }
  if (!(tmax > tmin)) tmax = tmin * 10.0;
  if (!(ymax > ymin)) ymax = ymin * 10.0;
  const double lx0 = std::log10(tmin), lx1 = std::log10(tmax);
  const double ly0 = std::log10(ymin) - 0.1, ly1 = std::log10(ymax) + 0.1;
  auto px = [&](double t) { return L + (std::log10(t) - lx0) / (lx1 - lx0) * (W - L - R); };
  auto py = [&](double y) { return T + (ly1 - std::log10(y)) / (ly1 - ly0) * (H - T - B); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\""
    << " font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << (W - L - R) << "\" height=\"" << (H - T - B)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(lx0)); d <= static_cast<int>(std::floor(lx1)); ++d) {
    const double x = px(std::pow(10.0, d));
    o << "<line x1=\"" << num(x) << "\" y1=\"" << (H - B) << "\" x2=\"" << num(x) << "\" y2=\"" << (H - B + 5)
      << "\" stroke=\"black\"/><text x=\"" << num(x) << "\" y=\"" << (H - B + 18)
      << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ly0)); d <= static_cast<int>(std::floor(ly1)); ++d) {
    const double y = py(std::pow(10.0, d));
    o << "<line x1=\"" << (L - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << L << "\" y2=\"" << num(y)
      << "\" stroke=\"black\"/><text x=\"" << (L - 8) << "\" y=\"" << num(y + 4)
      << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  o << "<text x=\"" << (L + (W - L - R) / 2) << "\" y=\"" << (H - 12) << "\" text-anchor=\"middle\">t</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 4];
    for (std::size_t i = 0; i < s.t.size(); ++i)
      if (s.norm[i] > 0)
        o << "<circle cx=\"" << num(px(s.t[i])) << "\" cy=\"" << num(py(s.norm[i])) << "\" r=\"3\" fill=\"" << c
          << "\"/>\n";
    std::string legend = s.label;
    if (s.fit) {
      const auto& f = *s.fit;
      auto line = [&](double slope, double icpt, const char* dash) {
        const double y0 = std::exp(icpt + slope * std::log(tmin)), y1 = std::exp(icpt + slope * std::log(tmax));
        o << "<line x1=\"" << num(px(tmin)) << "\" y1=\"" << num(py(y0)) << "\" x2=\"" << num(px(tmax)) << "\" y2=\""
          << num(py(y1)) << "\" stroke=\"" << c << "\"" << dash << "/>\n";
      };
      line(f.slope, f.intercept, "");
      if (f.predicted) {
        // Guide through the first fitted point.
        const double lt = std::log(s.t.front()), ly = f.intercept + f.slope * lt;
        line(*f.predicted, ly - *f.predicted * lt, " stroke-dasharray=\"6,4\"");
      }
      legend += " slope " + num(f.slope) + (f.predicted ? " (pred " + num(*f.predicted) + ")" : "");
    }
    o << "<text x=\"" << (W - R + 8) << "\" y=\"" << (T + 16 + 18 * k) << "\" fill=\"" << c << "\">" << legend
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

// ---- JSON views ----

/// -0.0 prints as "-0.0"; report it as zero.
inline double clean(double v) { return v == 0.0 ? 0.0 : v; }

inline std::vector<double> clean(std::vector<double> v) {
  for (double& x : v) x = clean(x);
  return v;
}

inline json to_json(const BandStructure& B) {
  json bands = json::array();
  for (const auto& b : B.bands)
    bands.push_back({{"lo", clean(b.lo)}, {"hi", clean(b.hi)}, {"orientation", b.orientation},
                     {"gapped_lo", b.gapped_lo}, {"gapped_hi", b.gapped_hi}});
  return {{"edges", clean(B.edges)}, {"critical_points", clean(B.critical_points)}, {"bands", bands}};
}

inline json to_json(const std::vector<EigenvalueInfo>& eig) {
  json out = json::array();
  for (const auto& e : eig) out.push_back({{"E", clean(e.value)}, {"gap_index", e.gap_index}, {"weight", e.weight}});
  return out;
}

inline json to_json(const AuditReport& a) {
  json bands = json::array();
  for (const auto& b : a.bands)
    bands.push_back({{"gapped_lo", b.gapped_lo},
                     {"gapped_hi", b.gapped_hi},
                     {"T2", clean(b.t2)},
                     {"T3", clean(b.t3)},
                     {"min_abs_k3_on_T2", std::isfinite(b.min_k3_on_t2) ? json(b.min_k3_on_t2) : json(nullptr)}});
  json out{{"period", a.period},
           {"bands", bands},
           {"nondegenerate", a.nondegenerate},
           {"evenq_all_gapped", a.evenq_all_gapped},
           {"predicted_local_exponent", a.predicted_local_exponent}};
  out["predicted_global_exponent"] =
      a.predicted_global_exponent ? json(*a.predicted_global_exponent) : json("unclassified");
  out["c_est"] = a.c_est ? json(*a.c_est) : json(nullptr);
  return out;
}

inline json to_json(const DecayFit& f) {
  return {{"kind", std::string(to_string(f.kind))},
          {"slope", f.slope},
          {"ci", f.half_width},
          {"intercept", f.intercept},
          {"residual_rms", f.residual_rms},
          {"points", f.points_used},
          {"t_min", f.t_min},
          {"predicted", f.predicted ? json(*f.predicted) : json(nullptr)},
          {"pass", f.pass}};
}

// ---- validation suite ----

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool pass() const { return value <= tolerance; }
};

/// Moments, orthonormality, edge residuals, total mass, oracle agreement and unitarity on one operator.
inline std::vector<Check> validation_checks(const JacobiOperator& J) {
  std::vector<Check> out;
  const SpectralMeasure S(J);
  const auto& M = S.monodromy();
  double edge = 0.0;
  for (double e : S.bands().edges) edge = std::max(edge, std::abs(std::abs(M.delta(e)) - 2.0));
  out.push_back({"edge residual ||Delta|-2|", edge, 1e-8});
  out.push_back({"total mass |mu(R)-1|", std::abs(S.total_mass() - 1.0), 1e-8});
  double mom = 0.0;
  for (std::size_t k = 0; k <= 20; ++k) {
    const double exact = moment_exact(J, k);
    mom = std::max(mom, std::abs(moment(S, k) - exact) / std::max(1.0, std::abs(exact)));
  }
  out.push_back({"moments k<=20 (relative)", mom, 1e-8});
  const auto G = gram_matrix(S, 50);
  double orth = 0.0;
  for (std::size_t n = 0; n <= 50; ++n)
    for (std::size_t m = 0; m <= 50; ++m) orth = std::max(orth, std::abs(G[n][m] - (n == m ? 1.0 : 0.0)));
  out.push_back({"orthonormality n,m<=50", orth, 1e-7});
  const SpectralPropagator prop(S);
  const OracleEvolver oracle(J);
  const auto u = FiniteState::delta(1);
  const double pc = project_continuous(S, u).l2_norm();
  double agree = 0.0, unit = 0.0;
  for (double t : {1.0, 10.0}) {
    const std::size_t n_max = default_n_max(J, u, t);
    const auto s = prop.row(u, t, n_max);
    const auto o = oracle.row(u, t, n_max);
    for (std::size_t n = 0; n < n_max; ++n) agree = std::max(agree, std::abs(s[n] - o[n]));
    unit = std::max(unit, std::abs(state_norm(s, NormKind::L2) - pc) / pc);
  }
  out.push_back({"spectral vs oracle t in {1,10}", agree, 1e-6});
  out.push_back({"unitarity drift (relative)", unit, 1e-7});
  return out;
}

// ---- commands ----

struct Options {
  std::string config;
  std::string out;
  std::string input;
  std::string times = "geometric:20,2000,24";
  std::size_t grid = 200;
  std::vector<std::string> norms;
  std::string method = "spectral";
  bool emit_plot = false;
  std::optional<std::size_t> n_max;
  double t_min = 20.0;
  std::size_t site = 1;
  std::size_t node_budget = PropagatorOptions{}.node_budget;
  std::size_t truncation_cap = PropagatorOptions{}.truncation_cap;

  PropagatorOptions propagator() const { return {node_budget, truncation_cap, PropagatorOptions{}.nodes_per_panel}; }
};

/// Writes to --out when given, else to `fallback`.
inline void emit(const Options& o, std::ostream& fallback, const std::string& text) {
  if (o.out.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot write " + o.out);
  f << text;
}

inline std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path.empty() ? "out" : path);
  return (p.parent_path() / p.stem()).string() + suffix;
}

inline int cmd_spectrum(const Options& o, std::ostream& out) {
  const auto cfg = load_config(o.config);
  const SpectralMeasure S(cfg.op());
  json j{{"config_hash", cfg.hash}, {"period", S.op().period()}};
  j.update(to_json(S.bands()));
  j["eigenvalues"] = to_json(S.point_masses());
  if (S.op().reduction_notice()) j["notice"] = *S.op().reduction_notice();
  emit(o, out, j.dump(2) + "\n");
  return Ok;
}

inline int cmd_measure(const Options& o, std::ostream& out) {
  const auto cfg = load_config(o.config);
  const SpectralMeasure S(cfg.op());
  if (o.grid < 2) throw UsageError("--grid must be >= 2");
  std::ostringstream csv;
  csv << "# config_hash=" << cfg.hash << "\n";
  csv << "x,band_index,w\n";
  for (std::size_t j = 0; j < S.bands().band_count(); ++j) {
    const auto& b = S.bands().bands[j];
    for (std::size_t i = 0; i < o.grid; ++i) {
      const double x = b.lo + b.width() * static_cast<double>(i) / static_cast<double>(o.grid - 1);
      csv << fmt(x) << ',' << (j + 1) << ',' << fmt(S.density(x)) << '\n';
    }
  }
  emit(o, out, csv.str());
  const json masses{{"config_hash", cfg.hash}, {"point_masses", to_json(S.point_masses())}};
  if (o.out.empty()) return Ok;
  std::ofstream f(sibling(o.out, ".masses.json"), std::ios::binary);
  if (!f) throw UsageError("cannot write masses sidecar");
  f << masses.dump(2) << "\n";
  return Ok;
}

inline std::vector<PlotSeries> plot_series(const EvolutionResult& r, const JacobiOperator& J,
                                           const std::vector<NormKind>& kinds, const AuditReport& audit,
                                           double t_min) {
  std::vector<PlotSeries> out;
  for (NormKind k : kinds) {
    PlotSeries s{std::string(to_string(k)), r.times, norms_of(r, k, norm_bound(J)), std::nullopt};
    try {
      DecayFit f = fit_exponent(s.t, s.norm, t_min, k);
      judge(f, predicted_exponent(k, audit));
      s.fit = f;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientPoints) throw;
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline int cmd_evolve(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = load_config(o.config);
  const auto times = parse_times(o.times).points();
  if (o.method != "spectral" && o.method != "oracle" && o.method != "both")
    throw UsageError("--method must be spectral, oracle or both");
  const SpectralMeasure S(cfg.op());
  const auto u = FiniteState::delta(o.site);
  const std::size_t n_max = o.n_max.value_or(default_n_max(S.op(), u, times.back()));
  const Method primary = o.method == "oracle" ? Method::Oracle : Method::Spectral;
  const auto r = evolve(S, u, times, n_max, primary, o.propagator());
  int code = Ok;
  if (o.method == "both") {
    const auto ref = evolve(S, u, times, n_max, Method::Oracle, o.propagator());
    for (std::size_t i = 0; i < times.size(); ++i) {
      double d = 0.0;
      for (std::size_t n = 0; n < n_max; ++n) d = std::max(d, std::abs(r.amplitudes[i][n] - ref.amplitudes[i][n]));
      err << "t=" << fmt(times[i]) << " max|spectral-oracle|=" << fmt(d) << "\n";
      if (d > 1e-6) code = ValidationFailure;
    }
  }
  std::ostringstream csv;
  write_evolution_csv(csv, cfg, r);
  emit(o, out, csv.str());
  if (o.emit_plot) {
    const auto audit = stationary_audit(S.monodromy(), S.bands());
    const auto series = plot_series(r, S.op(), parse_norms(o.norms, {NormKind::Sup}), audit, o.t_min);
    std::ofstream f(sibling(o.out.empty() ? "evolve.csv" : o.out, ".svg"), std::ios::binary);
    if (!f) throw UsageError("cannot write plot");
    f << svg_plot(series, "config " + cfg.hash + ", " + std::string(to_string(r.method)));
  }
  return code;
}

inline int cmd_decay_fit(const Options& o, std::ostream& out) {
  if (o.input.empty()) throw UsageError("decay-fit needs an evolution CSV");
  std::ifstream in(o.input);
  if (!in) throw UsageError("cannot read " + o.input);
  auto csv = read_evolution_csv(in);
  if (!o.config.empty()) {
    const auto cfg = load_config(o.config);
    if (cfg.hash != csv.config.hash) throw UsageError("--config does not match the CSV operator");
  }
  const JacobiOperator J = csv.config.op();
  const MonodromyData M(J);
  const auto audit = stationary_audit(M, band_structure(M));
  json fits = json::array();
  for (NormKind k : parse_norms(o.norms)) {
    DecayFit f = fit_exponent(csv.result.times, norms_of(csv.result, k, norm_bound(J)), o.t_min, k);
    judge(f, predicted_exponent(k, audit));
    fits.push_back(to_json(f));
  }
  const json j{{"config_hash", csv.config.hash}, {"method", std::string(to_string(csv.result.method))}, {"fits", fits}};
  emit(o, out, j.dump(2) + "\n");
  return Ok;
}

inline int cmd_audit(const Options& o, std::ostream& out) {
  const auto cfg = load_config(o.config);
  const SpectralMeasure S(cfg.op());
  json j{{"config_hash", cfg.hash}};
  j.update(to_json(stationary_audit(S.monodromy(), S.bands())));
  j["edges"] = clean(S.bands().edges);
  j["eigenvalues"] = to_json(S.point_masses());
  emit(o, out, j.dump(2) + "\n");
  return Ok;
}

inline int cmd_validate(const Options& o, std::ostream& out) {
  const auto cfg = load_config(o.config);
  const auto checks = validation_checks(cfg.op());
  std::ostringstream t;
  t << "config " << cfg.hash << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-34s %12s %10s  %s\n", "check", "value", "tolerance", "result");
  t << line;
  bool all = true;
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%-34s %12.3e %10.1e  %s\n", c.name.c_str(), c.value, c.tolerance,
                  c.pass() ? "PASS" : "FAIL");
    t << line;
    all = all && c.pass();
  }
  t << (all ? "all checks passed\n" : "validation FAILED\n");
  emit(o, out, t.str());
  return all ? Ok : ValidationFailure;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Spectral theory and dispersive decay of periodic Jacobi operators", "specband"};
  app.require_subcommand(1);
  Options o;
  long n_max = -1;

  auto add_config = [&](CLI::App* s, bool required) {
    auto* opt = s->add_option("--config", o.config, "operator JSON {\"a\": [...], \"b\": [...]}");
    if (required) opt->required();
  };
  auto add_budgets = [&](CLI::App* s) {
    s->add_option("--node-budget", o.node_budget, "quadrature node cap per time");
    s->add_option("--truncation-cap", o.truncation_cap, "oracle truncation cap");
  };

  auto* spectrum = app.add_subcommand("spectrum", "bands, edges and eigenvalues as JSON");
  add_config(spectrum, true);
  spectrum->add_option("--out", o.out);

  auto* measure = app.add_subcommand("measure", "density CSV plus point-mass JSON sidecar");
  add_config(measure, true);
  measure->add_option("--out", o.out);
  measure->add_option("--grid", o.grid, "points per band");

  auto* evolve_cmd = app.add_subcommand("evolve", "amplitudes of e^{-itJ} P_c delta_site as CSV");
  add_config(evolve_cmd, true);
  evolve_cmd->add_option("--out", o.out);
  evolve_cmd->add_option("--times", o.times, "geometric:START,STOP,COUNT");
  evolve_cmd->add_option("--method", o.method, "spectral, oracle or both");
  evolve_cmd->add_option("--n-max", n_max, "number of stored sites");
  evolve_cmd->add_option("--site", o.site, "initial site")->check(CLI::PositiveNumber);
  evolve_cmd->add_option("--norm", o.norms, "norms drawn by --emit-plot")->take_all();
  evolve_cmd->add_option("--t-min", o.t_min);
  evolve_cmd->add_flag("--emit-plot", o.emit_plot, "write an SVG log-log chart next to --out");
  add_budgets(evolve_cmd);

  auto* fit = app.add_subcommand("decay-fit", "fit decay exponents from an evolution CSV");
  fit->add_option("input", o.input, "evolution CSV")->required();
  add_config(fit, false);
  fit->add_option("--out", o.out);
  fit->add_option("--norm", o.norms, "sup, wsup or l2 (repeatable)")->take_all();
  fit->add_option("--t-min", o.t_min);

  auto* audit = app.add_subcommand("audit", "stationary-point audit as JSON");
  add_config(audit, true);
  audit->add_option("--out", o.out);

  auto* validate = app.add_subcommand("validate", "invariant suite with a pass/fail table");
  add_config(validate, true);
  validate->add_option("--out", o.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return Ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return Usage;
  }
  if (n_max > 0) o.n_max = static_cast<std::size_t>(n_max);
  if (n_max == 0) {
    err << "usage error: --n-max must be positive\n";
    return Usage;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(o, out);
    if (measure->parsed()) return cmd_measure(o, out);
    if (evolve_cmd->parsed()) return cmd_evolve(o, out, err);
    if (fit->parsed()) return cmd_decay_fit(o, out);
    if (audit->parsed()) return cmd_audit(o, out);
    if (validate->parsed()) return cmd_validate(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return Usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return Numerical;
  }
  return Usage;
}

/// Convenience overload taking the arguments after the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"specband"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace specband::cli
