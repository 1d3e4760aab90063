// Acceptance suite: one PASS/FAIL line per criterion, tolerances and runtime limits pinned below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "specband/decay.hpp"
#include "test_support.hpp"

using namespace specband;
constexpr double pi = std::numbers::pi;

namespace {

namespace limit {
constexpr double monodromy_rel = 1e-8;
constexpr double edge_abs = 1e-10;
constexpr double weight_abs = 1e-8;
constexpr double moment_rel = 1e-8;
constexpr double gram_abs = 1e-7;
constexpr double propagator_abs = 1e-6;
constexpr double slope_abs = 0.07;
constexpr double bound_margin = 0.07;
constexpr double l2_rel = 1e-7;
constexpr double overlap_abs = 1e-7;
constexpr double t2_abs = 1e-8;
constexpr double fd1_rel = 1e-4, fd2_rel = 1e-3, fd3_rel = 5e-2;
constexpr double fd_step = 1e-5;
constexpr double runtime_1 = 5.0, runtime_2 = 1.0, runtime_3 = 60.0, runtime_4 = 120.0, runtime_56 = 600.0;
}  // namespace limit

constexpr std::uint64_t seed = 20240917;

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); }
};

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail, double seconds,
            double runtime_limit = 0.0) {
  char timing[96];
  if (runtime_limit > 0.0)
    std::snprintf(timing, sizeof timing, "%.2f s (limit %.0f s)", seconds, runtime_limit);
  else
    std::snprintf(timing, sizeof timing, "%.2f s", seconds);
  if (runtime_limit > 0.0 && seconds > runtime_limit) pass = false;
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " | " << detail << " | " << timing
            << std::endl;
}

std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2e", v);
  return b;
}

std::string fixed(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%+.4f", v);
  return b;
}

double l2(const std::vector<cplx>& x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}

/// One long-time run: operator, state, evolution over the decay grid and its fits.
struct DecayRun {
  std::string label;
  std::unique_ptr<SpectralMeasure> S;
  FiniteState u;
  ExperimentResult r;

  const DecayFit& fit(NormKind k) const {
    return *std::find_if(r.fits.begin(), r.fits.end(), [&](const DecayFit& f) { return f.kind == k; });
  }
};

DecayRun decay_run(std::string label, const JacobiOperator& J) {
  DecayRun run{std::move(label), std::make_unique<SpectralMeasure>(J), FiniteState::delta(1), {}};
  const auto times = TimeGrid{20.0, 2000.0, 24}.points();
  ExperimentOptions opt;
  opt.t_min = 20.0;
  run.r = decay_experiment(*run.S, run.u, times, {NormKind::Sup, NormKind::WeightedSup, NormKind::L2}, opt);
  return run;
}

std::string describe(const JacobiOperator& J) {
  std::ostringstream s;
  s.precision(4);
  s << "a=[";
  for (std::size_t i = 0; i < J.period(); ++i) s << (i ? "," : "") << J.a()[i];
  s << "] b=[";
  for (std::size_t i = 0; i < J.period(); ++i) s << (i ? "," : "") << J.b()[i];
  s << "]";
  return s.str();
}

void criterion_1() {
  const Clock clock;
  double worst = 0.0;
  for (std::size_t q : {1u, 2u, 3u, 4u}) {
    std::mt19937_64 rng(seed + q);
    for (const auto& J : fixtures::random_suite(10, q, seed + 10 * q)) {
      const MonodromyData M(J);
      const auto B = band_structure(M);
      for (int i = 0; i < 100; ++i) {
        const double x = fixtures::random_band_interior(B, rng);
        for (std::size_t s = 1; s <= 8; ++s) {
          const Mat2 brute = transfer_matrix(J, s * q, x);
          const Mat2 closed = power_via_rho(M, s, x);
          const double d = std::max({std::abs(brute.m11 - closed.m11), std::abs(brute.m12 - closed.m12),
                                     std::abs(brute.m21 - closed.m21), std::abs(brute.m22 - closed.m22)});
          worst = std::max(worst, d / brute.max_abs());
        }
      }
    }
  }
  report(1, "monodromy power identity", worst <= limit::monodromy_rel,
         "max relative error " + sci(worst) + " (tol " + sci(limit::monodromy_rel) + ", 40 operators x 100 points x s<=8)",
         clock.seconds(), limit::runtime_1);
}

void criterion_2() {
  const Clock clock;
  const SpectralMeasure ssh(fixtures::ssh());
  const std::vector<double> ssh_edges{-3.0, -1.0, 1.0, 3.0};
  double edge_err = ssh.bands().edges.size() == 4 ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min<std::size_t>(4, ssh.bands().edges.size()); ++i)
    edge_err = std::max(edge_err, std::abs(ssh.bands().edges[i] - ssh_edges[i]));
  const auto& pm = ssh.point_masses();
  const bool one_eigen = pm.size() == 1;
  const double e_err = one_eigen ? std::abs(pm[0].value) : INFINITY;
  const double w_err = one_eigen ? std::abs(pm[0].weight - 0.75) : INFINITY;

  const SpectralMeasure lap(fixtures::laplacian());
  double lap_err = lap.bands().edges.size() == 2 ? 0.0 : INFINITY;
  if (lap.bands().edges.size() == 2)
    lap_err = std::max(std::abs(lap.bands().edges[0] + 2.0), std::abs(lap.bands().edges[1] - 2.0));
  const bool lap_clean = lap.point_masses().empty();

  const bool pass = edge_err <= limit::edge_abs && e_err <= limit::edge_abs && w_err <= limit::weight_abs &&
                    lap_err <= limit::edge_abs && lap_clean;
  report(2, "reference band structures", pass,
         "SSH edge err " + sci(edge_err) + ", eigenvalue err " + sci(e_err) + ", weight err " + sci(w_err) +
             "; Laplacian edge err " + sci(lap_err) + ", eigenvalues " + std::to_string(lap.point_masses().size()),
         clock.seconds(), limit::runtime_2);
}

void criterion_3() {
  const Clock clock;
  double moment_worst = 0.0, gram_worst = 0.0;
  const auto suite = [] {
    std::vector<JacobiOperator> ops;
    std::mt19937_64 rng(seed + 3);
    for (std::size_t i = 0; i < 10; ++i) ops.push_back(fixtures::random_operator(1 + i % 4, rng));
    return ops;
  }();
  for (const auto& J : suite) {
    const SpectralMeasure S(J);
    for (std::size_t k = 0; k <= 20; ++k) {
      const double exact = moment_exact(J, k);
      moment_worst = std::max(moment_worst, std::abs(moment(S, k) - exact) / std::max(1.0, std::abs(exact)));
    }
    const auto G = gram_matrix(S, 50);
    for (std::size_t n = 0; n <= 50; ++n)
      for (std::size_t m = 0; m <= 50; ++m) gram_worst = std::max(gram_worst, std::abs(G[n][m] - (n == m ? 1.0 : 0.0)));
  }
  report(3, "spectral measure fidelity", moment_worst <= limit::moment_rel && gram_worst <= limit::gram_abs,
         "moment rel err " + sci(moment_worst) + " (tol " + sci(limit::moment_rel) + "), orthonormality err " +
             sci(gram_worst) + " (tol " + sci(limit::gram_abs) + "), 10 operators q<=4",
         clock.seconds(), limit::runtime_3);
}

void criterion_4() {
  const Clock clock;
  double worst = 0.0;
  for (std::size_t q : {1u, 2u, 3u}) {
    for (const auto& J : fixtures::random_suite(5, q, seed + 40 + q)) {
      const SpectralMeasure S(J);
      for (std::size_t site : {1u, 3u}) {
        const auto u = FiniteState::delta(site);
        for (double t : {1.0, 10.0, 100.0}) {
          const std::size_t n_max = default_n_max(J, u, t);
          const auto spec = evolve_spectral(S, u, t, n_max);
          const auto orac = evolve_oracle(J, u, t, n_max);
          for (std::size_t n = 0; n < n_max; ++n) worst = std::max(worst, std::abs(spec[n] - orac[n]));
        }
      }
    }
  }
  report(4, "spectral vs Chebyshev oracle", worst <= limit::propagator_abs,
         "max site difference " + sci(worst) + " (tol " + sci(limit::propagator_abs) +
             "), t in {1,10,100}, delta_1 and delta_3, 5 operators per q in {1,2,3}",
         clock.seconds(), limit::runtime_4);
}

void criteria_5_6(const std::vector<DecayRun>& refs, double seconds) {
  bool pass5 = true;
  std::string d5;
  for (const auto& run : refs) {
    const double s = run.fit(NormKind::WeightedSup).slope;
    pass5 = pass5 && std::abs(s + 0.5) <= limit::slope_abs;
    d5 += (d5.empty() ? "" : ", ") + run.label + " " + fixed(s);
  }
  report(5, "weighted sup slope within 0.07 of -1/2", pass5, d5, seconds, limit::runtime_56);

  bool pass6 = true;
  std::string d6;
  for (std::size_t i = 0; i < 2; ++i) {
    const double s = refs[i].fit(NormKind::Sup).slope;
    pass6 = pass6 && std::abs(s + 1.0 / 3.0) <= limit::slope_abs;
    d6 += (d6.empty() ? "" : ", ") + refs[i].label + " " + fixed(s);
  }
  report(6, "sup slope within 0.07 of -1/3", pass6, d6, seconds, limit::runtime_56);
}

void criterion_7(const std::vector<DecayRun>& suite, double seconds) {
  bool pass = true;
  double worst_margin = -INFINITY;
  std::size_t unclassified = 0;
  for (const auto& run : suite) {
    const double predicted = predicted_exponent(NormKind::Sup, run.r.audit);
    const double s = run.fit(NormKind::Sup).slope;
    worst_margin = std::max(worst_margin, s - predicted);
    pass = pass && s <= predicted + limit::bound_margin;
    unclassified += !run.r.audit.predicted_global_exponent.has_value();
  }
  report(7, "sup slope below predicted bound", pass,
         std::to_string(suite.size()) + " operators, max(slope - predicted) " + fixed(worst_margin) + " (margin " +
             fixed(limit::bound_margin) + "), unclassified " + std::to_string(unclassified),
         seconds);
}

void criterion_8(const std::vector<const DecayRun*>& runs) {
  const Clock clock;
  double l2_worst = 0.0, overlap_worst = 0.0;
  for (const auto* run : runs) {
    const double ref = project_continuous(*run->S, run->u).l2_norm();
    for (const auto& psi : run->r.evolution.amplitudes) l2_worst = std::max(l2_worst, std::abs(l2(psi) - ref) / ref);
  }
  const DecayRun& ssh = *runs[1];
  const auto phi = eigenvector(ssh.S->op(), 0.0, ssh.S->point_masses().at(0).weight);
  for (const auto& psi : ssh.r.evolution.amplitudes) {
    cplx c{0.0, 0.0};
    for (std::size_t n = 0; n < std::min(phi.size(), psi.size()); ++n) c += phi[n] * psi[n];
    overlap_worst = std::max(overlap_worst, std::abs(c));
  }
  report(8, "conservation and bound-state orthogonality", l2_worst <= limit::l2_rel && overlap_worst <= limit::overlap_abs,
         "l2 rel drift " + sci(l2_worst) + " (tol " + sci(limit::l2_rel) + ") over " + std::to_string(runs.size()) +
             " runs, SSH |<phi_0, psi>| " + sci(overlap_worst) + " (tol " + sci(limit::overlap_abs) + ")",
         clock.seconds());
}

void criterion_9() {
  const Clock clock;
  const SpectralMeasure lap(fixtures::laplacian());
  const auto audit = stationary_audit(lap.monodromy(), lap.bands());
  const auto& b = audit.bands.at(0);
  const bool t2_ok = b.t2.size() == 1 && std::abs(b.t2[0] + pi / 2) <= limit::t2_abs;
  const bool t3_ok = std::none_of(b.t3.begin(), b.t3.end(), [](double r) { return std::abs(r + pi / 2) <= limit::t2_abs; });

  std::mt19937_64 rng(seed + 9);
  std::uniform_real_distribution<double> uphi(-pi + 0.05, -0.05);
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  const SpectralMeasure ssh(fixtures::ssh());
  for (const SpectralMeasure* S : {&lap, &ssh}) {
    for (const auto& k : S->phases()) {
      for (int i = 0; i < 50; ++i) {
        const double phi = uphi(rng);
        const double h = limit::fd_step;
        const auto d = k.derivatives(phi), dp = k.derivatives(phi + h), dm = k.derivatives(phi - h);
        e1 = std::max(e1, std::abs((dp.k - dm.k) / (2 * h) - d.k1) / std::max(1.0, std::abs(d.k1)));
        e2 = std::max(e2, std::abs((dp.k1 - dm.k1) / (2 * h) - d.k2) / std::max(1.0, std::abs(d.k2)));
        e3 = std::max(e3, std::abs((dp.k2 - dm.k2) / (2 * h) - d.k3) / std::max(1.0, std::abs(d.k3)));
      }
    }
  }
  const bool fd_ok = e1 <= limit::fd1_rel && e2 <= limit::fd2_rel && e3 <= limit::fd3_rel;
  std::string t2s = "{";
  for (std::size_t i = 0; i < b.t2.size(); ++i) t2s += (i ? "," : "") + fixed(b.t2[i]);
  t2s += "}";
  report(9, "Laplacian audit and derivative identities", t2_ok && t3_ok && audit.nondegenerate && fd_ok,
         "T2=" + t2s + ", -pi/2 " + (t3_ok ? "not in" : "in") + " T3, nondegenerate=" +
             (audit.nondegenerate ? "true" : "false") + ", finite-difference errors " + sci(e1) + "/" + sci(e2) + "/" +
             sci(e3) + " (tol " + sci(limit::fd1_rel) + "/" + sci(limit::fd2_rel) + "/" + sci(limit::fd3_rel) + ")",
         clock.seconds());
}

void criterion_10() {
  const Clock clock;
  bool identical = true;
  std::size_t runs = 0;
  for (const char* name : {"laplacian.json", "ssh.json", "gapped_q3.json"}) {
    const std::string config = std::string(SPECBAND_DATA_DIR) + "/" + name;
    std::string first;
    for (const char* threads : {"", "1", "3", ""}) {
      if (*threads) setenv("SPECBAND_THREADS", threads, 1);
      else unsetenv("SPECBAND_THREADS");
      std::ostringstream out, err;
      const int code = cli::run(std::vector<std::string>{"validate", "--config", config}, out, err);
      const std::string text = std::to_string(code) + "\n" + out.str() + err.str();
      if (runs++ % 4 == 0) first = text;
      identical = identical && text == first;
    }
  }
  unsetenv("SPECBAND_THREADS");
  report(10, "validate determinism", identical,
         std::to_string(runs) + " validate runs over 3 configs and thread counts {default,1,3}, outputs " +
             (identical ? "byte-identical" : "differ"),
         clock.seconds());
}

}  // namespace

int main() {
  std::cout << "specband acceptance suite" << std::endl;
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();

  const Clock ref_clock;
  std::vector<DecayRun> refs;
  refs.push_back(decay_run("Laplacian", fixtures::laplacian()));
  refs.push_back(decay_run("SSH", fixtures::ssh()));
  const auto q3 = fixtures::random_suite(1, 3, seed + 5).front();
  refs.push_back(decay_run("q3 " + describe(q3), q3));
  criteria_5_6(refs, ref_clock.seconds());

  const Clock suite_clock;
  std::vector<DecayRun> suite;
  for (std::size_t q : {1u, 2u, 3u, 4u})
    for (const auto& J : fixtures::random_suite(2, q, seed + 70 + q)) suite.push_back(decay_run(describe(J), J));
  criterion_7(suite, suite_clock.seconds());

  std::vector<const DecayRun*> all;
  for (const auto& r : refs) all.push_back(&r);
  for (const auto& r : suite) all.push_back(&r);
  criterion_8(all);
  criterion_9();
  criterion_10();

  std::cout << "acceptance: " << 10 - failures << "/10 criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
