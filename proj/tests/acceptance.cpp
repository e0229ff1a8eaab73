// Acceptance gate: one PASS/FAIL line per criterion, with the raw numbers.
// Usage: curveflow_acceptance [--only N] [--workers W]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "curveflow/config.hpp"
#include "curveflow/drift.hpp"
#include "curveflow/ensemble.hpp"
#include "curveflow/ergodicity.hpp"
#include "curveflow/experiments.hpp"
#include "curveflow/integrator.hpp"
#include "curveflow/io.hpp"
#include "curveflow/noise.hpp"
#include "curveflow/sampling.hpp"
#include "curveflow/statistics.hpp"

using namespace curveflow;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr double amplitudes[] = {0.01, 0.1, 1.0, 10.0, 100.0};
constexpr std::uint64_t seed = 20240601;
int workers = 0;

SpectralField probe(std::size_t n, std::size_t i, std::uint64_t lane) {
  return random_field(n, amplitudes[i % 5], seed + lane, i);
}

// Explicit Euler at n = 8, inside the stability cap 0.5 / lambda_8.
SolverConfig small_explicit(double T) {
  SolverConfig s;
  s.n = 8;
  s.dt = 5e-4;
  s.T = T;
  s.scheme = Scheme::explicit_euler;
  s.seed = seed;
  return s;
}

Verdict c01_monotonicity() {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n : {8u, 32u}) {
    const SpectralBasis basis(n);
    for (std::size_t i = 0; i < 1000; ++i) {
      worst = std::max(worst, monotonicity_gap(probe(n, i, 0), probe(n, i, 1), basis));
    }
  }
  return {worst <= 1e-10, fmt("max gap %.3e <= 1e-10 over 2000 pairs", worst)};
}

Verdict c02_dual_bound() {
  const double bound = std::sqrt(pi / 2.0) * (1.0 + 1e-8);
  double worst = 0.0;
  std::size_t above = 0;
  for (std::size_t n : {8u, 32u}) {
    const SpectralBasis basis(n);
    for (std::size_t i = 0; i < 500; ++i) {
      const double d = apply_drift(probe(n, i, 2), basis).dual_norm;
      worst = std::max(worst, d);
      above += d > bound ? 1 : 0;
    }
  }
  return {worst <= bound,
          fmt("max dual norm %.6f vs sqrt(pi/2)(1+1e-8) = %.6f; %zu of 1000 fields above "
              "(sharp bound pi/2 = %.6f)",
              worst, bound, above, pi / 2.0)};
}

Verdict c03_heat_limit() {
  const SpectralBasis basis(16);
  double err[3];
  const double amps[] = {1e-2, 5e-3, 2.5e-3};
  for (int i = 0; i < 3; ++i) {
    const auto u = SpectralField::basis(1, 16, amps[i]);
    const auto heat = u * (-eigenvalue(1));
    err[i] = norm_H(apply_drift(u, basis).galerkin_coeffs - heat) / norm_H(heat);
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  return {r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5,
          fmt("errors %.3e %.3e %.3e, ratios %.4f %.4f in [3.5, 4.5]", err[0], err[1], err[2], r1,
              r2)};
}

Verdict c04_lyapunov_pairing() {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n : {8u, 32u}) {
    const SpectralBasis basis(n);
    for (std::size_t i = 0; i < 500; ++i) {
      worst = std::max(worst, lyapunov_pairing_V(probe(n, i, 3), basis));
    }
  }
  return {worst <= 1e-10, fmt("max pairing %.3e <= 1e-10 over 1000 fields", worst)};
}

Verdict c05_hilbert_schmidt() {
  const auto family = MultiplicativeNoise::default_family(8);
  const double L2 = family.lambda_sq();
  const SpectralBasis basis(16);
  double sh = 1e300, sg = 1e300, sv = 1e300;
  for (std::size_t i = 0; i < 200; ++i) {
    const auto u = probe(16, i, 4);
    const auto v = probe(16, i, 5);
    const double h = norm_H(u), d = norm_H(u - v), vv = norm_V(u);
    sh = std::min(sh, (1.0 / 3.0 + h * h) * L2 - hs_norm_H(u, family, basis));
    sg = std::min(sg, L2 * d * d - hs_gap(u, v, family, basis));
    sv = std::min(sv, (1.0 + vv * vv) * L2 - hs_norm_V(u, family, basis));
  }
  return {sh >= -1e-10 && sg >= -1e-10 && sv >= -1e-10,
          fmt("min slacks H %.3e, gap %.3e, V %.3e (Lambda^2 = %.4f)", sh, sg, sv, L2)};
}

Verdict c06_v_bound() {
  SolverConfig s;
  s.n = 32;
  s.dt = 1e-3;
  s.T = 5.0;
  s.scheme = Scheme::semi_implicit;
  s.quad_panels = 4 * s.n;
  s.record_every = 10;
  s.seed = seed;
  const AdditiveNoise q(1.0, s.n);
  const GalerkinIntegrator integrator(s, q);
  const double c2 = measure_lyapunov_constant(q, integrator.basis());
  const auto rep = galerkin_v_bound(integrator, SpectralField::basis(1, s.n), c2, 200, workers);
  return {rep.pass, fmt("sup_t mean + hw = %.4f < bound %.4f (c2 = %.5f, 200 members)",
                        rep.sup_upper, rep.bound, c2)};
}

Verdict c07_decay() {
  SolverConfig s;
  s.n = 16;
  s.dt = 1e-4;
  s.T = 10.0;
  s.scheme = Scheme::explicit_euler;
  s.record_every = 100;
  const auto rec = deterministic_flow(SpectralField::basis(1, s.n), s);
  const auto cert = decay_certificate(rec, 1e-3);
  const double oracle = std::atan(std::sqrt(2.0) * pi) / (std::sqrt(2.0) * pi);
  const bool k_ok = std::abs(cert.k_min - oracle) <= 1e-12;
  return {cert.pass && k_ok,
          fmt("k_min %.6f (oracle %.6f), worst ratio %.6f <= 1.001, slope %.4f <= %.4f",
              cert.k_min, oracle, cert.worst_ratio, cert.slope, -2.0 * cert.k_min)};
}

Verdict c08_coupling() {
  const auto s = small_explicit(5.0);
  const GalerkinIntegrator integrator(s, AdditiveNoise(1.0, s.n));
  const auto x = SpectralField::basis(1, s.n), y = SpectralField::basis(1, s.n, -1.0);
  const double tol = 10.0 * s.dt * s.dt;
  const auto worst = ensemble::map_members<double>(100, workers, [&](std::size_t m) {
    double w = -std::numeric_limits<double>::infinity(), prev = 0.0;
    integrator.integrate_pair(x, y, integrator.stream(m),
                              [&](std::size_t step, double, const SpectralField& u,
                                  const SpectralField& v) {
                                const double d = norm_H(u - v);
                                if (step > 0) w = std::max(w, d - prev);
                                prev = d;
                              });
    return w;
  });
  const double w = *std::max_element(worst.begin(), worst.end());
  return {w <= tol, fmt("max per-step increase %.3e <= 10 dt^2 = %.3e (100 members)", w, tol)};
}

Verdict c09_e_property() {
  const auto s = small_explicit(1.0);
  const auto x = SpectralField::basis(1, s.n);
  auto y = x;
  y[1] = 0.1;
  const auto rep = e_property_gap(x, y, clipped_coordinate(1), AdditiveNoise(1.0, s.n), s, 500,
                                  workers);
  const double lim_c = rep.bound + rep.common.hw_x + rep.common.hw_y;
  const double lim_i = rep.bound + rep.independent.hw_x + rep.independent.hw_y;
  return {rep.pass, fmt("gap common %.3e <= %.3e, independent %.3e <= %.3e (|x-y| = %.3f)",
                        rep.common.gap, lim_c, rep.independent.gap, lim_i, rep.distance)};
}

Verdict c10_certificate() {
  auto s = small_explicit(20.0);
  s.record_every = 20;
  const AdditiveNoise q(1.0, s.n);
  const GalerkinIntegrator integrator(s, q);
  const auto x = SpectralField::basis(1, s.n);
  const auto k = derive_constants(q, integrator.basis(), &x);
  const auto series = collect_series(
      integrator, x, 200, [&](const SpectralField& u) { return norm_W11(u, integrator.basis()); },
      workers);
  const auto cert = lyapunov_certificate(series, 1.0, k.D.value, k.c.value);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : cert.rows) worst = std::min(worst, r.margin - r.half_width);
  return {cert.pass_confident,
          fmt("min (margin - hw) %.4f >= 0 over %zu times in [1, 20] (D = %.5f, c = %.2f)", worst,
              cert.rows.size(), k.D.value, k.c.value)};
}

Verdict c11_occupation() {
  const auto s = small_explicit(20.0);
  const double hs[] = {5.0, 10.0, 20.0};
  const auto est = ball_occupation(SpectralField::basis(1, s.n), 0.5, hs, AdditiveNoise(1.0, s.n),
                                   s, 200, workers, "e1");
  bool pass = true;
  std::string detail;
  for (const auto& e : est) {
    pass = pass && e.estimate > 0.0 && e.ci_lo > 0.0;
    detail += fmt("T=%g: %.4f [%.4f, %.4f]  ", e.T, e.estimate, e.ci_lo, e.ci_hi);
  }
  return {pass, detail + "(200 members)"};
}

constexpr std::size_t agreement_members = 32;

Verdict c12_agreement() {
  const auto s = small_explicit(160.0);
  const double hs[] = {10.0, 40.0, 160.0};
  const auto rep = ergodic_agreement(SpectralField::basis(1, s.n), SpectralField::basis(2, s.n, 2.0),
                                     clipped_norm(), hs, AdditiveNoise(1.0, s.n), s,
                                     agreement_members, workers);
  std::string detail;
  for (const auto& r : rep.rows) {
    detail += fmt("T=%g: delta %.3e (hw sum %.3e)  ", r.T, r.delta, r.hw_x + r.hw_y);
  }
  return {rep.pass, detail + fmt("monotone %s, final %s (%zu members)",
                                 rep.pass_monotone ? "yes" : "no", rep.pass_final ? "yes" : "no",
                                 agreement_members)};
}

Verdict c13_truncation() {
  const auto s = small_explicit(2.0);
  const std::size_t ks[] = {2, 4, 8};
  const auto table = truncation_study(SpectralField::basis(1, s.n),
                                      MultiplicativeNoise::default_family(8), s, ks, 100, workers);
  const double g1 = table.rows[0].gap, g2 = table.rows[1].gap;
  return {g2 < g1, fmt("gap(2,4) = %.4e, gap(4,8) = %.4e", g1, g2)};
}

Verdict c14_reproducibility() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "curveflow_acceptance_repro";
  fs::remove_all(root);
  std::vector<std::string> reports;
  bool all_pass = true;
  for (int w : {1, 2, 3}) {
    auto cfg = parse_config(R"({"solver": {"seed": 20240601}, "experiment": {"type": "verify"}})");
    cfg.output_directory = (root / ("w" + std::to_string(w))).string();
    RunOptions opts;
    opts.workers = w;
    const auto out = run_experiment(cfg, opts);
    all_pass = all_pass && out.exit_code == 0;
    reports.push_back(io::read_file(fs::path(cfg.output_directory) / "report.json"));
  }
  const bool same = reports[0] == reports[1] && reports[1] == reports[2];
  fs::remove_all(root);
  return {same, fmt("report.json identical at 1, 2, 3 workers: %s (%zu bytes); suite verdict %s",
                    same ? "yes" : "no", reports[0].size(), all_pass ? "PASS" : "FAIL")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only") only = std::atoi(argv[i + 1]);
    if (a == "--workers") workers = std::atoi(argv[i + 1]);
  }
  const std::vector<Criterion> criteria = {
      {1, "drift monotonicity", c01_monotonicity},
      {2, "drift dual-norm bound sqrt(pi/2)", c02_dual_bound},
      {3, "heat-limit order", c03_heat_limit},
      {4, "Lyapunov pairing", c04_lyapunov_pairing},
      {5, "Hilbert-Schmidt bounds", c05_hilbert_schmidt},
      {6, "Galerkin V-bound", c06_v_bound},
      {7, "deterministic decay", c07_decay},
      {8, "pathwise coupling non-expansiveness", c08_coupling},
      {9, "e-property", c09_e_property},
      {10, "Lyapunov time-average certificate", c10_certificate},
      {11, "ball occupation positivity", c11_occupation},
      {12, "ergodic agreement", c12_agreement},
      {13, "truncated-noise convergence", c13_truncation},
      {14, "reproducibility", c14_reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
