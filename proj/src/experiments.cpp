#include "curveflow/experiments.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "curveflow/drift.hpp"
#include "curveflow/ensemble.hpp"
#include "curveflow/io.hpp"
#include "curveflow/sampling.hpp"
#include "curveflow/statistics.hpp"

#ifndef CURVEFLOW_VERSION
#define CURVEFLOW_VERSION "0.0.0"
#endif

namespace curveflow {

namespace {

namespace fs = std::filesystem;

constexpr double probe_amplitudes[] = {0.01, 0.1, 1.0, 10.0, 100.0};

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opts;
  SpectralBasis basis;
  std::size_t samples;
  std::size_t ensemble;
};

SpectralField probe(const Context& c, std::uint64_t index, std::uint64_t lane = 0) {
  const double amp = probe_amplitudes[index % std::size(probe_amplitudes)];
  return random_field(c.basis.dim(), amp, c.cfg.solver.seed + lane, index);
}

AdditiveNoise additive_for(const ExperimentConfig& cfg) {
  const auto model = cfg.noise_model();
  if (const auto* a = std::get_if<AdditiveNoise>(&model)) return *a;
  return AdditiveNoise(1.0, cfg.solver.n);
}

SpectralField start_field(const ExperimentConfig& cfg) { return cfg.initial.field(cfg.solver.n); }

SolverConfig with_horizon(SolverConfig s, double T) {
  s.T = T;
  s.record_every = 1;
  return s;
}

CheckResult check_parseval(const Context& c) {
  double worst = 0.0;
  std::vector<double> val(c.basis.nodes());
  for (std::size_t i = 0; i < c.samples; ++i) {
    const auto u = probe(c, i);
    c.basis.values_at_nodes(u.values(), val);
    for (double& v : val) v *= v;
    const double quad = c.basis.integrate(val);
    const double h = norm_H(u);
    worst = std::max(worst, std::abs(quad - h * h) / std::max(h * h, 1e-300));
  }
  const double tol = 1e-12;
  return {"spectral.parseval", "int u^2 dx = sum_k c_k^2 (quadrature vs coefficients)",
          worst <= tol,
          {{"max_relative_error", worst}, {"tolerance", tol}, {"samples", c.samples}}};
}

CheckResult check_norm_ordering(const Context& c) {
  double worst = 0.0;
  for (std::size_t i = 0; i < c.samples; ++i) {
    const auto u = probe(c, i);
    const double h = norm_H(u);
    const double v = norm_V(u);
    const double s = norm_Vstar(u);
    worst = std::max({worst, pi * s / h - 1.0, pi * h / v - 1.0});
  }
  const double tol = 1e-12;
  return {"spectral.norm_ordering", "pi ||u||_{V*} <= ||u||_H <= ||u||_V / pi",
          worst <= tol,
          {{"max_excess", worst}, {"tolerance", tol}, {"samples", c.samples}}};
}

CheckResult check_projection(const Context& c) {
  const auto u = project([](double x) { return x * (1.0 - x); }, c.basis);
  double worst = 0.0;
  for (std::size_t k = 1; k <= u.dim(); ++k) {
    const double kp = static_cast<double>(k) * pi;
    const double exact = (k % 2 == 1) ? 4.0 * std::sqrt(2.0) / (kp * kp * kp) : 0.0;
    worst = std::max(worst, std::abs(u[k - 1] - exact));
  }
  const double tol = 1e-12;
  return {"spectral.projection", "P_n[x(1-x)] has c_k = 4 sqrt(2) / (k pi)^3 for odd k, 0 for even k",
          worst <= tol, {{"max_abs_error", worst}, {"tolerance", tol}, {"n", u.dim()}}};
}

CheckResult check_monotonicity(const Context& c) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.samples; ++i) {
    worst = std::max(worst, monotonicity_gap(probe(c, i), probe(c, i, 1), c.basis));
  }
  const double tol = 1e-10;
  return {"drift.monotonicity", "<Au - Av, u - v>_H <= 0", worst <= tol,
          {{"max_gap", worst}, {"tolerance", tol}, {"pairs", c.samples}}};
}

CheckResult check_boundedness(const Context& c) {
  const double sharp = pi / 2.0;
  const double stated = std::sqrt(pi / 2.0);
  double worst = 0.0;
  std::size_t above_stated = 0;
  for (std::size_t i = 0; i < c.samples; ++i) {
    const double d = apply_drift(probe(c, i), c.basis).dual_norm;
    worst = std::max(worst, d);
    above_stated += d > stated * (1.0 + 1e-8) ? 1 : 0;
  }
  return {"drift.boundedness",
          "||Au||_{V*} <= ||arctan(u')||_{L^2} <= pi/2 (the stated sqrt(pi/2) is tracked separately)",
          worst <= sharp * (1.0 + 1e-8),
          {{"max_dual_norm", worst},
           {"bound", sharp},
           {"stated_bound", stated},
           {"fields_above_stated_bound", above_stated},
           {"samples", c.samples}}};
}

// Relative error of A(a e1) against the heat drift -lambda_1 a e1.
double heat_error(double a, const SpectralBasis& basis) {
  const auto u = SpectralField::basis(1, basis.dim(), a);
  const auto b = apply_drift(u, basis).galerkin_coeffs;
  const auto heat = u * (-eigenvalue(1));
  return norm_H(b - heat) / norm_H(heat);
}

CheckResult check_heat_limit(const Context& c) {
  const double amps[] = {1e-2, 5e-3, 2.5e-3};
  nlohmann::json errors = nlohmann::json::array(), ratios = nlohmann::json::array();
  bool pass = true;
  double prev = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double e = heat_error(amps[i], c.basis);
    errors.push_back(e);
    if (i > 0) {
      const double r = prev / e;
      ratios.push_back(r);
      pass = pass && r >= 3.5 && r <= 4.5;
    }
    prev = e;
  }
  return {"drift.heat_limit",
          "|A(a e1) + lambda_1 a e1| / |lambda_1 a e1| = O(a^2): ratio per halving in [3.5, 4.5]",
          pass, {{"amplitudes", amps}, {"relative_errors", errors}, {"ratios", ratios}}};
}

CheckResult check_lyapunov(const Context& c) {
  double worst = -std::numeric_limits<double>::infinity();
  double disagreement = 0.0;
  for (std::size_t i = 0; i < c.samples; ++i) {
    const auto u = probe(c, i);
    const double p = lyapunov_pairing_V(u, c.basis);
    const double q = lyapunov_pairing_coefficients(u, c.basis);
    worst = std::max(worst, p);
    // The two forms agree up to quadrature error, which is small only while
    // the nodes resolve arctan(u').
    if (probe_amplitudes[i % std::size(probe_amplitudes)] <= 0.1) {
      disagreement = std::max(disagreement, std::abs(p - q) / std::max(1.0, std::abs(p)));
    }
  }
  const double tol = 1e-10;
  return {"drift.lyapunov", "<Au, u>_V = -int (u'')^2 / (1 + (u')^2) dx <= 0", worst <= tol,
          {{"max_pairing", worst},
           {"tolerance", tol},
           {"coefficient_form_max_relative_difference_small_fields", disagreement},
           {"samples", c.samples}}};
}

CheckResult check_hilbert_schmidt(const Context& c) {
  const auto family = MultiplicativeNoise::default_family(8);
  const double L2 = family.lambda_sq();
  const double tol = 1e-10;
  double slack_h = std::numeric_limits<double>::infinity();
  double slack_gap = slack_h, slack_v = slack_h;
  for (std::size_t i = 0; i < c.samples; ++i) {
    const auto u = probe(c, i);
    const auto v = probe(c, i, 1);
    const double h = norm_H(u);
    const double d = norm_H(u - v);
    const double vv = norm_V(u);
    slack_h = std::min(slack_h, (1.0 / 3.0 + h * h) * L2 - hs_norm_H(u, family, c.basis));
    slack_gap = std::min(slack_gap, L2 * d * d - hs_gap(u, v, family, c.basis));
    slack_v = std::min(slack_v, (1.0 + vv * vv) * L2 - hs_norm_V(u, family, c.basis));
  }
  const auto q = additive_for(c.cfg);
  const bool traces_ok = q.trace_H() <= q.trace_H_full() && q.trace_V() <= q.trace_V_full() &&
                         std::isfinite(q.trace_V_full());
  return {"noise.hilbert_schmidt",
          "||B(u)||^2_HS(U,H) <= (1/3 + ||u||^2) Lambda^2; ||B(u) - B(v)||^2 <= Lambda^2 ||u - v||^2; "
          "||B(u)||^2_HS(U,V) <= (1 + ||u||_V^2) Lambda^2; ||Q||_HS(U,V) finite",
          slack_h >= -tol && slack_gap >= -tol && slack_v >= -tol && traces_ok,
          {{"Lambda_sq", L2},
           {"min_slack_H", slack_h},
           {"min_slack_gap", slack_gap},
           {"min_slack_V", slack_v},
           {"tolerance", tol},
           {"additive_trace_H", q.trace_H()},
           {"additive_trace_H_full", q.trace_H_full()},
           {"additive_trace_V", q.trace_V()},
           {"additive_trace_V_full", q.trace_V_full()},
           {"pairs", c.samples}}};
}

CheckResult check_determinism(const Context& c) {
  const auto s = with_horizon(c.cfg.solver, c.cfg.param<double>("coupling_T"));
  const GalerkinIntegrator integrator(s, c.cfg.noise_model());
  const auto x = start_field(c.cfg);
  const auto a = integrator.simulate(x, 0);
  const auto b = integrator.simulate(x, 0);
  const bool repeat = a.states == b.states;
  const auto f = [](const SpectralField& u) { return norm_H(u); };
  const std::size_t members = std::min<std::size_t>(c.ensemble, 8);
  const auto one = collect_series(integrator, x, members, f, 1);
  const auto many = collect_series(integrator, x, members, f, 4);
  const bool workers = one.members == many.members;
  return {"integrator.determinism",
          "same (config, seed) gives bit-identical trajectories at any worker count",
          repeat && workers,
          {{"repeat_identical", repeat},
           {"worker_counts_identical", workers},
           {"members", members},
           {"steps", s.steps()}}};
}

CheckResult check_coupling(const Context& c) {
  const auto s = with_horizon(c.cfg.solver, c.cfg.param<double>("coupling_T"));
  const GalerkinIntegrator integrator(s, additive_for(c.cfg));
  const auto x = SpectralField::basis(1, s.n);
  const auto y = SpectralField::basis(1, s.n, -1.0);
  const double tol = 10.0 * s.dt * s.dt;
  struct Member {
    double max_increase = -std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
  };
  const auto members = ensemble::map_members<Member>(c.ensemble, c.opts.workers, [&](std::size_t m) {
    Member out;
    double prev = 0.0;
    integrator.integrate_pair(x, y, integrator.stream(m),
                              [&](std::size_t step, double, const SpectralField& u,
                                  const SpectralField& v) {
                                const double d = norm_H(u - v);
                                if (step > 0) {
                                  out.max_increase = std::max(out.max_increase, d - prev);
                                  out.violations += d > prev + tol ? 1 : 0;
                                }
                                prev = d;
                              });
    return out;
  });
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t violations = 0;
  for (const auto& m : members) {
    worst = std::max(worst, m.max_increase);
    violations += m.violations;
  }
  return {"integrator.coupling",
          "additive noise, common streams: ||x_m - y_m||_H <= ||x_{m-1} - y_{m-1}||_H + 10 dt^2",
          violations == 0,
          {{"max_step_increase", worst},
           {"tolerance", tol},
           {"violations", violations},
           {"members", c.ensemble},
           {"T", s.T}}};
}

CheckResult check_decay(const Context& c) {
  auto s = c.cfg.solver;
  s.T = c.cfg.param<double>("decay_T");
  s.record_every = record_stride(s.T, s.dt);
  auto x = start_field(c.cfg);
  if (norm_H(x) == 0.0) x = SpectralField::basis(1, s.n);
  const auto cert = decay_certificate(deterministic_flow(x, s));
  return {"decay.deterministic",
          "||v(t)||^2 <= e^{-2 k_min t} ||v0||^2 with k_min = arctan(M)/M, M = sup|v0'|",
          cert.pass, to_json(cert)};
}

CheckResult check_certificate(const Context& c, const TheoreticalConstants& k) {
  auto s = c.cfg.solver;
  s.T = c.cfg.param<double>("certificate_T");
  s.record_every = record_stride(s.T, s.dt);
  const GalerkinIntegrator integrator(s, additive_for(c.cfg));
  const auto x = start_field(c.cfg);
  const auto series = collect_series(
      integrator, x, c.ensemble,
      [&](const SpectralField& u) { return norm_W11(u, integrator.basis()); }, c.opts.workers);
  const double xn = norm_H(x);
  const auto cert = lyapunov_certificate(series, xn * xn, k.D.value, k.c.value);
  auto values = to_json(cert);
  values.erase("rows");
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : cert.rows) min_margin = std::min(min_margin, r.margin - r.half_width);
  values["min_margin_minus_half_width"] = min_margin;
  values["T"] = s.T;
  return {"ergodic.lyapunov_certificate",
          "E[(1/t) int_0^t ||u||_{W^{1,1}} ds] <= (||x||^2 + D t) / (c t) for t >= 1",
          cert.pass, values};
}

CheckResult check_e_property(const Context& c) {
  auto s = c.cfg.solver;
  s.T = c.cfg.param<double>("eprop_T");
  const auto x = start_field(c.cfg);
  auto y = x;
  if (s.n >= 2) {
    y[1] += 0.1;
  } else {
    y[0] += 0.1;
  }
  const auto rep = e_property_gap(x, y, clipped_coordinate(1), additive_for(c.cfg), s, c.ensemble,
                                  c.opts.workers);
  return {"ergodic.e_property", "|E phi(u^x_T) - E phi(u^y_T)| <= Lip(phi) ||x - y||_H",
          rep.pass, to_json(rep)};
}

CheckResult check_agreement(const Context& c) {
  const auto hs = c.cfg.parameters.at("agreement_horizons").get<std::vector<double>>();
  const auto x = start_field(c.cfg);
  const auto y = c.cfg.solver.n >= 2 ? SpectralField::basis(2, c.cfg.solver.n, 2.0)
                                      : SpectralField::basis(1, c.cfg.solver.n, 2.0);
  const auto rep = ergodic_agreement(x, y, clipped_norm(), hs, additive_for(c.cfg), c.cfg.solver,
                                     c.ensemble, c.opts.workers);
  return {"ergodic.agreement",
          "Delta(T) = |Q^T phi(x) - Q^T phi(y)| non-increasing within 2 half-widths, "
          "Delta(T_max) <= 3 half-widths",
          rep.pass, to_json(rep)};
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(const ExperimentConfig& cfg) : root_(cfg.output_directory) {}

  void write(const std::string& relative, std::string_view content) {
    io::write_file_atomic(root_ / relative, content);
    written_.push_back(relative);
  }
  void write_json(const std::string& relative, const nlohmann::json& j) {
    write(relative, j.dump(2) + "\n");
  }
  void write_trajectory(const ExperimentConfig& cfg, const std::string& name,
                        const Trajectory& traj) {
    if (cfg.wants("csv")) write("trajectories/" + name + ".csv", io::trajectory_csv(traj));
    if (cfg.wants("bin")) write("states/" + name + ".bin", io::encode_state_dump(io::dump_of(traj)));
    if (cfg.wants("json")) write_json("states/" + name + ".json", io::state_snapshots(traj));
  }
  void write_table(const std::string& name, std::span<const CsvRow> rows) {
    write("tables/" + name + ".csv", to_csv(rows));
  }
  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path root_;
  std::vector<std::string> written_;
};

// Hash of the scientific content; the output location is excluded so that
// reruns into different directories hash alike.
std::string config_hash(const ExperimentConfig& cfg) {
  auto j = emit_config(cfg);
  j["output"].erase("directory");
  return content_hash(j);
}

nlohmann::json base_report(const ExperimentConfig& cfg) {
  return {{"experiment", cfg.type},
          {"config_hash", config_hash(cfg)},
          {"seed", cfg.solver.seed}};
}

RunOutcome run_simulate(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactWriter& out) {
  const GalerkinIntegrator integrator(cfg.solver, cfg.noise_model());
  const auto x = start_field(cfg);
  const auto members = cfg.param<std::size_t>("ensemble");
  const auto trajs = ensemble::map_members<Trajectory>(
      members, opts.workers, [&](std::size_t m) { return integrator.simulate(x, m); });
  RunOutcome r;
  r.report = base_report(cfg);
  r.report["noise_id"] = integrator.noise_id();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t m = 0; m < members; ++m) {
    const auto& t = trajs[m];
    const auto& f = t.functionals.back();
    const std::string name = "member_" + std::to_string(m);
    out.write_trajectory(cfg, name, t);
    rows.push_back({{"member", m},
                    {"records", t.times.size()},
                    {"final_time", t.times.back()},
                    {"final_norm_H", f.norm_H},
                    {"final_norm_V", f.norm_V},
                    {"final_norm_W11", f.norm_W11}});
  }
  r.report["members"] = rows;
  r.report["pass"] = true;
  r.summary = "simulated " + std::to_string(members) + " trajectories";
  return r;
}

RunOutcome run_decay(const ExperimentConfig& cfg, ArtifactWriter& out) {
  const auto rec = deterministic_flow(start_field(cfg), cfg.solver);
  const auto cert = decay_certificate(rec, cfg.param<double>("tolerance"));
  out.write_trajectory(cfg, "decay", rec.trajectory);
  RunOutcome r;
  r.report = base_report(cfg);
  r.report["certificate"] = to_json(cert);
  r.report["pass"] = cert.pass;
  r.exit_code = cert.pass ? 0 : 1;
  r.summary = std::string("decay certificate ") + (cert.pass ? "PASS" : "FAIL");
  return r;
}

RunOutcome run_ergodic(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactWriter& out) {
  const auto model = cfg.noise_model();
  const auto* add = std::get_if<AdditiveNoise>(&model);
  if (!add) throw ConfigError("/noise/type", "ergodic experiments need additive noise");
  const auto x = start_field(cfg);
  const auto y = initial_from_json(cfg.parameters.at("compare_with"),
                                   "/experiment/parameters/compare_with")
                     .field(cfg.solver.n);
  const auto hs = cfg.parameters.at("horizons").get<std::vector<double>>();
  const auto members = cfg.param<std::size_t>("ensemble");
  const auto phi = observable_from_name(cfg.param<std::string>("observable"),
                                        "/experiment/parameters/observable");
  const SpectralBasis basis(cfg.solver.n, cfg.solver.rule());
  const auto k = derive_constants(model, basis, &x);

  const auto occupation = ball_occupation(x, cfg.param<double>("delta"), hs, model, cfg.solver,
                                          std::max<std::size_t>(members, 2), opts.workers,
                                          cfg.initial.id());
  std::vector<CsvRow> occ_rows;
  nlohmann::json occ = nlohmann::json::array();
  bool occ_pass = true;
  for (const auto& e : occupation) {
    occ.push_back(to_json(e));
    occ_rows.push_back({e.T, e.estimate, e.ci_lo, e.ci_hi, 0.0});
    occ_pass = occ_pass && e.ci_lo > 0.0;
  }
  out.write_table("occupation", occ_rows);

  auto s = cfg.solver;
  s.T = *std::max_element(hs.begin(), hs.end());
  s.record_every = record_stride(s.T, s.dt);
  const GalerkinIntegrator integrator(s, model);
  const auto series = collect_series(
      integrator, x, members, [&](const SpectralField& u) { return norm_W11(u, basis); },
      opts.workers);
  const double xn = norm_H(x);
  const auto cert = lyapunov_certificate(series, xn * xn, k.D.value, k.c.value);
  out.write_table("lyapunov", csv_rows(cert));

  const auto agree = ergodic_agreement(x, y, phi, hs, model, cfg.solver,
                                       std::max<std::size_t>(members, 2), opts.workers);
  out.write_table("agreement", csv_rows(agree));

  const auto dom = noise_dominance_check(x, *add, cfg.solver, members, opts.workers);

  const GalerkinIntegrator vint(cfg.solver, model);
  const auto vb = galerkin_v_bound(vint, x, k.c2.value, std::max<std::size_t>(members, 2),
                                   opts.workers);
  out.write_table("vbound", csv_rows(vb));

  RunOutcome r;
  r.report = base_report(cfg);
  r.report["constants"] = to_json(k);
  r.report["occupation"] = {{"estimates", occ}, {"pass", occ_pass}};
  r.report["lyapunov_certificate"] = to_json(cert);
  r.report["agreement"] = to_json(agree);
  auto dom_json = to_json(dom);
  dom_json.erase("members");
  r.report["noise_dominance"] = dom_json;
  r.report["v_bound"] = to_json(vb);
  const bool pass = occ_pass && cert.pass && agree.pass && dom.pass && vb.pass;
  r.report["pass"] = pass;
  r.exit_code = pass ? 0 : 1;
  r.summary = std::string("ergodic study ") + (pass ? "PASS" : "FAIL");
  return r;
}

RunOutcome run_coupling(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactWriter& out) {
  const auto model = cfg.noise_model();
  const GalerkinIntegrator integrator(cfg.solver, model);
  const auto x = start_field(cfg);
  const auto y =
      initial_from_json(cfg.parameters.at("other"), "/experiment/parameters/other").field(cfg.solver.n);
  const auto members = std::max<std::size_t>(cfg.param<std::size_t>("ensemble"), 2);
  const double d0 = norm_H(x - y);
  const auto* mult = std::get_if<MultiplicativeNoise>(&model);
  const double tol = 10.0 * cfg.solver.dt * cfg.solver.dt;

  // Per member: squared distance at each step, and step-wise increases.
  struct Member {
    std::vector<double> dist_sq;
    double max_increase = -std::numeric_limits<double>::infinity();
  };
  const auto runs = ensemble::map_members<Member>(members, opts.workers, [&](std::size_t m) {
    Member out_m;
    double prev = 0.0;
    integrator.integrate_pair(x, y, integrator.stream(m),
                              [&](std::size_t step, double, const SpectralField& u,
                                  const SpectralField& v) {
                                const double d = norm_H(u - v);
                                if (step > 0) out_m.max_increase = std::max(out_m.max_increase, d - prev);
                                prev = d;
                                out_m.dist_sq.push_back(d * d);
                              });
    return out_m;
  });
  const auto pair = integrator.simulate_coupled(x, y, 0);
  out.write_trajectory(cfg, "coupled_x", pair.first);
  out.write_trajectory(cfg, "coupled_y", pair.second);

  RunOutcome r;
  r.report = base_report(cfg);
  bool pass = true;
  if (mult) {
    // E||x_t - y_t||^2 <= e^{Lambda^2 t} ||x - y||^2 within MC error.
    const std::size_t steps = runs[0].dist_sq.size();
    std::vector<double> samples(members);
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < steps; ++i) {
      for (std::size_t m = 0; m < members; ++m) samples[m] = runs[m].dist_sq[i];
      const auto sm = summarize(samples);
      const double t = static_cast<double>(i) * cfg.solver.dt;
      const double bound = std::exp(mult->lambda_sq() * t) * d0 * d0;
      worst = std::max(worst, sm.mean - sm.half_width - bound);
      if (i % cfg.solver.record_every == 0 || i + 1 == steps) {
        rows.push_back({t, sm.mean, sm.mean - sm.half_width, sm.mean + sm.half_width, bound});
      }
    }
    out.write_table("mean_square_distance", rows);
    pass = worst <= 0.0;
    r.report["mean_square_contraction"] = {{"max_excess", worst}, {"pass", pass}};
  } else {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& m : runs) worst = std::max(worst, m.max_increase);
    pass = worst <= tol;
    r.report["pathwise_contraction"] = {
        {"max_step_increase", worst}, {"tolerance", tol}, {"pass", pass}};
  }
  const auto phi = observable_from_name(cfg.param<std::string>("observable"),
                                        "/experiment/parameters/observable");
  const auto ep = e_property_gap(x, y, phi, model, cfg.solver, members, opts.workers);
  r.report["e_property"] = to_json(ep);
  r.report["distance"] = d0;
  pass = pass && ep.pass;
  r.report["pass"] = pass;
  r.exit_code = pass ? 0 : 1;
  r.summary = std::string("coupling study ") + (pass ? "PASS" : "FAIL");
  return r;
}

RunOutcome run_truncation(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactWriter& out) {
  const auto model = cfg.noise_model();
  const auto& mult = std::get<MultiplicativeNoise>(model);
  const auto levels = cfg.parameters.at("levels").get<std::vector<std::size_t>>();
  const auto table = truncation_study(start_field(cfg), mult, cfg.solver, levels,
                                      std::max<std::size_t>(cfg.param<std::size_t>("ensemble"), 2),
                                      opts.workers);
  bool pass = true;
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (i > 0 && !(row.gap < table.rows[i - 1].gap)) pass = false;
    rows.push_back({static_cast<double>(row.k_coarse), row.gap, row.gap - row.half_width,
                    row.gap + row.half_width, row.tail_lambda_sq});
  }
  out.write_table("truncation", rows);
  RunOutcome r;
  r.report = base_report(cfg);
  r.report["table"] = to_json(table);
  r.report["pass"] = pass;
  r.exit_code = pass ? 0 : 1;
  r.summary = std::string("truncation study ") + (pass ? "PASS" : "FAIL");
  return r;
}

}  // namespace

nlohmann::json to_json(const CheckResult& c) {
  return {{"id", c.id}, {"inequality", c.inequality}, {"pass", c.pass}, {"values", c.values}};
}

const std::vector<std::string>& verify_check_ids() {
  static const std::vector<std::string> ids = {
      "spectral.parseval",       "spectral.norm_ordering",  "spectral.projection",
      "drift.monotonicity",      "drift.boundedness",       "drift.heat_limit",
      "drift.lyapunov",          "noise.hilbert_schmidt",   "integrator.determinism",
      "integrator.coupling",     "decay.deterministic",     "ergodic.lyapunov_certificate",
      "ergodic.e_property",      "ergodic.agreement"};
  return ids;
}

nlohmann::json to_json(const VerifyReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"checks", checks}, {"constants", r.constants}, {"pass", r.pass}};
}

VerifyReport verify_suite(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto& ids = verify_check_ids();
  if (opts.only && std::find(ids.begin(), ids.end(), *opts.only) == ids.end()) {
    throw ConfigError("--only", "unknown check \"" + *opts.only + "\"");
  }
  Context c{cfg, opts, SpectralBasis(cfg.solver.n, cfg.solver.rule()),
            cfg.param<std::size_t>("samples"),
            std::max<std::size_t>(cfg.param<std::size_t>("ensemble"), 2)};
  const auto x = start_field(cfg);
  const auto k = derive_constants(additive_for(cfg), c.basis, &x);

  const std::map<std::string, std::function<CheckResult()>> runners = {
      {"spectral.parseval", [&] { return check_parseval(c); }},
      {"spectral.norm_ordering", [&] { return check_norm_ordering(c); }},
      {"spectral.projection", [&] { return check_projection(c); }},
      {"drift.monotonicity", [&] { return check_monotonicity(c); }},
      {"drift.boundedness", [&] { return check_boundedness(c); }},
      {"drift.heat_limit", [&] { return check_heat_limit(c); }},
      {"drift.lyapunov", [&] { return check_lyapunov(c); }},
      {"noise.hilbert_schmidt", [&] { return check_hilbert_schmidt(c); }},
      {"integrator.determinism", [&] { return check_determinism(c); }},
      {"integrator.coupling", [&] { return check_coupling(c); }},
      {"decay.deterministic", [&] { return check_decay(c); }},
      {"ergodic.lyapunov_certificate", [&] { return check_certificate(c, k); }},
      {"ergodic.e_property", [&] { return check_e_property(c); }},
      {"ergodic.agreement", [&] { return check_agreement(c); }},
  };
  VerifyReport rep;
  rep.constants = to_json(k);
  rep.pass = true;
  for (const auto& id : ids) {
    if (opts.only && *opts.only != id) continue;
    rep.checks.push_back(runners.at(id)());
    rep.pass = rep.pass && rep.checks.back().pass;
  }
  return rep;
}

nlohmann::json version_info() {
  std::ostringstream eigen, boost;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  boost << BOOST_VERSION / 100000 << '.' << BOOST_VERSION / 100 % 1000 << '.' << BOOST_VERSION % 100;
  return {{"curveflow", CURVEFLOW_VERSION},
          {"compiler", __VERSION__},
          {"cxx_standard", __cplusplus},
          {"openmp", _OPENMP},
          {"eigen", eigen.str()},
          {"boost", boost.str()},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ArtifactWriter out(cfg);
  RunOutcome r;
  if (cfg.type == "simulate") {
    r = run_simulate(cfg, opts, out);
  } else if (cfg.type == "decay") {
    r = run_decay(cfg, out);
  } else if (cfg.type == "ergodic") {
    r = run_ergodic(cfg, opts, out);
  } else if (cfg.type == "coupling") {
    r = run_coupling(cfg, opts, out);
  } else if (cfg.type == "truncation") {
    r = run_truncation(cfg, opts, out);
  } else {
    const auto rep = verify_suite(cfg, opts);
    r.report = base_report(cfg);
    r.report.update(to_json(rep));
    if (opts.only) r.report["only"] = *opts.only;
    r.exit_code = rep.pass ? 0 : 1;
    std::size_t passed = 0;
    for (const auto& c : rep.checks) passed += c.pass ? 1 : 0;
    r.summary = std::to_string(passed) + "/" + std::to_string(rep.checks.size()) + " checks PASS";
  }
  out.write_json("report.json", r.report);

  nlohmann::json constants;
  if (r.report.contains("constants")) {
    constants = r.report["constants"];
  } else {
    const auto model = cfg.noise_model();
    const auto x = start_field(cfg);
    constants = to_json(derive_constants(model, SpectralBasis(cfg.solver.n, cfg.solver.rule()), &x));
  }
  const nlohmann::json manifest = {{"experiment", cfg.type},
                                   {"config", emit_config(cfg)},
                                   {"config_hash", config_hash(cfg)},
                                   {"seed", cfg.solver.seed},
                                   {"seed_generated", cfg.seed_generated},
                                   {"workers", ensemble::resolve_workers(opts.workers)},
                                   {"constants", constants},
                                   {"versions", version_info()},
                                   {"timestamp", iso_timestamp()},
                                   {"artifacts", out.written()},
                                   {"exit_code", r.exit_code}};
  out.write_json("manifest.json", manifest);
  r.artifacts = out.written();
  r.artifacts.push_back("manifest.json");
  return r;
}

}  // namespace curveflow
