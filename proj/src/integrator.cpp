#include "curveflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "curveflow/drift.hpp"
#include "curveflow/ensemble.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/statistics.hpp"

namespace curveflow {

namespace {

std::size_t unsigned_field(const nlohmann::json& j, const std::string& key, std::size_t fallback,
                           const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned()) {
    throw ConfigError(path + "/" + key, "expected a non-negative integer");
  }
  return j.at(key).get<std::size_t>();
}

double real_field(const nlohmann::json& j, const std::string& key, double fallback,
                  const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(path + "/" + key, "expected a number");
  return j.at(key).get<double>();
}

double implicit_residual(const SpectralField& u, const SpectralField& w, const SpectralField& b,
                         double dt) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < u.dim(); ++k) {
    const double r = w[k] - u[k] - dt * b[k];
    r2 += r * r;
  }
  return std::sqrt(r2);
}

struct NewtonResult {
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;
};

NewtonResult newton_solve(const SpectralField& u, SpectralField& w, double dt, double tol,
                          const SpectralBasis& basis) {
  constexpr std::size_t max_newton = 30;
  const std::size_t n = basis.dim();
  const std::size_t m = basis.nodes();
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> table(basis.deriv_table().data(), static_cast<long>(m),
                                         static_cast<long>(n));
  const Eigen::Map<const Eigen::VectorXd> weights(basis.rule().weights.data(),
                                                  static_cast<long>(m));
  NewtonResult result;
  SpectralField b(n);
  std::vector<double> d(m);
  for (std::size_t it = 0; it < max_newton; ++it) {
    drift_coefficients(w.values(), basis, b.values());
    result.residual = implicit_residual(u, w, b, dt);
    result.iterations = it;
    if (result.residual <= tol) {
      result.converged = true;
      return result;
    }
    basis.derivs_at_nodes(w.values(), d);
    Eigen::VectorXd s(static_cast<long>(m));
    for (std::size_t j = 0; j < m; ++j) s[static_cast<long>(j)] = 1.0 / (1.0 + d[j] * d[j]);
    s = s.cwiseProduct(weights);
    Eigen::MatrixXd jac = dt * (table.transpose() * s.asDiagonal() * table);
    jac.diagonal().array() += 1.0;
    Eigen::VectorXd rhs(static_cast<long>(n));
    for (std::size_t k = 0; k < n; ++k) rhs[static_cast<long>(k)] = -(w[k] - u[k] - dt * b[k]);
    const Eigen::VectorXd delta = jac.llt().solve(rhs);

    // Backtrack on the residual norm; the Newton direction always descends it.
    double step = 1.0;
    SpectralField trial = w;
    SpectralField bt(n);
    for (int ls = 0; ls < 30; ++ls) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = w[k] + step * delta[static_cast<long>(k)];
      drift_coefficients(trial.values(), basis, bt.values());
      if (implicit_residual(u, trial, bt, dt) < result.residual) break;
      step *= 0.5;
    }
    w = trial;
  }
  drift_coefficients(w.values(), basis, b.values());
  result.residual = implicit_residual(u, w, b, dt);
  result.iterations = max_newton;
  result.converged = result.residual <= tol;
  return result;
}

}  // namespace

std::string to_string(Scheme s) {
  return s == Scheme::explicit_euler ? "explicit" : "semi_implicit";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "explicit") return Scheme::explicit_euler;
  if (s == "semi_implicit") return Scheme::semi_implicit;
  throw std::invalid_argument("unknown scheme \"" + s + "\" (expected explicit or semi_implicit)");
}

double SolverConfig::dt_max() const { return 0.5 / eigenvalue(n); }

std::size_t SolverConfig::steps() const {
  return static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
}

QuadratureRule SolverConfig::rule() const {
  return quad_panels == 0 ? QuadratureRule::for_dimension(n)
                          : QuadratureRule::composite_gauss_legendre(quad_panels);
}

void SolverConfig::validate() const {
  const std::string p = "/solver";
  if (n == 0) throw ConfigError(p + "/n", "Galerkin dimension must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError(p + "/dt", "time step must be > 0");
  if (!(T >= dt * (1.0 - 1e-12)) || !std::isfinite(T)) {
    throw ConfigError(p + "/T", "horizon must satisfy T >= dt");
  }
  if (record_every == 0) throw ConfigError(p + "/record_every", "must be >= 1");
  if (scheme == Scheme::explicit_euler && dt > dt_max()) {
    std::ostringstream msg;
    msg << "explicit scheme requires dt <= 0.5/lambda_n = " << dt_max() << " for n = " << n
        << " (got " << dt << "); use semi_implicit or reduce dt";
    throw ConfigError(p + "/dt", msg.str());
  }
  if (max_iter == 0) throw ConfigError(p + "/max_iter", "must be >= 1");
  if (!(tol > 0.0)) throw ConfigError(p + "/tol", "must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError(p + "/damping", "must lie in (0,1]");
}

nlohmann::json to_json(const SolverConfig& cfg) {
  return {{"n", cfg.n},
          {"dt", cfg.dt},
          {"T", cfg.T},
          {"scheme", to_string(cfg.scheme)},
          {"quad_panels", cfg.quad_panels},
          {"seed", cfg.seed},
          {"record_every", cfg.record_every},
          {"max_iter", cfg.max_iter},
          {"tol", cfg.tol},
          {"damping", cfg.damping}};
}

SolverConfig solver_from_json(const nlohmann::json& j) {
  const std::string p = "/solver";
  if (!j.is_object()) throw ConfigError(p, "expected an object");
  static const std::set<std::string> known = {"n",    "dt",           "T",        "scheme",
                                              "quad_panels", "seed", "record_every",
                                              "max_iter", "tol",  "damping"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw ConfigError(p + "/" + it.key(), "unknown field");
  }
  SolverConfig cfg;
  cfg.n = unsigned_field(j, "n", cfg.n, p);
  cfg.dt = real_field(j, "dt", cfg.dt, p);
  cfg.T = real_field(j, "T", cfg.T, p);
  if (j.contains("scheme")) {
    if (!j.at("scheme").is_string()) throw ConfigError(p + "/scheme", "expected a string");
    try {
      cfg.scheme = scheme_from_string(j.at("scheme").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(p + "/scheme", e.what());
    }
  }
  cfg.quad_panels = unsigned_field(j, "quad_panels", cfg.quad_panels, p);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      throw ConfigError(p + "/seed", "expected a non-negative 64-bit integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.record_every = unsigned_field(j, "record_every", cfg.record_every, p);
  cfg.max_iter = unsigned_field(j, "max_iter", cfg.max_iter, p);
  cfg.tol = real_field(j, "tol", cfg.tol, p);
  cfg.damping = real_field(j, "damping", cfg.damping, p);
  cfg.validate();
  return cfg;
}

FunctionalRecord functionals_of(const SpectralField& u, const SpectralBasis& basis) {
  return {norm_H(u), norm_V(u), norm_Vstar(u), norm_W11(u, basis)};
}

GalerkinIntegrator::GalerkinIntegrator(SolverConfig cfg, NoiseModel noise)
    : cfg_(cfg), noise_(std::move(noise)), basis_((cfg.validate(), cfg.n), cfg.rule()) {
  if (auto* a = std::get_if<AdditiveNoise>(&noise_); a && a->dim() != cfg_.n) {
    *a = AdditiveNoise(a->beta(), cfg_.n, a->scale());
  }
}

std::string GalerkinIntegrator::noise_id() const { return content_hash(to_json(noise_)); }

SpectralField GalerkinIntegrator::drift_step(const SpectralField& u, double time,
                                             StepStats* stats) const {
  const std::size_t n = cfg_.n;
  const double dt = cfg_.dt;
  SpectralField b(n);
  if (cfg_.scheme == Scheme::explicit_euler) {
    drift_coefficients(u.values(), basis_, b.values());
    SpectralField w = u;
    for (std::size_t k = 0; k < n; ++k) w[k] += dt * b[k];
    if (stats) *stats = {1, 0.0};
    return w;
  }

  // Implicit Euler w = u + dt A(w). First the fixed-point map
  //   w <- (I + dt L)^{-1} (u + dt (A(w) + L w)),
  // a contraction since 0 <= L + DA < L; it is slow where arctan' is small,
  // so unconverged solves finish with damped Newton on the convex energy.
  const double tol = cfg_.tol * std::max(1.0, norm_H(u));
  SpectralField w = u;
  double residual = 0.0;
  std::size_t it = 0;
  for (; it < cfg_.max_iter; ++it) {
    drift_coefficients(w.values(), basis_, b.values());
    residual = implicit_residual(u, w, b, dt);
    if (residual <= tol) {
      if (stats) *stats = {it, residual};
      return w;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double lam = eigenvalue(k + 1);
      const double next = (u[k] + dt * (b[k] + lam * w[k])) / (1.0 + dt * lam);
      w[k] = (1.0 - cfg_.damping) * w[k] + cfg_.damping * next;
    }
    if (!w.all_finite()) break;
  }
  if (w.all_finite()) {
    const auto newton = newton_solve(u, w, dt, tol, basis_);
    it += newton.iterations;
    residual = newton.residual;
    if (newton.converged) {
      if (stats) *stats = {it, residual};
      return w;
    }
  }
  std::ostringstream msg;
  msg << "semi-implicit solve did not converge at t = " << time << ": residual " << residual
      << " after " << it << " iterations (tolerance " << tol << ")";
  throw StepFailure(msg.str(), time, it, residual);
}

SpectralField GalerkinIntegrator::step(const SpectralField& u, const NoiseStream& stream,
                                       std::uint64_t step_index, StepStats* stats) const {
  if (u.dim() != cfg_.n) throw std::invalid_argument("state dimension differs from solver n");
  const double time = static_cast<double>(step_index) * cfg_.dt;
  SpectralField w = drift_step(u, time, stats);
  if (!is_noise_free(noise_)) w += sample_increment(noise_, u, cfg_.dt, basis_, stream, step_index);
  if (!w.all_finite()) {
    throw StepFailure("state left the finite range at t = " + std::to_string(time), time, 0, 0.0);
  }
  return w;
}

SpectralField GalerkinIntegrator::integrate(const SpectralField& u0, const NoiseStream& stream,
                                            const Observer& observe) const {
  SpectralField u = u0.resized(cfg_.n);
  const std::size_t steps = cfg_.steps();
  if (observe) observe(0, 0.0, u);
  for (std::size_t m = 0; m < steps; ++m) {
    u = step(u, stream, m);
    const std::size_t done = m + 1;
    if (observe && (done % cfg_.record_every == 0 || done == steps)) {
      observe(done, static_cast<double>(done) * cfg_.dt, u);
    }
  }
  return u;
}

void GalerkinIntegrator::integrate_pair(const SpectralField& x, const SpectralField& y,
                                        const NoiseStream& stream,
                                        const PairObserver& observe) const {
  SpectralField u = x.resized(cfg_.n);
  SpectralField v = y.resized(cfg_.n);
  const std::size_t steps = cfg_.steps();
  observe(0, 0.0, u, v);
  for (std::size_t m = 0; m < steps; ++m) {
    u = step(u, stream, m);
    v = step(v, stream, m);
    observe(m + 1, static_cast<double>(m + 1) * cfg_.dt, u, v);
  }
}

Trajectory GalerkinIntegrator::simulate(const SpectralField& u0, std::uint64_t trajectory) const {
  Trajectory traj;
  traj.config = cfg_;
  traj.noise_id = noise_id();
  integrate(u0, stream(trajectory), [&](std::size_t, double t, const SpectralField& u) {
    traj.times.push_back(t);
    traj.states.push_back(u);
    traj.functionals.push_back(functionals_of(u, basis_));
  });
  return traj;
}

std::pair<Trajectory, Trajectory> GalerkinIntegrator::simulate_coupled(const SpectralField& x,
                                                                       const SpectralField& y,
                                                                       std::uint64_t trajectory) const {
  return {simulate(x, trajectory), simulate(y, trajectory)};
}

SpectralField step(const SpectralField& u, const NoiseModel& noise, const SolverConfig& cfg,
                   const NoiseStream& stream, std::uint64_t step_index) {
  return GalerkinIntegrator(cfg, noise).step(u, stream, step_index);
}

Trajectory simulate(const SpectralField& u0, const NoiseModel& noise, const SolverConfig& cfg) {
  return GalerkinIntegrator(cfg, noise).simulate(u0);
}

std::pair<Trajectory, Trajectory> simulate_coupled(const SpectralField& x, const SpectralField& y,
                                                   const NoiseModel& noise,
                                                   const SolverConfig& cfg) {
  return GalerkinIntegrator(cfg, noise).simulate_coupled(x, y);
}

double decay_rate_floor(double gradient_sup) {
  if (gradient_sup <= 0.0) return 1.0;
  return std::atan(gradient_sup) / gradient_sup;
}

DecayRecord deterministic_flow(const SpectralField& u0, const SolverConfig& cfg) {
  GalerkinIntegrator integrator(cfg, NoNoise{});
  DecayRecord rec;
  const SpectralField start = u0.resized(cfg.n);
  rec.gradient_sup = deriv_sup_sampled(start, 64 * cfg.n);
  rec.k_min = decay_rate_floor(rec.gradient_sup);
  rec.trajectory = integrator.simulate(start);
  return rec;
}

TruncationTable truncation_study(const SpectralField& u0, const MultiplicativeNoise& noise,
                                 const SolverConfig& cfg, std::span<const std::size_t> ks,
                                 std::size_t ensemble, int workers) {
  for (std::size_t k : ks) {
    if (k > noise.size()) throw std::invalid_argument("truncation level exceeds family size");
  }
  std::vector<GalerkinIntegrator> integrators;
  integrators.reserve(ks.size());
  for (std::size_t k : ks) integrators.emplace_back(cfg, noise.truncated(k));

  // Per member: squared gaps at each record time for each consecutive pair.
  using Gaps = std::vector<std::vector<double>>;
  const auto member_gaps = ensemble::map_members<Gaps>(ensemble, workers, [&](std::size_t m) {
    std::vector<std::vector<SpectralField>> paths(ks.size());
    const NoiseStream stream(cfg.seed, m);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      integrators[i].integrate(u0, stream, [&](std::size_t, double, const SpectralField& u) {
        paths[i].push_back(u);
      });
    }
    Gaps gaps(ks.size() > 0 ? ks.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
      for (std::size_t r = 0; r < paths[i].size(); ++r) {
        const double d = norm_H(paths[i][r] - paths[i + 1][r]);
        gaps[i].push_back(d * d);
      }
    }
    return gaps;
  });

  std::vector<double> times;
  GalerkinIntegrator(cfg, NoNoise{}).integrate(
      SpectralField(cfg.n), NoiseStream(cfg.seed, 0),
      [&](std::size_t, double t, const SpectralField&) { times.push_back(t); });

  TruncationTable table;
  table.ensemble = ensemble;
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    TruncationRow row;
    row.k_coarse = ks[i];
    row.k_fine = ks[i + 1];
    row.tail_lambda_sq = noise.lambda_sq_tail(ks[i]);
    std::vector<double> samples(ensemble);
    for (std::size_t r = 0; r < times.size(); ++r) {
      for (std::size_t m = 0; m < ensemble; ++m) samples[m] = member_gaps[m][i][r];
      const auto s = summarize(samples);
      if (r == 0 || s.mean > row.gap) {
        row.gap = s.mean;
        row.half_width = s.half_width;
        row.time_of_max = times[r];
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

nlohmann::json to_json(const TruncationTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"k", r.k_coarse},
                    {"k_fine", r.k_fine},
                    {"gap", r.gap},
                    {"half_width", r.half_width},
                    {"time_of_max", r.time_of_max},
                    {"tail_lambda_sq", r.tail_lambda_sq}});
  }
  return {{"ensemble", t.ensemble}, {"rows", rows}};
}

}  // namespace curveflow
