#include <doctest.h>

#include <cmath>

#include "curveflow/drift.hpp"
#include "curveflow/ensemble.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/integrator.hpp"
#include "curveflow/sampling.hpp"
#include "curveflow/statistics.hpp"

using namespace curveflow;

namespace {

SolverConfig small(Scheme scheme = Scheme::semi_implicit, double T = 0.1) {
  SolverConfig cfg;
  cfg.n = 8;
  cfg.dt = 1e-3;
  cfg.T = T;
  cfg.scheme = scheme;
  if (scheme == Scheme::explicit_euler) cfg.dt = 5e-4;
  return cfg;
}

}  // namespace

TEST_CASE("a horizon of one step records two states") {
  auto cfg = small();
  cfg.T = cfg.dt;
  const auto traj = simulate(SpectralField::basis(1, 8), AdditiveNoise(1.0, 8), cfg);
  REQUIRE(traj.states.size() == 2);
  CHECK(traj.times[0] == 0.0);
  CHECK(traj.times[1] == cfg.dt);
  CHECK(traj.functionals.size() == 2);
}

TEST_CASE("the zero state is a fixed point of the noise-free flow") {
  for (auto s : {Scheme::semi_implicit, Scheme::explicit_euler}) {
    const auto traj = simulate(SpectralField(8), NoNoise{}, small(s));
    for (const auto& u : traj.states) CHECK(norm_H(u) == 0.0);
  }
}

TEST_CASE("one step of a small field matches the heat equation") {
  const auto u = SpectralField::basis(2, 8, 1e-7);
  const double lam = eigenvalue(2);
  auto cfg = small(Scheme::semi_implicit);
  const auto implicit = GalerkinIntegrator(cfg, NoNoise{}).drift_step(u, 0.0);
  CHECK(implicit.coeff(2) == doctest::Approx(u.coeff(2) / (1 + cfg.dt * lam)).epsilon(1e-9));
  cfg.scheme = Scheme::explicit_euler;
  cfg.dt = 1e-4;
  const auto expl = GalerkinIntegrator(cfg, NoNoise{}).drift_step(u, 0.0);
  CHECK(expl.coeff(2) == doctest::Approx(u.coeff(2) * (1 - cfg.dt * lam)).epsilon(1e-9));
}

TEST_CASE("the implicit step solves w = u + dt A(w)") {
  const auto cfg = small();
  const GalerkinIntegrator g(cfg, NoNoise{});
  const auto u = random_field(8, 5.0, 70, 0);
  StepStats stats;
  const auto w = g.drift_step(u, 0.0, &stats);
  const auto b = apply_drift(w, g.basis());
  const auto r = w - u - cfg.dt * b.galerkin_coeffs;
  CHECK(norm_H(r) <= cfg.tol * std::max(1.0, norm_H(u)));
  CHECK(stats.residual <= cfg.tol * std::max(1.0, norm_H(u)));
}

TEST_CASE("noise-free H norm is non-increasing") {
  for (auto s : {Scheme::semi_implicit, Scheme::explicit_euler}) {
    auto cfg = small(s, 0.5);
    cfg.dt = 5e-4;
    const auto traj = simulate(random_field(8, 3.0, 71, 0), NoNoise{}, cfg);
    for (std::size_t r = 1; r < traj.states.size(); ++r) {
      CHECK(traj.functionals[r].norm_H <= traj.functionals[r - 1].norm_H * (1 + 1e-14));
    }
  }
}

TEST_CASE("runs are reproducible and independent of the worker count") {
  const GalerkinIntegrator g(small(), AdditiveNoise(1.0, 8));
  const auto x = SpectralField::basis(1, 8);
  CHECK(g.simulate(x, 3).states == g.simulate(x, 3).states);
  CHECK(g.simulate(x, 3).states != g.simulate(x, 4).states);
  auto run = [&](std::size_t m) { return g.simulate(x, m).states.back(); };
  const auto a = ensemble::map_members<SpectralField>(9, 1, run);
  const auto b = ensemble::map_members<SpectralField>(9, 3, run);
  const auto c = ensemble::map_members_serial<SpectralField>(9, run);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("coupled runs from one initial condition coincide") {
  const auto cfg = small();
  for (const NoiseModel& noise :
       {NoiseModel(AdditiveNoise(1.0, 8)), NoiseModel(MultiplicativeNoise::default_family(4))}) {
    const auto x = random_field(8, 1.0, 72, 0);
    const auto [a, b] = simulate_coupled(x, x, noise, cfg);
    CHECK(a.states == b.states);
  }
}

TEST_CASE("mean energy obeys the Ito energy inequality") {
  // d||u||^2 = 2<Au,u> dt + tr dt + martingale with <Au,u> <= 0.
  auto cfg = small(Scheme::semi_implicit, 0.5);
  const AdditiveNoise q(1.0, 8, 3.0);
  const GalerkinIntegrator g(cfg, q);
  const auto x = SpectralField::basis(1, 8, 0.5);
  const auto e = ensemble::map_members<double>(400, 0, [&](std::size_t m) {
    const auto u = g.simulate(x, m).states.back();
    return inner_H(u, u);
  });
  const auto s = summarize(e);
  CHECK(s.mean - s.half_width <= inner_H(x, x) + cfg.T * q.trace_H());
}

TEST_CASE("invalid solver settings raise ConfigError with the field") {
  auto cfg = small(Scheme::explicit_euler);
  cfg.dt = 1.01 * cfg.dt_max();
  try {
    GalerkinIntegrator g(cfg, NoNoise{});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "/solver/dt");
  }
  cfg.dt = cfg.dt_max();
  CHECK_NOTHROW(GalerkinIntegrator(cfg, NoNoise{}));
  CHECK(cfg.dt_max() == doctest::Approx(0.5 / eigenvalue(8)));
  auto bad = small();
  bad.T = bad.dt / 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(solver_from_json({{"dt", -1.0}}), ConfigError);
  CHECK_THROWS_AS(solver_from_json({{"color", 1}}), ConfigError);
  CHECK_THROWS_AS(scheme_from_string("rk4"), std::invalid_argument);
}

TEST_CASE("an unreachable tolerance raises StepFailure with the time") {
  auto cfg = small();
  cfg.tol = 1e-300;
  const GalerkinIntegrator g(cfg, NoNoise{});
  try {
    g.step(random_field(8, 5.0, 73, 0), g.stream(0), 7);
    FAIL("expected StepFailure");
  } catch (const StepFailure& e) {
    CHECK(e.time() == doctest::Approx(7 * cfg.dt));
    CHECK(e.iterations() >= cfg.max_iter);
  }
}

TEST_CASE("record_every thins the trajectory and keeps the final state") {
  auto cfg = small(Scheme::semi_implicit, 0.105);
  cfg.record_every = 10;
  const auto traj = simulate(SpectralField::basis(1, 8), NoNoise{}, cfg);
  CHECK(traj.times.size() == 12);
  CHECK(traj.times.back() == doctest::Approx(0.105));
  CHECK(to_json(solver_from_json(to_json(cfg))) == to_json(cfg));
}

TEST_CASE("deterministic decay respects the gradient-dependent rate") {
  auto cfg = small(Scheme::semi_implicit, 2.0);
  const auto rec = deterministic_flow(SpectralField::basis(1, 8, 2.0), cfg);
  const double M = 2.0 * std::sqrt(2.0) * pi;
  CHECK(rec.gradient_sup == doctest::Approx(M).epsilon(1e-6));
  CHECK(rec.k_min == doctest::Approx(std::atan(M) / M).epsilon(1e-6));
  const double v0 = rec.trajectory.functionals.front().norm_H;
  for (std::size_t r = 0; r < rec.trajectory.times.size(); ++r) {
    const double t = rec.trajectory.times[r];
    CHECK(rec.trajectory.functionals[r].norm_H <= v0 * std::exp(-rec.k_min * t) * (1 + 1e-3));
  }
  CHECK(decay_rate_floor(0.0) == 1.0);
}

TEST_CASE("truncation gaps shrink with the level") {
  auto cfg = small(Scheme::semi_implicit, 0.5);
  const auto f = MultiplicativeNoise::default_family(8);
  const std::vector<std::size_t> ks{2, 4, 8};
  const auto t = truncation_study(SpectralField::basis(1, 8), f, cfg, ks, 20);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].gap >= t.rows[1].gap);
  CHECK(t.rows[1].tail_lambda_sq < t.rows[0].tail_lambda_sq);
  // Common noise: K = K' gives identical paths.
  const std::vector<std::size_t> same{4, 4};
  CHECK(truncation_study(SpectralField::basis(1, 8), f, cfg, same, 5).rows[0].gap == 0.0);
}
