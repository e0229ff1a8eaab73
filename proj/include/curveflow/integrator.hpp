#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "curveflow/noise.hpp"
#include "curveflow/spectral_space.hpp"

namespace curveflow {

enum class Scheme { explicit_euler, semi_implicit };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct SolverConfig {
  std::size_t n = 16;
  double dt = 1e-3;
  double T = 1.0;
  Scheme scheme = Scheme::semi_implicit;
  std::size_t quad_panels = 0;  // 0 selects 8n
  std::uint64_t seed = 20240601;
  std::size_t record_every = 1;
  // implicit solve
  std::size_t max_iter = 50;
  double tol = 1e-12;
  double damping = 1.0;

  /// Explicit stability cap 0.5 / lambda_n.
  double dt_max() const;
  std::size_t steps() const;
  QuadratureRule rule() const;
  /// Throws ConfigError naming the offending /solver field.
  void validate() const;
};

nlohmann::json to_json(const SolverConfig& cfg);
SolverConfig solver_from_json(const nlohmann::json& j);

struct FunctionalRecord {
  double norm_H = 0.0;
  double norm_V = 0.0;
  double norm_Vstar = 0.0;
  double norm_W11 = 0.0;
};

FunctionalRecord functionals_of(const SpectralField& u, const SpectralBasis& basis);

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<FunctionalRecord> functionals;
  SolverConfig config;
  std::string noise_id;
};

struct StepStats {
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Euler-Maruyama discretization of the Galerkin SDE
///   du = P_n A u dt + P_n sigma(u) dW^n.
/// The semi-implicit scheme solves w = u + dt A(w) and adds the increment
/// evaluated at u.
class GalerkinIntegrator {
 public:
  using Observer = std::function<void(std::size_t step, double time, const SpectralField& u)>;
  using PairObserver = std::function<void(std::size_t step, double time, const SpectralField& x,
                                          const SpectralField& y)>;

  GalerkinIntegrator(SolverConfig cfg, NoiseModel noise);

  const SolverConfig& config() const { return cfg_; }
  const SpectralBasis& basis() const { return basis_; }
  const NoiseModel& noise() const { return noise_; }
  std::string noise_id() const;

  /// Deterministic part of one step.
  SpectralField drift_step(const SpectralField& u, double time, StepStats* stats = nullptr) const;

  SpectralField step(const SpectralField& u, const NoiseStream& stream, std::uint64_t step_index,
                     StepStats* stats = nullptr) const;

  /// Runs to the horizon, calling `observe` at step 0, every record_every
  /// steps, and at the final step. Returns the final state.
  SpectralField integrate(const SpectralField& u0, const NoiseStream& stream,
                          const Observer& observe) const;
  /// Steps x and y in lockstep on one stream; `observe` sees every step.
  void integrate_pair(const SpectralField& x, const SpectralField& y, const NoiseStream& stream,
                      const PairObserver& observe) const;

  Trajectory simulate(const SpectralField& u0, std::uint64_t trajectory = 0) const;
  std::pair<Trajectory, Trajectory> simulate_coupled(const SpectralField& x,
                                                     const SpectralField& y,
                                                     std::uint64_t trajectory = 0) const;

  NoiseStream stream(std::uint64_t trajectory, StreamTag tag = StreamTag::noise) const {
    return NoiseStream(cfg_.seed, trajectory, tag);
  }

 private:
  SolverConfig cfg_;
  NoiseModel noise_;
  SpectralBasis basis_;
};

SpectralField step(const SpectralField& u, const NoiseModel& noise, const SolverConfig& cfg,
                   const NoiseStream& stream, std::uint64_t step_index);
Trajectory simulate(const SpectralField& u0, const NoiseModel& noise, const SolverConfig& cfg);
std::pair<Trajectory, Trajectory> simulate_coupled(const SpectralField& x, const SpectralField& y,
                                                   const NoiseModel& noise,
                                                   const SolverConfig& cfg);

/// k(M) = arctan(M) / M, the infimum of arctan(z)/z over |z| <= M.
double decay_rate_floor(double gradient_sup);

struct DecayRecord {
  Trajectory trajectory;
  double gradient_sup = 0.0;  // M, sampled at 64n points
  double k_min = 1.0;
};

DecayRecord deterministic_flow(const SpectralField& u0, const SolverConfig& cfg);

struct TruncationRow {
  std::size_t k_coarse = 0;
  std::size_t k_fine = 0;
  double gap = 0.0;         // max_t mean ||u_K(t) - u_K'(t)||^2
  double half_width = 0.0;  // at the maximizing time
  double time_of_max = 0.0;
  double tail_lambda_sq = 0.0;  // sum_{i > K} Lip(phi_i)^2
};

struct TruncationTable {
  std::vector<TruncationRow> rows;
  std::size_t ensemble = 0;
};

/// Common-noise comparison of K-truncated multiplicative solutions.
TruncationTable truncation_study(const SpectralField& u0, const MultiplicativeNoise& noise,
                                 const SolverConfig& cfg, std::span<const std::size_t> ks,
                                 std::size_t ensemble, int workers = 0);

nlohmann::json to_json(const TruncationTable& t);

}  // namespace curveflow
