#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "curveflow/rng.hpp"
#include "curveflow/spectral_space.hpp"

namespace curveflow {

/// One member phi_i(x, y) of a multiplicative noise family, with its
/// partial derivatives and a Lipschitz constant in (x, y).
struct NoiseMember {
  std::function<double(double, double)> value;
  std::function<double(double, double)> d_dx;
  std::function<double(double, double)> d_dy;
  double lip = 0.0;
};

/// B(u)[phi_i](x) = phi_i(x, u(x)) with sum_i Lip(phi_i)^2 = Lambda^2 < inf.
class MultiplicativeNoise {
 public:
  explicit MultiplicativeNoise(std::vector<NoiseMember> members, double decay = 0.0,
                               double scale = 1.0);

  /// phi_i(x,y) = scale decay^i sin(i pi x) / sqrt(1 + y^2), i = 1..members,
  /// Lip(phi_i) <= scale decay^i (i pi + 1).
  static MultiplicativeNoise default_family(std::size_t members, double decay = 0.5,
                                            double scale = 1.0);

  std::size_t size() const { return members_.size(); }
  const std::vector<NoiseMember>& members() const { return members_; }
  double lambda_sq() const { return lambda_sq_; }
  /// sum_{i > k} Lip(phi_i)^2
  double lambda_sq_tail(std::size_t k) const;
  MultiplicativeNoise truncated(std::size_t k) const;

  double decay() const { return decay_; }
  double scale() const { return scale_; }

 private:
  std::vector<NoiseMember> members_;
  double lambda_sq_ = 0.0;
  double decay_;
  double scale_;
};

/// Q = scale (-Delta)^{-beta}, diagonal in the eigenbasis, truncated at n.
class AdditiveNoise {
 public:
  AdditiveNoise(double beta, std::size_t n, double scale = 1.0);

  double beta() const { return beta_; }
  double scale() const { return scale_; }
  std::size_t dim() const { return q_.size(); }
  /// q_k, 1-based.
  double amplitude(std::size_t k) const { return q_[k - 1]; }
  const std::vector<double>& amplitudes() const { return q_; }

  /// ||Q||^2_{HS(U,H)} = sum_{k<=n} q_k^2 and its full series.
  double trace_H() const;
  double trace_H_full() const;
  double tail_H() const { return trace_H_full() - trace_H(); }
  /// ||Q||^2_{HS(U,V)} = sum_{k<=n} lambda_k q_k^2 and its full series.
  double trace_V() const;
  double trace_V_full() const;
  double tail_V() const { return trace_V_full() - trace_V(); }

 private:
  double beta_;
  double scale_;
  std::vector<double> q_;
};

struct NoNoise {};

using NoiseModel = std::variant<NoNoise, AdditiveNoise, MultiplicativeNoise>;

/// sum_i int phi_i(x, u(x))^2 dx over the first k members (all when k = npos).
double hs_norm_H(const SpectralField& u, const MultiplicativeNoise& noise,
                 const SpectralBasis& basis, std::size_t k = static_cast<std::size_t>(-1));
/// sum_i ||P_n phi_i(., u)||^2, the exact second moment of a projected
/// increment per unit time.
double hs_norm_H_projected(const SpectralField& u, const MultiplicativeNoise& noise,
                           const SpectralBasis& basis,
                           std::size_t k = static_cast<std::size_t>(-1));
/// sum_i int (phi_i(x,u) - phi_i(x,v))^2 dx
double hs_gap(const SpectralField& u, const SpectralField& v, const MultiplicativeNoise& noise,
              const SpectralBasis& basis);
/// sum_i int (d/dx phi_i(x, u(x)))^2 dx
double hs_norm_V(const SpectralField& u, const MultiplicativeNoise& noise,
                 const SpectralBasis& basis);

/// P_n sum_{i<=k} phi_i(., u) xi_i sqrt(dt).
SpectralField sample_multiplicative_increment(const SpectralField& u,
                                              const MultiplicativeNoise& noise, std::size_t k,
                                              double dt, const SpectralBasis& basis,
                                              const NoiseStream& stream, std::uint64_t step);

/// Coefficient k gets q_k xi_k sqrt(dt).
SpectralField sample_additive_increment(const AdditiveNoise& noise, double dt,
                                        const NoiseStream& stream, std::uint64_t step);

/// Increment of either regime; zero field for NoNoise.
SpectralField sample_increment(const NoiseModel& noise, const SpectralField& u, double dt,
                               const SpectralBasis& basis, const NoiseStream& stream,
                               std::uint64_t step);

bool is_noise_free(const NoiseModel& noise);

nlohmann::json to_json(const NoiseModel& noise);
/// Builds a model from a config block; additive noise is truncated at n.
NoiseModel noise_from_json(const nlohmann::json& j, std::size_t n);

/// FNV-1a 64 of a canonical JSON dump, hex encoded.
std::string content_hash(const nlohmann::json& j);

}  // namespace curveflow
