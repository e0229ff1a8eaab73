#pragma once

#include <span>
#include <string>
#include <vector>

#include "curveflow/spectral_space.hpp"

namespace curveflow {

/// Galerkin coefficients b_k = -int arctan(u') e_k' dx of the curve
/// shortening drift, returned as H-coefficients.
struct DriftEvaluation {
  SpectralField galerkin_coeffs;
  double dual_norm = 0.0;  // sqrt(sum b_k^2 / lambda_k)
  std::string quadrature_id;
};

nlohmann::json to_json(const DriftEvaluation& e);

/// Hot-path kernel: writes b (size basis.dim()) for coefficient vector u.
void drift_coefficients(std::span<const double> u, const SpectralBasis& basis,
                        std::span<double> b);

DriftEvaluation apply_drift(const SpectralField& u, const SpectralBasis& basis);

/// sum_k b_k v_k.
double pairing_H(const DriftEvaluation& eval, const SpectralField& v);

/// <Au - Av, u - v>_H; non-positive by monotonicity of arctan.
double monotonicity_gap(const SpectralField& u, const SpectralField& v,
                        const SpectralBasis& basis);

/// -int (u'')^2 / (1 + (u')^2) dx, evaluated pointwise.
double lyapunov_pairing_V(const SpectralField& u, const SpectralBasis& basis);
/// sum_k lambda_k b_k u_k, the same pairing computed in coefficient space.
double lyapunov_pairing_coefficients(const SpectralField& u, const SpectralBasis& basis);

/// lambda -> <A(u + lambda v), w> on the given grid.
std::vector<double> hemicontinuity_probe(const SpectralField& u, const SpectralField& v,
                                         const SpectralField& w,
                                         std::span<const double> lambdas,
                                         const SpectralBasis& basis);

/// Lipschitz modulus of the probe in lambda: sup|v'| sup|w'| (|arctan'| <= 1).
double hemicontinuity_modulus(const SpectralField& v, const SpectralField& w);

/// Largest |f_{i+1} - f_i| of a probe sequence.
double max_adjacent_jump(std::span<const double> values);

/// Batched drift over many fields; OpenMP over fields.
std::vector<DriftEvaluation> apply_drift_batch(std::span<const SpectralField> fields,
                                               const SpectralBasis& basis, int workers);

namespace reference {

/// Table-free drift: evaluates sin/cos at each node directly. Kept to check
/// the tabulated kernel.
DriftEvaluation apply_drift(const SpectralField& u, std::size_t n, const QuadratureRule& rule);

std::vector<DriftEvaluation> apply_drift_batch(std::span<const SpectralField> fields,
                                               const SpectralBasis& basis);

}  // namespace reference

}  // namespace curveflow
