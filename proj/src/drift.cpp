#include "curveflow/drift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "curveflow/ensemble.hpp"

namespace curveflow {

namespace {

double dual_norm_of(std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 1; k <= b.size(); ++k) s += b[k - 1] * b[k - 1] / eigenvalue(k);
  return std::sqrt(s);
}

}  // namespace

nlohmann::json to_json(const DriftEvaluation& e) {
  return {{"coefficients", to_json(e.galerkin_coeffs)},
          {"dual_norm", e.dual_norm},
          {"quadrature_id", e.quadrature_id}};
}

void drift_coefficients(std::span<const double> u, const SpectralBasis& basis,
                        std::span<double> b) {
  std::vector<double> g(basis.nodes());
  basis.derivs_at_nodes(u, g);
  for (double& v : g) v = -std::atan(v);
  basis.integrate_against_derivs(g, b);
}

DriftEvaluation apply_drift(const SpectralField& u, const SpectralBasis& basis) {
  SpectralField b(basis.dim());
  drift_coefficients(u.values(), basis, b.values());
  const double dn = dual_norm_of(b.values());
  return {std::move(b), dn, basis.rule().id};
}

double pairing_H(const DriftEvaluation& eval, const SpectralField& v) {
  return inner_H(eval.galerkin_coeffs, v);
}

double monotonicity_gap(const SpectralField& u, const SpectralField& v,
                        const SpectralBasis& basis) {
  // Pointwise form: -sum_j w_j (atan a_j - atan b_j)(a_j - b_j), each term <= 0.
  std::vector<double> du(basis.nodes()), dv(basis.nodes());
  basis.derivs_at_nodes(u.values(), du);
  basis.derivs_at_nodes(v.values(), dv);
  for (std::size_t j = 0; j < du.size(); ++j) {
    du[j] = -(std::atan(du[j]) - std::atan(dv[j])) * (du[j] - dv[j]);
  }
  return basis.integrate(du);
}

double lyapunov_pairing_V(const SpectralField& u, const SpectralBasis& basis) {
  std::vector<double> d1(basis.nodes()), d2(basis.nodes());
  basis.derivs_at_nodes(u.values(), d1);
  basis.second_derivs_at_nodes(u.values(), d2);
  for (std::size_t j = 0; j < d1.size(); ++j) d1[j] = -d2[j] * d2[j] / (1.0 + d1[j] * d1[j]);
  return basis.integrate(d1);
}

double lyapunov_pairing_coefficients(const SpectralField& u, const SpectralBasis& basis) {
  const auto e = apply_drift(u, basis);
  double s = 0.0;
  const std::size_t m = std::min(u.dim(), basis.dim());
  for (std::size_t k = 1; k <= m; ++k) s += eigenvalue(k) * e.galerkin_coeffs[k - 1] * u[k - 1];
  return s;
}

std::vector<double> hemicontinuity_probe(const SpectralField& u, const SpectralField& v,
                                         const SpectralField& w,
                                         std::span<const double> lambdas,
                                         const SpectralBasis& basis) {
  const std::size_t m = basis.nodes();
  std::vector<double> du(m), dv(m), dw(m), g(m);
  basis.derivs_at_nodes(u.values(), du);
  basis.derivs_at_nodes(v.values(), dv);
  basis.derivs_at_nodes(w.values(), dw);
  std::vector<double> out;
  out.reserve(lambdas.size());
  for (double lam : lambdas) {
    for (std::size_t j = 0; j < m; ++j) g[j] = -std::atan(du[j] + lam * dv[j]) * dw[j];
    out.push_back(basis.integrate(g));
  }
  return out;
}

double hemicontinuity_modulus(const SpectralField& v, const SpectralField& w) {
  return deriv_sup_bound(v) * deriv_sup_bound(w);
}

double max_adjacent_jump(std::span<const double> values) {
  double m = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    m = std::max(m, std::abs(values[i] - values[i - 1]));
  }
  return m;
}

std::vector<DriftEvaluation> apply_drift_batch(std::span<const SpectralField> fields,
                                               const SpectralBasis& basis, int workers) {
  return ensemble::map_members<DriftEvaluation>(
      fields.size(), workers, [&](std::size_t i) { return apply_drift(fields[i], basis); });
}

namespace reference {

DriftEvaluation apply_drift(const SpectralField& u, std::size_t n, const QuadratureRule& rule) {
  std::vector<double> b(n, 0.0);
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double x = rule.nodes[j];
    double du = 0.0;
    for (std::size_t k = 1; k <= u.dim(); ++k) {
      const double kp = static_cast<double>(k) * pi;
      du += u[k - 1] * std::numbers::sqrt2 * kp * std::cos(kp * x);
    }
    const double a = std::atan(du);
    for (std::size_t k = 1; k <= n; ++k) {
      const double kp = static_cast<double>(k) * pi;
      b[k - 1] -= rule.weights[j] * a * std::numbers::sqrt2 * kp * std::cos(kp * x);
    }
  }
  const double dn = dual_norm_of(b);
  return {SpectralField(std::move(b)), dn, rule.id};
}

std::vector<DriftEvaluation> apply_drift_batch(std::span<const SpectralField> fields,
                                               const SpectralBasis& basis) {
  return ensemble::map_members_serial<DriftEvaluation>(
      fields.size(), [&](std::size_t i) { return curveflow::apply_drift(fields[i], basis); });
}

}  // namespace reference

}  // namespace curveflow
