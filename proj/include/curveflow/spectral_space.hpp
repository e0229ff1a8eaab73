#pragma once

#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace curveflow {

inline constexpr double pi = std::numbers::pi;

/// Eigenvalue k^2 pi^2 of the Dirichlet Laplacian on [0,1] (k is 1-based).
inline double eigenvalue(std::size_t k) {
  const double kp = static_cast<double>(k) * pi;
  return kp * kp;
}

/// Coefficients of u(x) = sum_k c_k sqrt(2) sin(k pi x), the H-orthonormal
/// Dirichlet eigenbasis. Index 0 holds c_1.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(std::size_t n);
  explicit SpectralField(std::vector<double> coeffs);

  /// amplitude * e_k in an n-dimensional space.
  static SpectralField basis(std::size_t k, std::size_t n, double amplitude = 1.0);

  std::size_t dim() const { return c_.size(); }
  bool empty() const { return c_.empty(); }

  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }

  /// c_k with 1-based k; zero beyond dim().
  double coeff(std::size_t k) const { return (k >= 1 && k <= c_.size()) ? c_[k - 1] : 0.0; }

  std::span<const double> values() const { return c_; }
  std::span<double> values() { return c_; }
  const std::vector<double>& vector() const { return c_; }

  bool all_finite() const;

  /// Orthogonal projection P_n (truncation or zero padding).
  SpectralField resized(std::size_t n) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  std::vector<double> c_;
};

/// Weighted nodes for integrals over [0,1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;  // polynomial exactness degree per panel
  std::string id;

  std::size_t size() const { return nodes.size(); }

  /// m panels of 4-point Gauss-Legendre.
  static QuadratureRule composite_gauss_legendre(std::size_t panels);
  /// Default rule for Galerkin dimension n: 8n panels.
  static QuadratureRule for_dimension(std::size_t n);
};

/// Basis values and derivatives tabulated at quadrature nodes. Tables are
/// node-major so nodal transforms and their adjoints are dense mat-vecs.
class SpectralBasis {
 public:
  SpectralBasis(std::size_t n, QuadratureRule rule);
  explicit SpectralBasis(std::size_t n) : SpectralBasis(n, QuadratureRule::for_dimension(n)) {}

  std::size_t dim() const { return n_; }
  std::size_t nodes() const { return rule_.size(); }
  const QuadratureRule& rule() const { return rule_; }

  // out_j = sum_k c_k e_k(x_j), sum_k c_k e_k'(x_j), sum_k c_k e_k''(x_j)
  void values_at_nodes(std::span<const double> c, std::span<double> out) const;
  void derivs_at_nodes(std::span<const double> c, std::span<double> out) const;
  void second_derivs_at_nodes(std::span<const double> c, std::span<double> out) const;

  // out_k = sum_j w_j g_j e_k(x_j)  and  sum_j w_j g_j e_k'(x_j)
  void integrate_against_values(std::span<const double> g, std::span<double> out) const;
  void integrate_against_derivs(std::span<const double> g, std::span<double> out) const;

  double integrate(std::span<const double> g) const;

  /// Node-major tables: entry (j, k-1) is e_k(x_j) resp. e_k'(x_j).
  const std::vector<double>& value_table() const { return value_table_; }
  const std::vector<double>& deriv_table() const { return deriv_table_; }

 private:
  std::size_t n_;
  QuadratureRule rule_;
  std::vector<double> value_table_;
  std::vector<double> deriv_table_;
  // mode-major copies for the forward transforms
  std::vector<double> value_modes_;
  std::vector<double> deriv_modes_;
};

double eval(const SpectralField& u, double x);
double eval_deriv(const SpectralField& u, double x);

double inner_H(const SpectralField& u, const SpectralField& v);
double norm_H(const SpectralField& u);
double norm_V(const SpectralField& u);
double norm_Vstar(const SpectralField& u);
double norm_W11(const SpectralField& u, const SpectralBasis& basis);

/// Rigorous bound sum_k |c_k| sqrt(2) k pi on sup|u'|.
double deriv_sup_bound(const SpectralField& u);
/// max |u'| over `samples` equispaced points in [0,1].
double deriv_sup_sampled(const SpectralField& u, std::size_t samples);

using PointFunction = std::function<double(double)>;

/// Galerkin projection via quadrature. Rejects f with
/// |f(0)|,|f(1)| > 1e-9 (1 + sup|f|).
SpectralField project(const PointFunction& f, const SpectralBasis& basis);
SpectralField project(const PointFunction& f, std::size_t n, const QuadratureRule& rule);

nlohmann::json to_json(const SpectralField& u);
SpectralField field_from_json(const nlohmann::json& j);
/// "k,c_k" rows, one per coefficient.
std::string to_csv_rows(const SpectralField& u);

}  // namespace curveflow
