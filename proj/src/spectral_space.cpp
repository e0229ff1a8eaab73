#include "curveflow/spectral_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace curveflow {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;

void check_point(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("evaluation point outside [0,1]");
  }
}

// out_j = sum_k table[k nodes + j] c_k  (mode-major table, vectorizes over j)
void table_apply(const std::vector<double>& table, std::size_t n, std::span<const double> c,
                 std::span<double> out) {
  const std::size_t m = std::min(n, c.size());
  const std::size_t nodes = out.size();
  std::fill(out.begin(), out.end(), 0.0);
  double* o = out.data();
  for (std::size_t k = 0; k < m; ++k) {
    const double* col = table.data() + k * nodes;
    const double ck = c[k];
    for (std::size_t j = 0; j < nodes; ++j) o[j] += ck * col[j];
  }
}

// out_k = sum_j weights_j g_j table[j n + k]
void table_adjoint(const std::vector<double>& table, std::size_t n,
                   const std::vector<double>& weights, std::span<const double> g,
                   std::span<double> out) {
  const std::size_t m = std::min(n, out.size());
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double* row = table.data() + j * n;
    const double a = weights[j] * g[j];
    for (std::size_t k = 0; k < m; ++k) out[k] += a * row[k];
  }
}

}  // namespace

SpectralField::SpectralField(std::size_t n) : c_(n, 0.0) {
  if (n == 0) throw std::invalid_argument("SpectralField dimension must be >= 1");
}

SpectralField::SpectralField(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) throw std::invalid_argument("SpectralField dimension must be >= 1");
  if (!all_finite()) throw std::invalid_argument("SpectralField coefficients must be finite");
}

SpectralField SpectralField::basis(std::size_t k, std::size_t n, double amplitude) {
  if (k == 0 || k > n) throw std::invalid_argument("basis index out of range");
  SpectralField u(n);
  u.c_[k - 1] = amplitude;
  return u;
}

bool SpectralField::all_finite() const {
  return std::all_of(c_.begin(), c_.end(), [](double v) { return std::isfinite(v); });
}

SpectralField SpectralField::resized(std::size_t n) const {
  std::vector<double> c(n, 0.0);
  std::copy_n(c_.begin(), std::min(n, c_.size()), c.begin());
  return SpectralField(std::move(c));
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (other.dim() != dim()) throw std::invalid_argument("dimension mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += other.c_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (other.dim() != dim()) throw std::invalid_argument("dimension mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= other.c_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

QuadratureRule QuadratureRule::composite_gauss_legendre(std::size_t panels) {
  if (panels == 0) throw std::invalid_argument("quadrature needs at least one panel");
  // Gauss-Legendre on [-1,1], 4 points.
  constexpr double x0 = 0.33998104358485626480;
  constexpr double x1 = 0.86113631159405257522;
  constexpr double w0 = 0.65214515486254614263;
  constexpr double w1 = 0.34785484513745385737;
  constexpr double ref_nodes[4] = {-x1, -x0, x0, x1};
  constexpr double ref_weights[4] = {w1, w0, w0, w1};

  QuadratureRule rule;
  rule.order = 7;
  rule.id = "gauss-legendre-4x" + std::to_string(panels);
  rule.nodes.reserve(4 * panels);
  rule.weights.reserve(4 * panels);
  const double h = 1.0 / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * h;
    for (int i = 0; i < 4; ++i) {
      rule.nodes.push_back(mid + 0.5 * h * ref_nodes[i]);
      rule.weights.push_back(0.5 * h * ref_weights[i]);
    }
  }
  return rule;
}

QuadratureRule QuadratureRule::for_dimension(std::size_t n) {
  return composite_gauss_legendre(8 * std::max<std::size_t>(n, 1));
}

SpectralBasis::SpectralBasis(std::size_t n, QuadratureRule rule)
    : n_(n), rule_(std::move(rule)) {
  if (n_ == 0) throw std::invalid_argument("basis dimension must be >= 1");
  const std::size_t m = rule_.size();
  value_table_.resize(m * n_);
  deriv_table_.resize(m * n_);
  value_modes_.resize(m * n_);
  deriv_modes_.resize(m * n_);
  for (std::size_t j = 0; j < m; ++j) {
    const double x = rule_.nodes[j];
    for (std::size_t k = 1; k <= n_; ++k) {
      const double kp = static_cast<double>(k) * pi;
      value_table_[j * n_ + k - 1] = sqrt2 * std::sin(kp * x);
      deriv_table_[j * n_ + k - 1] = sqrt2 * kp * std::cos(kp * x);
      value_modes_[(k - 1) * m + j] = value_table_[j * n_ + k - 1];
      deriv_modes_[(k - 1) * m + j] = deriv_table_[j * n_ + k - 1];
    }
  }
}

void SpectralBasis::values_at_nodes(std::span<const double> c, std::span<double> out) const {
  table_apply(value_modes_, n_, c, out);
}

void SpectralBasis::derivs_at_nodes(std::span<const double> c, std::span<double> out) const {
  table_apply(deriv_modes_, n_, c, out);
}

void SpectralBasis::second_derivs_at_nodes(std::span<const double> c,
                                           std::span<double> out) const {
  std::vector<double> scaled(std::min(n_, c.size()));
  for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] = -eigenvalue(k + 1) * c[k];
  table_apply(value_modes_, n_, scaled, out);
}

void SpectralBasis::integrate_against_values(std::span<const double> g,
                                             std::span<double> out) const {
  table_adjoint(value_table_, n_, rule_.weights, g, out);
}

void SpectralBasis::integrate_against_derivs(std::span<const double> g,
                                             std::span<double> out) const {
  table_adjoint(deriv_table_, n_, rule_.weights, g, out);
}

double SpectralBasis::integrate(std::span<const double> g) const {
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) s += rule_.weights[j] * g[j];
  return s;
}

double eval(const SpectralField& u, double x) {
  check_point(x);
  double s = 0.0;
  for (std::size_t k = 1; k <= u.dim(); ++k) {
    s += u[k - 1] * std::sin(static_cast<double>(k) * pi * x);
  }
  return sqrt2 * s;
}

double eval_deriv(const SpectralField& u, double x) {
  check_point(x);
  double s = 0.0;
  for (std::size_t k = 1; k <= u.dim(); ++k) {
    const double kp = static_cast<double>(k) * pi;
    s += u[k - 1] * kp * std::cos(kp * x);
  }
  return sqrt2 * s;
}

double inner_H(const SpectralField& u, const SpectralField& v) {
  const std::size_t m = std::min(u.dim(), v.dim());
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += u[i] * v[i];
  return s;
}

double norm_H(const SpectralField& u) { return std::sqrt(inner_H(u, u)); }

double norm_V(const SpectralField& u) {
  double s = 0.0;
  for (std::size_t k = 1; k <= u.dim(); ++k) s += eigenvalue(k) * u[k - 1] * u[k - 1];
  return std::sqrt(s);
}

double norm_Vstar(const SpectralField& u) {
  double s = 0.0;
  for (std::size_t k = 1; k <= u.dim(); ++k) s += u[k - 1] * u[k - 1] / eigenvalue(k);
  return std::sqrt(s);
}

double norm_W11(const SpectralField& u, const SpectralBasis& basis) {
  std::vector<double> val(basis.nodes()), der(basis.nodes());
  basis.values_at_nodes(u.values(), val);
  basis.derivs_at_nodes(u.values(), der);
  for (std::size_t j = 0; j < val.size(); ++j) val[j] = std::abs(val[j]) + std::abs(der[j]);
  return basis.integrate(val);
}

double deriv_sup_bound(const SpectralField& u) {
  double s = 0.0;
  for (std::size_t k = 1; k <= u.dim(); ++k) {
    s += std::abs(u[k - 1]) * static_cast<double>(k) * pi;
  }
  return sqrt2 * s;
}

double deriv_sup_sampled(const SpectralField& u, std::size_t samples) {
  double m = 0.0;
  const std::size_t count = std::max<std::size_t>(samples, 2);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(count - 1);
    m = std::max(m, std::abs(eval_deriv(u, x)));
  }
  return m;
}

SpectralField project(const PointFunction& f, const SpectralBasis& basis) {
  const auto& rule = basis.rule();
  std::vector<double> g(rule.size());
  double sup = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j] = f(rule.nodes[j]);
    if (!std::isfinite(g[j])) throw std::invalid_argument("projected function is not finite");
    sup = std::max(sup, std::abs(g[j]));
  }
  const double f0 = f(0.0);
  const double f1 = f(1.0);
  sup = std::max({sup, std::abs(f0), std::abs(f1)});
  const double tol = 1e-9 * (1.0 + sup);
  if (std::abs(f0) > tol || std::abs(f1) > tol) {
    std::ostringstream msg;
    msg << "projected function violates the Dirichlet condition: f(0)=" << f0
        << ", f(1)=" << f1;
    throw std::invalid_argument(msg.str());
  }
  SpectralField u(basis.dim());
  basis.integrate_against_values(g, u.values());
  return u;
}

SpectralField project(const PointFunction& f, std::size_t n, const QuadratureRule& rule) {
  return project(f, SpectralBasis(n, rule));
}

nlohmann::json to_json(const SpectralField& u) { return nlohmann::json(u.vector()); }

SpectralField field_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("SpectralField JSON must be a non-empty array of numbers");
  }
  std::vector<double> c;
  c.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw std::invalid_argument("SpectralField JSON entries must be numbers");
    c.push_back(v.get<double>());
  }
  return SpectralField(std::move(c));
}

std::string to_csv_rows(const SpectralField& u) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t k = 1; k <= u.dim(); ++k) out << k << ',' << u[k - 1] << '\n';
  return out.str();
}

}  // namespace curveflow
