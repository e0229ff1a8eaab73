#include <doctest.h>

#include <cmath>

#include "curveflow/drift.hpp"
#include "curveflow/sampling.hpp"
#include "oracles.hpp"

using namespace curveflow;

namespace {

// b_k = -int arctan(u') e_k' dx by dense Simpson integration.
double drift_oracle(const SpectralField& u, std::size_t k) {
  return -oracle::simpson(
      [&](double x) {
        return std::atan(oracle::deriv(u, x)) * std::sqrt(2.0) * k * oracle::pi *
               std::cos(k * oracle::pi * x);
      },
      200000);
}

}  // namespace

TEST_CASE("drift matches a dense-quadrature oracle and converges under refinement") {
  const std::size_t n = 6;
  const SpectralBasis basis(n);
  const auto fine = QuadratureRule::composite_gauss_legendre(3072);
  // Default-rule error grows with the gradient: exact for nearly linear
  // arctan, about 1e-4 at sup|u'| ~ 8, about 2e-2 at sup|u'| ~ 40.
  const std::vector<std::pair<double, double>> cases{{0.05, 1e-12}, {1.0, 2e-4}, {5.0, 5e-2}};
  for (const auto& [amp, tol] : cases) {
    const auto u = random_field(n, amp, 21, 0);
    const auto b = apply_drift(u, basis);
    const auto r = reference::apply_drift(u, n, fine);
    double err_default = 0.0, err_fine = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double o = drift_oracle(u, k);
      err_default = std::max(err_default, std::abs(b.galerkin_coeffs.coeff(k) - o));
      err_fine = std::max(err_fine, std::abs(r.galerkin_coeffs.coeff(k) - o));
    }
    CHECK(err_default < tol);
    CHECK(err_fine < 1e-9);
  }
}

TEST_CASE("tabulated drift equals the table-free reference") {
  const std::size_t n = 12;
  const SpectralBasis basis(n);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto u = random_field(n, 3.0, 8, i);
    const auto a = apply_drift(u, basis);
    const auto r = reference::apply_drift(u, n, basis.rule());
    CHECK(a.quadrature_id == r.quadrature_id);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(a.galerkin_coeffs[k] == doctest::Approx(r.galerkin_coeffs[k]).epsilon(1e-12).scale(1.0));
    }
    CHECK(a.dual_norm == doctest::Approx(r.dual_norm).epsilon(1e-12));
  }
}

TEST_CASE("batched drift is the same for every worker count and for the serial reference") {
  const SpectralBasis basis(10);
  std::vector<SpectralField> fields;
  for (std::uint64_t i = 0; i < 37; ++i) fields.push_back(random_field(10, 2.0, 4, i));
  const auto one = apply_drift_batch(fields, basis, 1);
  const auto three = apply_drift_batch(fields, basis, 3);
  const auto serial = reference::apply_drift_batch(fields, basis);
  REQUIRE(one.size() == fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    CHECK(one[i].galerkin_coeffs == three[i].galerkin_coeffs);
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(one[i].galerkin_coeffs[k] ==
            doctest::Approx(serial[i].galerkin_coeffs[k]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("small fields follow the heat equation") {
  const SpectralBasis basis(8);
  const auto u = SpectralField::basis(3, 8, 1e-6);
  const auto b = apply_drift(u, basis);
  CHECK(b.galerkin_coeffs.coeff(3) / u.coeff(3) == doctest::Approx(-eigenvalue(3)).epsilon(1e-9));
  CHECK(std::abs(b.galerkin_coeffs.coeff(1)) < 1e-15);
  CHECK(apply_drift(SpectralField(8), basis).dual_norm == 0.0);
}

TEST_CASE("monotonicity gap is non-positive") {
  const SpectralBasis basis(16);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto u = random_field(16, 2.0, 30, 2 * i);
    const auto v = random_field(16, 2.0, 30, 2 * i + 1);
    CHECK(monotonicity_gap(u, v, basis) <= 1e-13);
  }
  CHECK(monotonicity_gap(SpectralField(16), SpectralField(16), basis) == 0.0);
}

TEST_CASE("dual norm stays below pi/2 and can exceed sqrt(pi/2)") {
  const std::size_t n = 32;
  const SpectralBasis basis(n);
  for (std::uint64_t i = 0; i < 50; ++i) {
    CHECK(apply_drift(random_field(n, 50.0, 12, i), basis).dual_norm < oracle::pi / 2);
  }
  // A steep profile pushes arctan(u') towards +-pi/2 on most of [0,1].
  const double d = apply_drift(SpectralField::basis(1, n, 10.0), basis).dual_norm;
  CHECK(d > std::sqrt(oracle::pi / 2));
  CHECK(d < oracle::pi / 2);
}

TEST_CASE("V pairing is non-positive and agrees with the coefficient form for small fields") {
  const SpectralBasis basis(16);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto u = random_field(16, 0.05, 40, i);
    const double p = lyapunov_pairing_V(u, basis);
    CHECK(p <= 0.0);
    CHECK(lyapunov_pairing_coefficients(u, basis) == doctest::Approx(p).epsilon(1e-8));
  }
  // For u = a e1 the pointwise integral is computable by Simpson.
  const double a = 0.7;
  const auto u = SpectralField::basis(1, 16, a);
  const double expected = -oracle::simpson([&](double x) {
    const double up = a * std::sqrt(2.0) * oracle::pi * std::cos(oracle::pi * x);
    const double upp = -a * std::sqrt(2.0) * oracle::pi * oracle::pi * std::sin(oracle::pi * x);
    return upp * upp / (1.0 + up * up);
  });
  CHECK(lyapunov_pairing_V(u, basis) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("hemicontinuity probe is Lipschitz in lambda with the stated modulus") {
  const SpectralBasis basis(8);
  const auto u = random_field(8, 1.0, 50, 0);
  const auto v = random_field(8, 1.0, 50, 1);
  const auto w = random_field(8, 1.0, 50, 2);
  std::vector<double> lambdas;
  for (int i = 0; i <= 200; ++i) lambdas.push_back(-1.0 + 0.01 * i);
  const auto probe = hemicontinuity_probe(u, v, w, lambdas, basis);
  REQUIRE(probe.size() == lambdas.size());
  const double modulus = hemicontinuity_modulus(v, w);
  CHECK(modulus > 0.0);
  CHECK(max_adjacent_jump(probe) <= modulus * 0.01 * (1 + 1e-12));
  CHECK(probe[100] == doctest::Approx(pairing_H(apply_drift(u, basis), w)).epsilon(1e-12));
}
