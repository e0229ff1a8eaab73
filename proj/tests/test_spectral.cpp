#include <doctest.h>

#include <cmath>

#include "curveflow/sampling.hpp"
#include "curveflow/spectral_space.hpp"
#include "oracles.hpp"

using namespace curveflow;

TEST_CASE("eigenvalues and basis norms") {
  CHECK(eigenvalue(1) == doctest::Approx(oracle::pi * oracle::pi));
  for (std::size_t k : {1u, 3u, 7u}) {
    const auto e = SpectralField::basis(k, 8, 1.0);
    CHECK(norm_H(e) == doctest::Approx(1.0));
    CHECK(norm_V(e) == doctest::Approx(k * oracle::pi));
    CHECK(norm_Vstar(e) == doctest::Approx(1.0 / (k * oracle::pi)));
  }
}

TEST_CASE("field construction validates its input") {
  CHECK_THROWS_AS(SpectralField(0), std::invalid_argument);
  CHECK_THROWS_AS(SpectralField(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(SpectralField(std::vector<double>{1.0, NAN}), std::invalid_argument);
  CHECK_THROWS_AS(SpectralField::basis(5, 4), std::invalid_argument);
  CHECK_THROWS_AS(SpectralField(2) + SpectralField(3), std::invalid_argument);
}

TEST_CASE("point evaluation matches the series and rejects points outside [0,1]") {
  const auto u = random_field(12, 1.0, 3, 0);
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    CHECK(eval(u, x) == doctest::Approx(oracle::value(u, x)).epsilon(1e-13));
    CHECK(eval_deriv(u, x) == doctest::Approx(oracle::deriv(u, x)).epsilon(1e-13));
  }
  CHECK(eval(u, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval(u, -0.01), std::domain_error);
  CHECK_THROWS_AS(eval_deriv(u, 1.5), std::domain_error);
}

TEST_CASE("W11 norm of e1 has the closed form 2 sqrt2 / pi + 2 sqrt2") {
  const SpectralBasis basis(16);
  const double expected = 2.0 * std::sqrt(2.0) / oracle::pi + 2.0 * std::sqrt(2.0);
  CHECK(norm_W11(SpectralField::basis(1, 16), basis) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(expected == doctest::Approx(3.7288).epsilon(1e-4));
}

TEST_CASE("norms agree with dense Simpson integration") {
  const std::size_t n = 10;
  const SpectralBasis basis(n);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto u = random_field(n, 1.0, 11, i);
    const double h2 = oracle::simpson([&](double x) { return std::pow(oracle::value(u, x), 2); });
    const double v2 = oracle::simpson([&](double x) { return std::pow(oracle::deriv(u, x), 2); });
    const double w11 = oracle::simpson(
        [&](double x) { return std::abs(oracle::value(u, x)) + std::abs(oracle::deriv(u, x)); },
        200000);
    CHECK(norm_H(u) * norm_H(u) == doctest::Approx(h2).epsilon(1e-10));
    CHECK(norm_V(u) * norm_V(u) == doctest::Approx(v2).epsilon(1e-10));
    // |u| and |u'| have kinks, where per-panel Gauss rules lose their order;
    // the default rule is accurate to O(h^2) and refinement closes the gap.
    CHECK(norm_W11(u, basis) == doctest::Approx(w11).epsilon(1e-3));
    const SpectralBasis fine(n, QuadratureRule::composite_gauss_legendre(2048));
    CHECK(norm_W11(u, fine) == doctest::Approx(w11).epsilon(1e-6));
  }
}

TEST_CASE("Poincare ordering of the three norms") {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto u = random_field(16, 1.0, 5, i);
    CHECK(oracle::pi * norm_Vstar(u) <= norm_H(u) * (1 + 1e-14));
    CHECK(norm_H(u) <= norm_V(u) / oracle::pi * (1 + 1e-14));
  }
}

TEST_CASE("projection of x(1-x) gives 4 sqrt2 / (k pi)^3 on odd modes") {
  const auto u = project([](double x) { return x * (1.0 - x); }, SpectralBasis(16));
  for (std::size_t k = 1; k <= 16; ++k) {
    const double kp = k * oracle::pi;
    const double exact = k % 2 ? 4.0 * std::sqrt(2.0) / (kp * kp * kp) : 0.0;
    CHECK(u.coeff(k) == doctest::Approx(exact).epsilon(1e-12).scale(1e-3));
  }
}

TEST_CASE("projection reproduces Galerkin fields and rejects non-Dirichlet data") {
  const auto u = random_field(8, 1.0, 9, 1);
  const auto back = project([&](double x) { return oracle::value(u, x); }, SpectralBasis(8));
  for (std::size_t k = 0; k < 8; ++k) CHECK(back[k] == doctest::Approx(u[k]).epsilon(1e-12));
  CHECK_THROWS_AS(project([](double x) { return 1.0 + x; }, SpectralBasis(8)),
                  std::invalid_argument);
  // A perturbation below the boundary tolerance is accepted.
  CHECK_NOTHROW(project([](double x) { return x * (1 - x) + 1e-12; }, SpectralBasis(8)));
}

TEST_CASE("quadrature rules integrate polynomials of degree 7 exactly per panel") {
  const auto rule = QuadratureRule::composite_gauss_legendre(3);
  CHECK(rule.size() == 12);
  CHECK(rule.id == "gauss-legendre-4x3");
  double s0 = 0, s7 = 0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    s0 += rule.weights[j];
    s7 += rule.weights[j] * std::pow(rule.nodes[j], 7);
  }
  CHECK(s0 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s7 == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
  CHECK(QuadratureRule::for_dimension(5).size() == 4 * 8 * 5);
  CHECK_THROWS_AS(QuadratureRule::composite_gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("resized is the orthogonal projection P_n") {
  const auto u = random_field(8, 1.0, 2, 0);
  const auto p = u.resized(4);
  CHECK(p.dim() == 4);
  CHECK(norm_H(p) <= norm_H(u));
  CHECK(p.resized(8).coeff(5) == 0.0);
  CHECK(p[3] == u[3]);
}

TEST_CASE("gradient sup estimates") {
  const auto e1 = SpectralField::basis(1, 8);
  CHECK(deriv_sup_sampled(e1, 512) == doctest::Approx(std::sqrt(2.0) * oracle::pi));
  CHECK(deriv_sup_bound(e1) == doctest::Approx(std::sqrt(2.0) * oracle::pi));
  const auto u = random_field(8, 1.0, 4, 4);
  CHECK(deriv_sup_sampled(u, 512) <= deriv_sup_bound(u) * (1 + 1e-14));
}

TEST_CASE("JSON and CSV serialization") {
  const auto u = random_field(5, 1.0, 1, 7);
  CHECK(field_from_json(to_json(u)) == u);
  CHECK_THROWS_AS(field_from_json(nlohmann::json::array()), std::invalid_argument);
  CHECK_THROWS_AS(field_from_json(nlohmann::json{1, "x"}), std::invalid_argument);
  const auto rows = to_csv_rows(SpectralField::basis(2, 3, 0.5));
  CHECK(rows == "1,0\n2,0.5\n3,0\n");
}
