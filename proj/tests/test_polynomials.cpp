#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "specband/polynomials.hpp"
#include "specband/spectrum.hpp"
#include "test_support.hpp"

using namespace specband;

TEST(Polynomials, LaplacianIsChebyshevU) {
  const auto J = fixtures::laplacian();
  for (double th : {0.3, 1.1, 2.0, 2.9}) {
    const auto p = poly_recurrence(J, 2 * std::cos(th), 40);
    for (std::size_t n = 0; n <= 40; ++n)
      EXPECT_NEAR(p.values[n], std::sin((n + 1) * th) / std::sin(th), 1e-11) << n;
  }
}

TEST(Polynomials, FirstStep) {
  std::mt19937_64 rng(41);
  for (std::size_t q : {1u, 2u, 3u}) {
    const auto J = fixtures::random_operator(q, rng);
    for (double x : {-2.0, 0.1, 3.7}) {
      const auto p = poly_recurrence(J, x, 1);
      EXPECT_EQ(p.values[0], 1.0);
      EXPECT_NEAR(p.values[1], (x - J.b()[0]) / J.a()[0], 1e-15);
    }
  }
}

TEST(Polynomials, SshAtZero) {
  const auto p = poly_recurrence(fixtures::ssh(), 0.0, 4).values;
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_EQ(p[2], -0.5);
  EXPECT_EQ(p[3], 0.0);
  EXPECT_EQ(p[4], 0.25);
}

TEST(Polynomials, RecurrenceMatchesTransferEntry) {
  std::mt19937_64 rng(42);
  const auto J = fixtures::random_operator(3, rng);
  for (double x : {-1.7, 0.4, 2.2}) {
    const auto p = poly_recurrence(J, x, 12);
    for (std::size_t n = 0; n <= 12; ++n)
      EXPECT_NEAR(p.values[n], transfer_matrix(J, n, x).m11, 1e-10 * std::max(1.0, std::abs(p.values[n])));
  }
}

TEST(Polynomials, Rho) {
  const MonodromyData lap(fixtures::laplacian());
  EXPECT_NEAR(rho(lap, 3, 0.0), -1.0, 1e-15);
  EXPECT_NEAR(rho(lap, 2, 0.7), 0.7, 1e-15);
  EXPECT_NEAR(rho(lap, 7, 2.0), 7.0, 1e-12);
  EXPECT_NEAR(rho(lap, 7, -2.0), 7.0, 1e-12);
  EXPECT_NEAR(rho(lap, 6, -2.0), -6.0, 1e-12);
  EXPECT_EQ(rho(lap, 0, 0.3), 0.0);
  EXPECT_EQ(rho(lap, 1, 0.3), 1.0);

  std::mt19937_64 rng(43);
  const auto J = fixtures::random_operator(3, rng);
  const MonodromyData M(J);
  const auto B = band_structure(M);
  for (int i = 0; i < 50; ++i) {
    const double x = fixtures::random_band_interior(B, rng, 1e-2);
    const double th = theta(M, B, x);
    for (std::size_t ell : {2u, 5u, 11u}) EXPECT_NEAR(rho(M, ell, x), std::sin(ell * th) / std::sin(th), 1e-9);
  }
}

TEST(Polynomials, ClosedFormSpecialCases) {
  std::mt19937_64 rng(44);
  const auto J = fixtures::random_operator(3, rng);
  const MonodromyData M(J);
  const auto B = band_structure(M);
  const double x = 0.5 * (B.bands[1].lo + B.bands[1].hi);
  EXPECT_EQ(poly_closed_form(M, x, 0), 1.0);
  const double t11 = M.t11(x), d = M.delta(x);
  // n = 2q: p = t11 rho_2 - rho_1.
  EXPECT_NEAR(poly_closed_form(M, x, 6), t11 * d - 1.0, 1e-12);
  EXPECT_THROW(poly_closed_form(M, B.edges.back() + 1.0, 4), Error);
}

TEST(Polynomials, ClosedFormMatchesRecurrence) {
  std::mt19937_64 rng(45);
  for (std::size_t q : {1u, 2u, 3u, 4u}) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto J = fixtures::random_operator(q, rng);
      const MonodromyData M(J);
      const auto B = band_structure(M);
      for (int i = 0; i < 50; ++i) {
        const double x = fixtures::random_band_interior(B, rng);
        const auto p = poly_recurrence(J, x, 10 * q);
        for (std::size_t n = 0; n <= 10 * q; ++n)
          ASSERT_NEAR(poly_closed_form(M, x, n), p.values[n], 1e-8 * std::max(1.0, std::abs(p.values[n])));
      }
    }
  }
}

TEST(Polynomials, LinearGrowthOnBands) {
  std::mt19937_64 rng(46);
  for (std::size_t q : {2u, 3u}) {
    const auto J = fixtures::random_operator(q, rng);
    const MonodromyData M(J);
    const auto B = band_structure(M);
    double c_small = 0.0, c_large = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double x = fixtures::random_band_interior(B, rng, 0.0);
      const auto p = poly_recurrence(J, x, 500).values;
      for (std::size_t n = 0; n <= 500; ++n) {
        const double ratio = std::abs(p[n]) / static_cast<double>(n + 1);
        (n <= 50 ? c_small : c_large) = std::max(n <= 50 ? c_small : c_large, ratio);
      }
    }
    // The per-site constant does not grow with n.
    EXPECT_LE(c_large, 2.0 * c_small);
  }
}

TEST(Polynomials, GeometricDecayAtEdgeState) {
  const auto p = poly_recurrence(fixtures::ssh(), 0.0, 200).values;
  EXPECT_NEAR(std::pow(std::abs(p[200]), 1.0 / 200.0), std::sqrt(0.5), 1e-12);
  for (std::size_t s = 1; s < 100; ++s) EXPECT_NEAR(p[2 * s] / p[2 * s - 2], -0.5, 1e-15);
}
