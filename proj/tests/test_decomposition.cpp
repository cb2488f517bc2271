#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "spherepd/decomposition.hpp"

using namespace spherepd::decomp;
using spherepd::kernels::KernelSpec;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> uniform_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
  return g;
}

}  // namespace

TEST(HalfAngle, MatchesSymbolicExpansion) {
  struct Case {
    int n, lambda;
    std::vector<std::string> exact;
  };
  const Case cases[] = {{0, 1, {"1/4", "3/4"}},
                        {1, 1, {"3/8", "5/8"}},
                        {3, 2, {"7/40", "1/2", "13/40"}},
                        {2, 3, {"7/128", "189/640", "143/320", "13/64"}}};
  for (const auto& c : cases) {
    const auto h = half_angle_coeffs(c.n, c.lambda);
    EXPECT_EQ(h.exact, c.exact) << "n=" << c.n << " lambda=" << c.lambda;
  }
  EXPECT_EQ(half_angle_coeffs(0, 1).at(0), 0.25);
  EXPECT_EQ(half_angle_coeffs(0, 1).at(1), 0.75);
}

TEST(HalfAngle, PositiveAndSumToOne) {
  for (int lambda = 1; lambda <= 3; ++lambda) {
    for (int n = 0; n <= 50; ++n) {
      const auto h = half_angle_coeffs(n, lambda);
      ASSERT_EQ(h.coeffs.size(), static_cast<std::size_t>(lambda + 1));
      double sum = 0.0;
      for (double a : h.coeffs) {
        EXPECT_GT(a, 0.0) << "n=" << n << " lambda=" << lambda;
        sum += a;
      }
      EXPECT_NEAR(sum, 1.0, 1e-14);
    }
  }
}

TEST(HalfAngle, FloatingPathAgreesWithRationalPath) {
  // n + lambda = 30 is the last exact case; n + lambda = 31 uses long double.
  const auto exact = half_angle_coeffs(28, 2);
  const auto floating = half_angle_coeffs(29, 2);
  EXPECT_FALSE(exact.exact.empty());
  EXPECT_TRUE(floating.exact.empty());
  double sum = 0.0;
  for (double a : floating.coeffs) sum += a;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  const auto grid = uniform_grid(0.0, kPi, 101);
  EXPECT_LE(verify_half_angle(29, 2, grid), 1e-12);
  EXPECT_LE(verify_half_angle(400, 3, grid), 1e-12);
}

TEST(HalfAngle, IdentityResidual) {
  const auto grid = uniform_grid(0.0, kPi, 101);
  EXPECT_LE(verify_half_angle(0, 1, grid), 1e-12);
  EXPECT_LE(verify_half_angle(3, 2, grid), 1e-10);
  for (int lambda = 1; lambda <= 3; ++lambda) {
    for (int n = 0; n <= 50; n += 7) EXPECT_LE(verify_half_angle(n, lambda, grid), 1e-9) << n << " " << lambda;
  }
  const double zero[] = {0.0};
  EXPECT_LE(verify_half_angle(5, 2, zero), 1e-15);
  const double pi[] = {kPi};
  EXPECT_LE(verify_half_angle(5, 2, pi), 1e-10);
}

TEST(Refinement, IndicatorProfile) {
  const auto r = refinement_check(KernelSpec::truncated_power(1.0, 0.0), 0, 1.0, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-8);
  // integral_0^1 sin^2 t dt
  EXPECT_NEAR(r.lhs, 0.5 - std::sin(2.0) / 4, 1e-13);
}

TEST(Refinement, PowerProfile) {
  const auto r = refinement_check(KernelSpec::truncated_power(1.0, 2.0), 2, 0.5, 1);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-8);
  for (int lambda : {2, 3}) {
    for (int n : {0, 5, 40}) {
      const auto q = refinement_check(KernelSpec::truncated_power(1.0, 1.5), n, 2.7, lambda);
      EXPECT_LE(q.residual, 1e-8) << "n=" << n << " lambda=" << lambda;
    }
  }
}

TEST(Refinement, ZeroProfile) {
  const auto r = refinement_check(KernelSpec::zero(), 3, 1.0, 2);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_THROW(refinement_check(KernelSpec::truncated_power(2.0, 1.0), 0, 1.0, 1), std::invalid_argument);
}

TEST(Refinement, IteratedTwiceMatchesDoubleSum) {
  const auto f = KernelSpec::truncated_power(1.0, 2.0);
  const auto once = refinement_check(f, 3, 2.0, 2, 1);
  const auto twice = refinement_check(f, 3, 2.0, 2, 2);
  const auto thrice = refinement_check(f, 3, 2.0, 2, 3);
  EXPECT_NEAR(once.lhs, twice.lhs, 1e-15);
  EXPECT_LE(std::abs(twice.rhs - once.rhs), 1e-7 * std::abs(once.lhs));
  EXPECT_LE(twice.residual, 1e-7);
  EXPECT_LE(thrice.residual, 1e-7);
}

TEST(FEll, BaseCaseAndProducts) {
  const auto t1 = f_ell_coeffs(1, 1);
  EXPECT_EQ(t1.at(0, 0), 1.0);
  EXPECT_EQ(t1.at(1, 0), 1.0);
  for (int lambda = 1; lambda <= 6; ++lambda) {
    double product = 1.0;
    for (int ell = 1; ell <= lambda; ++ell) {
      product *= 2.0 * lambda - 2.0 * ell + 1.0;
      const auto t = f_ell_coeffs(lambda, ell);
      EXPECT_EQ(t.at(0, 0), product) << lambda << " " << ell;
      EXPECT_EQ(t.at(ell, 0), 1.0);
    }
  }
  const auto t2 = f_ell_coeffs(2, 2);
  EXPECT_EQ(t2.at(0, 0) + t2.at(1, 0), 8.0);
}

TEST(FEll, RecursionsAndTelescoping) {
  for (int lambda = 2; lambda <= 6; ++lambda) {
    for (int ell = 1; ell < lambda; ++ell) {
      const auto a = f_ell_coeffs(lambda, ell);
      const auto b = f_ell_coeffs(lambda, ell + 1);
      EXPECT_EQ(b.at(1, 0), a.at(0, 0) + 2.0 * (lambda - ell) * a.at(1, 0));
      EXPECT_EQ(b.at(1, 0) + b.at(0, 0), 2.0 * (lambda - ell) * (a.at(1, 0) + a.at(0, 0)));
    }
    const auto top = f_ell_coeffs(lambda, lambda);
    double double_factorial = 1.0;
    for (int k = 2; k <= 2 * lambda; k += 2) double_factorial *= k;
    EXPECT_EQ(top.at(0, 0) + top.at(1, 0), double_factorial);
  }
  EXPECT_THROW(f_ell_coeffs(2, 3), std::invalid_argument);
}

TEST(FEll, ClosedFormMatchesSymbolicDerivative) {
  const auto f = polynomial_profile({0, 0, 0, 1, -3, 3, -1});  // u^3 (1-u)^3
  const auto t = f_ell_coeffs(3, 3);
  EXPECT_NEAR(f_ell_closed_form(t, f, 0.4, 0.1), 0.53411450723514536903, 1e-13);
  EXPECT_NEAR(f_ell_closed_form(t, f, 0.4, 0.25), -1.2244301714334710875, 1e-13);
  EXPECT_NEAR(f_ell_closed_form(t, f, 0.4, 0.37), 1.0361197946382709099, 1e-13);
  const auto g = polynomial_profile({0, 0, 1});
  EXPECT_NEAR(f_ell_closed_form(f_ell_coeffs(2, 2), g, 0.4, 0.3), 7.7779294450530492426, 1e-12);
}

TEST(FEll, FiniteDifferenceOracle) {
  const auto f = polynomial_profile({0, 0, 0, 1, -3, 3, -1});
  std::vector<double> grid;
  for (int i = 0; i < 401; ++i) grid.push_back(0.4 * (i + 0.5) / 401);
  EXPECT_LE(verify_f_ell(f, 3, 3, 0.4, grid), 1e-6);
  EXPECT_LE(verify_f_ell(f, 2, 1, 0.4, grid), 1e-6);
  EXPECT_LE(verify_f_ell(polynomial_profile({1, -2, 1}), 2, 2, 1.3, grid), 1e-6);
  const double bad[] = {0.0};
  EXPECT_THROW(verify_f_ell(f, 3, 2, 0.4, bad), std::domain_error);
}

TEST(Export, CsvColumns) {
  const HalfAngleCoeffs tables[] = {half_angle_coeffs(0, 1), half_angle_coeffs(1, 1)};
  std::ostringstream os;
  write_half_angle_csv(os, tables);
  EXPECT_EQ(os.str(), "n,lambda,j,a_nj\n0,1,0,0.25\n0,1,1,0.75\n1,1,1,0.375\n1,1,2,0.625\n");
  std::ostringstream fe;
  write_f_ell_csv(fe, f_ell_coeffs(1, 1));
  EXPECT_EQ(fe.str(), "lambda,ell,j,k,alpha\n1,1,0,0,1\n1,1,1,0,1\n");
}
