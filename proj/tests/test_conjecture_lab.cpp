#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spherepd/conjecture_lab.hpp"

using namespace spherepd::lab;

namespace {

constexpr double kPi = std::numbers::pi;

// int_0^theta (theta - t)^2 C_n^1(cos t) sin^2 t dt in closed form, from
// C_n^1(cos t) sin t = sin((n + 1) t).
double three_sphere_cell(int n, double theta) {
  if (n == 0) return 0.5 * (theta * theta * theta / 3.0 - theta / 2.0 + std::sin(2.0 * theta) / 4.0);
  const double a = n, b = n + 2.0;
  return theta / (a * a) - std::sin(a * theta) / (a * a * a) - theta / (b * b) + std::sin(b * theta) / (b * b * b);
}

}  // namespace

TEST(TwoSphereIntegral, MatchesHighPrecisionQuadrature) {
  struct Case {
    int n;
    double theta, delta, expected;
  };
  const Case cases[] = {{0, kPi / 2, 1.5, 0.5025241067783078534},
                        {5, 1.0, 1.5, 0.013191416182705452631},
                        {40, 0.5, 1.5, 4.9658076549242097264e-06},
                        {3, 1.2, 2.3, 0.067520026656875405784},
                        {2, 3.0, 1.5, 0.14828949449265154839}};
  for (const auto& c : cases) {
    const auto r = d2_integral(c.n, c.theta, c.delta);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, c.expected, 1e-10 * std::abs(c.expected)) << c.n << " " << c.theta;
  }
}

TEST(TwoSphereIntegral, SmallThetaMoment) {
  const double theta = 0.2;
  const double moment = 4.0 / 35.0 * std::pow(theta, 3.5);
  const double v = d2_integral(0, theta).value;
  EXPECT_NEAR(v, 0.00040822072576056100334, 1e-15);
  EXPECT_LT(std::abs(v / moment - 1.0), 0.01);
  EXPECT_LT(std::abs(d2_integral(7, 1e-9).value), 1e-30);
  EXPECT_THROW(d2_integral(1, 0.0), std::invalid_argument);
  EXPECT_THROW(d2_integral(1, 1.0, 1.0), std::invalid_argument);
}

TEST(TwoSphereDecomposition, TermsMatchHighPrecisionQuadrature) {
  const auto d = d2_decomposition(1, 0.5);
  EXPECT_TRUE(d.converged);
  EXPECT_NEAR(d.target, 0.0097016523295982264848, 1e-15);
  EXPECT_NEAR(d.principal, 0.1161327723334443452, 1e-13);
  EXPECT_NEAR(d.jacobi_term, 0.20983118751658723751, 1e-13);
  EXPECT_NEAR(d.positive_term, 0.11956948806207149626, 1e-13);
  EXPECT_NEAR(d.legendre_term, 0.41966237503317447501, 1e-13);
  EXPECT_LE(d.identity_residual, 1e-8 * d.max_term());

  const auto e = d2_decomposition(7, 1.2);
  EXPECT_NEAR(e.target, 0.0030487494546071122664, 1e-15);
  EXPECT_NEAR(e.principal, 0.21568328024372022234, 1e-13);
  EXPECT_NEAR(e.jacobi_term, 0.025235898372642010094, 1e-13);
  EXPECT_NEAR(e.positive_term, 0.059882468370146606535, 1e-13);
  EXPECT_NEAR(e.legendre_term, 0.073161687709177801716, 1e-13);
}

TEST(TwoSphereDecomposition, IdentityAndPositiveTermOnGrid) {
  for (int n : {1, 2, 3, 8, 21, 40, 77, 100}) {
    for (double theta = 0.05; theta <= 1.5 + 1e-12; theta += 0.15) {
      const auto d = d2_decomposition(n, theta);
      EXPECT_LE(d.identity_residual, 1e-8 * d.max_term()) << n << " " << theta;
      EXPECT_GE(d.positive_term, -1e-12);
      // The sign of the direct integral agrees with the recombined terms.
      EXPECT_EQ(d2_integral(n, theta).value > 0.0, d.recombined() > 0.0);
    }
  }
  EXPECT_GE(d2_decomposition(40, 0.5).positive_term, 0.0);
  const auto tiny = d2_decomposition(1, 1e-10);
  EXPECT_LT(tiny.max_term(), 1e-14);
  EXPECT_THROW(d2_decomposition(0, 0.5), std::invalid_argument);
  EXPECT_THROW(d2_decomposition(3, 1.6), std::invalid_argument);
}

TEST(TwoSphereDecomposition, LargeDegreeTermsStayAccurate) {
  // n theta = 1e5: the direct target is at its roundoff floor but the terms
  // still reproduce it to a few digits.
  const auto d = d2_decomposition(100000, 1.0);
  EXPECT_TRUE(d.converged);
  const double scaled = 4.0 * 100000.0 * 100001.0 / 3.0 * d.target;
  EXPECT_NEAR(d.recombined(), scaled, 1e-3 * std::abs(scaled));
  EXPECT_GT(d.recombined(), 0.0);
}

TEST(Audits, NamesRoundTrip) {
  for (Inequality id : kAllInequalities) EXPECT_EQ(parse_inequality(to_string(id)), id);
  EXPECT_THROW(parse_inequality("nope"), std::invalid_argument);
}

TEST(Audits, DecompositionBoundsHoldOnModerateGrid) {
  std::vector<GridPoint> grid;
  for (double x : {5.0, 8.0, 20.0, 100.0, 1000.0, 10000.0}) {
    for (double th : {0.05, 0.7, 1.5}) grid.push_back({static_cast<int>(std::ceil(x / th)), th});
  }
  grid.push_back({3, 1.0});  // n theta < 5
  grid.push_back({10, 2.0});  // theta > pi/2
  const auto reports = decomposition_audits(grid);
  ASSERT_EQ(reports.size(), 4u);
  for (const auto& r : reports) {
    EXPECT_TRUE(r.all_pass) << to_string(r.id) << " " << to_json(r).dump();
    EXPECT_EQ(r.skipped(), 2);
    EXPECT_EQ(r.variable_name, "n*theta");
    EXPECT_TRUE(r.rows[grid.size() - 1].skipped);
    EXPECT_FALSE(r.rows[grid.size() - 1].pass);
  }
  // The scaled lower bound never overshoots the directly computed integral.
  for (std::size_t i = 0; i + 2 < grid.size(); ++i) {
    const auto& p = grid[i];
    if (p.n * p.theta > 2000.0) continue;
    const double direct = 4.0 * p.n * (p.n + 1.0) / 3.0 * d2_integral(p.n, p.theta).value / std::pow(p.theta, 1.5);
    EXPECT_GE(direct, reports[3].rows[i].rhs) << p.n << " " << p.theta;
  }
}

TEST(Audits, SingleInequalityMatchesSharedPass) {
  const GridPoint grid[] = {{50, 0.2}, {1000, 1.0}};
  const auto one = bounds_audit(Inequality::LegendreTerm, grid);
  const auto all = decomposition_audits(grid);
  ASSERT_EQ(one.rows.size(), 2u);
  EXPECT_EQ(one.rows[1].lhs, all[1].rows[1].lhs);
  EXPECT_EQ(one.rows[1].rhs, all[1].rows[1].rhs);
}

TEST(Audits, PointwiseAndMomentBoundsHold) {
  for (Inequality id : {Inequality::SmallArgument, Inequality::BesselMoment, Inequality::LegendreBessel,
                        Inequality::JacobiEnvelope, Inequality::LegendreEnvelope}) {
    const auto grid = default_audit_grid(id);
    const auto r = bounds_audit(id, grid);
    EXPECT_TRUE(r.all_pass) << to_string(id) << " " << to_json(r).dump();
    EXPECT_EQ(r.skipped(), 0) << to_string(id);
    EXPECT_GT(r.rows.size(), 10u);
  }
}

TEST(Audits, HypothesisViolationsAreSkipped) {
  const GridPoint small[] = {{0, 0.01}, {3, 0.01}, {3, 0.1}};
  const auto r = bounds_audit(Inequality::SmallArgument, small);
  EXPECT_TRUE(r.rows[0].skipped);
  EXPECT_FALSE(r.rows[1].skipped);
  EXPECT_TRUE(r.rows[2].skipped);
  EXPECT_TRUE(r.all_pass);
  // (n = 3, theta = 0.01): scaled integral above 4/35 - 0.06.
  EXPECT_GT(r.rows[1].lhs, 4.0 / 35.0 - 0.06);

  const GridPoint pts[] = {{1, 0.5}, {5, 0.0}, {5, 2.0}};
  const auto j = bounds_audit(Inequality::JacobiEnvelope, pts);
  EXPECT_EQ(j.skipped(), 3);
  const auto c = bounds_audit(Inequality::LegendreBessel, pts);
  EXPECT_EQ(c.skipped(), 1);
  EXPECT_FALSE(c.rows[1].skipped);  // t = 0 is allowed
}

TEST(MidRange, BesselMomentValues) {
  const auto zero = bessel_moment(0.0);
  EXPECT_NEAR(zero.direct, 4.0 / 35.0, 1e-14);
  EXPECT_NEAR(zero.lower_bound, 4.0 / 35.0, 1e-16);
  struct Case {
    double u, expected;
  };
  const Case cases[] = {{2.0, 0.089263432303952733001},
                        {4.0, 0.039833940600104171507},
                        {10.0, 0.0021859127063085440669},
                        {50.0, 1.4044773063234056240e-05}};
  for (const auto& c : cases) EXPECT_NEAR(bessel_moment(c.u).direct, c.expected, 1e-13) << c.u;
  EXPECT_NEAR(bessel_moment(2.0).lower_bound, 4.0 / 35.0 * (1.0 - 8.0 / 33.0), 1e-15);
  EXPECT_NEAR(bessel_moment(4.0).lower_bound, 4.0 / 35.0 * std::max(1.0 - 32.0 / 33.0, 2.0963 / 64.0), 1e-15);
  EXPECT_NEAR(bessel_moment(10.0).lower_bound, 4.0 / 35.0 * 2.0963e-3, 1e-15);
  EXPECT_GE(bessel_moment(4.0).direct, 4.0 / 35.0 * 2.0963 / 64.0);
}

TEST(MidRange, ChainAndRegime) {
  const auto b = case3_lower_bound(20, 0.05);
  EXPECT_DOUBLE_EQ(b.u, 20.5 * 0.05);
  EXPECT_LT(b.chain, b.scaled_integral);
  EXPECT_GE(b.moment.direct, b.moment.lower_bound);
  EXPECT_NEAR(b.chain, std::sqrt(2.0 / kPi) * b.moment.lower_bound - 0.1711 * 0.05 / (2.0 / 35.0), 1e-15);
  EXPECT_THROW(case3_lower_bound(1, 0.01), std::domain_error);
  EXPECT_THROW(case3_lower_bound(100, 1.0, 50.0), std::domain_error);
}

TEST(MidRange, SmallArgumentMoment) {
  for (double theta : {1e-3, 0.2, 1.0, 3.0}) {
    EXPECT_NEAR(small_argument_moment(theta).value, 4.0 / 35.0 * theta * theta, 1e-12 * theta * theta);
  }
}

TEST(Thresholds, Recomputed) {
  const double a = large_argument_threshold();
  EXPECT_NEAR(a, 3.6959e6, 100.0);
  // Lower bound vanishes exactly at the threshold and is positive beyond it.
  EXPECT_NEAR((1.5 - std::sqrt(2.0)) / a - kScaledConstant * std::pow(a, -1.5), 0.0, 1e-20);
  EXPECT_GT((1.5 - std::sqrt(2.0)) / 3.6959e6 - kScaledConstant * std::pow(3.6959e6, -1.5), 0.0);
  const double theta = recomputed_theta_threshold();
  EXPECT_NEAR(theta, 1.2646e-21, 1e-25);
  EXPECT_NEAR(admissible_theta(3.6959e6), 1.26455e-21, 1e-25);
  EXPECT_GT(theta, kPublishedThetaThreshold);
}

TEST(Sweep, ThreeSphereMatchesClosedForm) {
  SweepConfig cfg;
  cfg.d = 3;
  cfg.delta = 2.0;
  cfg.n_min = 0;
  cfg.n_max = 60;
  for (int k : {1, 5, 20, 40, 63}) cfg.thetas.push_back(k * kPi / 64);
  const auto r = sweep(cfg);
  ASSERT_EQ(r.cells.size(), 61u * 5u);
  EXPECT_TRUE(r.converged);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.indeterminate, 0u);
  EXPECT_EQ(r.guaranteed, r.cells.size());
  for (const auto& c : r.cells) {
    const double expected = three_sphere_cell(c.n, c.theta);
    EXPECT_NEAR(c.value, expected, 1e-9 * std::abs(expected) + 1e-18) << c.n << " " << c.theta;
    EXPECT_GT(c.value, 10.0 * c.abs_error);
  }
  EXPECT_GT(r.min_error_ratio, 10.0);
}

TEST(Sweep, TwoSphereSmallThetaLabels) {
  SweepConfig cfg;
  cfg.d = 2;
  cfg.delta = 1.5;
  cfg.n_max = 500;
  cfg.thetas = {1e-22, 1e-12, 1e-6, 1e-3};
  const auto r = sweep(cfg);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.indeterminate, 0u);
  EXPECT_EQ(r.guaranteed, 501u);  // only the 1e-22 row
  EXPECT_NEAR(r.guarantee_theta, recomputed_theta_threshold(), 0.0);
  for (const auto& c : r.cells) {
    EXPECT_EQ(c.guaranteed, c.theta < 1e-21);
    EXPECT_EQ(c.status, CellStatus::Positive);
  }
  // Agrees with the single-cell integral.
  EXPECT_NEAR(r.cells[3 * 501 + 250].value, d2_integral(250, 1e-3).value, 1e-10 * r.cells[3 * 501 + 250].value);
}

TEST(Sweep, HigherOddDimensionsAndDeterminism) {
  for (int d : {5, 7}) {
    SweepConfig cfg;
    cfg.d = d;
    cfg.delta = 0.5 * (d + 1);
    cfg.n_max = 40;
    cfg.thetas = {0.3, 1.0, 2.5, 3.1};
    const auto one = sweep(cfg, 1);
    const auto many = sweep(cfg, 3);
    EXPECT_TRUE(one.failures.empty()) << d;
    ASSERT_EQ(one.cells.size(), many.cells.size());
    for (std::size_t i = 0; i < one.cells.size(); ++i) EXPECT_EQ(one.cells[i].value, many.cells[i].value);
  }
}

TEST(Sweep, EmptyRangeAndValidation) {
  SweepConfig cfg;
  cfg.d = 3;
  cfg.delta = 2.0;
  cfg.n_min = 5;
  cfg.n_max = 4;
  cfg.thetas = {1.0};
  const auto r = sweep(cfg);
  EXPECT_TRUE(r.cells.empty());
  EXPECT_EQ(sweep_summary_json(r)["min_value"], nullptr);
  cfg.d = 4;
  EXPECT_THROW(sweep(cfg), std::invalid_argument);
  cfg.d = 3;
  cfg.delta = 1.5;
  EXPECT_THROW(sweep(cfg), std::invalid_argument);
}

TEST(Export, SweepAndAuditFormats) {
  SweepConfig cfg;
  cfg.d = 3;
  cfg.delta = 2.0;
  cfg.n_max = 2;
  cfg.thetas = {0.5, 1.0};
  const auto r = sweep(cfg);
  std::ostringstream csv, plot;
  write_sweep_csv(csv, r);
  write_sweep_plot_csv(plot, r);
  const std::string rows = csv.str(), lines = plot.str();
  EXPECT_EQ(rows.substr(0, rows.find('\n')), "d,delta,n,theta,value,abs_error,status,guaranteed");
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 7);
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 3);
  const auto j = sweep_summary_json(r);
  EXPECT_TRUE(j.contains("min_value"));
  EXPECT_TRUE(j["failures"].is_array());
  EXPECT_EQ(j["argmin"]["theta"], 0.5);

  const GridPoint pts[] = {{10, 0.3}, {1, 0.1}};
  const BoundAuditReport reports[] = {bounds_audit(Inequality::LegendreEnvelope, pts)};
  std::ostringstream a;
  write_audit_csv(a, reports);
  const std::string audit = a.str();
  EXPECT_EQ(audit.substr(0, audit.find('\n')), "inequality,n,theta,variable,lhs,rhs,margin,pass,skipped");
  EXPECT_NE(audit.find("legendre-envelope,10,0.29999999999999999"), std::string::npos);
  const auto aj = to_json(reports[0]);
  EXPECT_EQ(aj["variable"], "t");
  EXPECT_EQ(aj["violations"], 0);
}
