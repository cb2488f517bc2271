#pragma once

// Numerical laboratory for the truncated-power positivity question
//   int_0^theta (theta - t)^delta C_n^lambda(cos t) sin^{2 lambda} t dt > 0,
// with the two-sphere (lambda = 1/2, delta = 3/2) treated in detail: the
// four-term integration-by-parts split, audits of the explicit constants
// used to bound each term, and grid sweeps over (n, theta, d, delta).

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spherepd/quadrature.hpp"

namespace spherepd::lab {

// Published constants. Each audit checks the inequality it appears in.
inline constexpr double kJacobiTermConstant = 42.6909;
inline constexpr double kLegendreTermConstant = 92.1237;
inline constexpr double kPrincipalConstant = 30.1067;
inline constexpr double kScaledConstant = 164.9212;
inline constexpr double kLargeArgumentThreshold = 3.6959e6;
inline constexpr double kSmallArgumentLimit = 2.0 / 35.0;
inline constexpr double kLegendreBesselConstant = 0.1711;
inline constexpr double kJacobiEnvelopeConstant = 2.821;
inline constexpr double kMomentTailConstant = 2.0963;
inline constexpr double kPublishedThetaThreshold = 1.2644e-21;

/// int_0^theta (theta - t)^delta P_n(cos t) sin t dt. theta in (0, pi], delta >= 3/2.
quad::Result d2_integral(int n, double theta, double delta = 1.5);

/// With A = int_0^theta (theta - t)^{3/2} P_n(cos t) sin t dt:
///   4 n (n + 1) / 3 * A = principal + jacobi_term + positive_term - legendre_term,
/// where
///   principal     = 2 / (n (n+1)) int (1 - P_n) sqrt(theta - t) cos t / sin^2 t,
///   jacobi_term   = 1 / (2n) int P_{n-1}^{(1,1)} sin t cos t / sqrt(theta - t),
///   positive_term = 1 / (n (n+1)) int (1 - P_n) / (sin t sqrt(theta - t)) >= 0,
///   legendre_term = int P_n sin t / sqrt(theta - t),
/// all over [0, theta] with argument cos t.
struct D2Decomposition {
  int n = 1;
  double theta = 0.0;
  double target = 0.0;
  double principal = 0.0;
  double jacobi_term = 0.0;
  double positive_term = 0.0;
  double legendre_term = 0.0;
  /// |4n(n+1)/3 target - (principal + jacobi_term + positive_term - legendre_term)|.
  double identity_residual = 0.0;
  /// Quadrature error estimates in the order target, principal, jacobi, positive, legendre.
  std::vector<double> abs_error;
  bool converged = false;

  /// principal + jacobi_term + positive_term - legendre_term.
  double recombined() const { return principal + jacobi_term + positive_term - legendre_term; }
  /// Largest magnitude among the scaled target and the four terms.
  double max_term() const;
};

/// All five integrals from one pass over [0, theta]. n >= 1, theta in (0, pi/2].
/// The direct target carries the full cancellation of the oscillation, so for
/// n theta beyond about 1e4 its roundoff floor dominates identity_residual;
/// the four terms stay accurate.
D2Decomposition d2_decomposition(int n, double theta);

enum class Inequality {
  JacobiTerm,        // |jacobi_term| <= C (n theta)^{-2} theta^{3/2}
  LegendreTerm,      // legendre_term <= sqrt2 sin(N theta) (sin theta / theta)^{1/2} theta^{1/2} / n + C (n theta)^{-3/2} theta^{3/2}
  Principal,         // principal >= 3 sqrt(theta) / (2n) - C (n theta)^{-3/2} theta^{3/2}
  Scaled,            // 4n(n+1) theta^{-3/2} A / 3 >= (3/2 - sqrt2) (n theta)^{-1} - C (n theta)^{-3/2}
  SmallArgument,     // theta^{-7/2} A >= 4/35 - 2 n theta when n theta < 2/35
  BesselMoment,      // int_0^1 (1-x)^{3/2} J_0(u x) x dx >= piecewise lower bound
  LegendreBessel,    // |P_n(cos t) - (t / sin t)^{1/2} J_0(N t)| <= 0.1711 / n
  JacobiEnvelope,    // |P_{n-1}^{(1,1)}(cos t)| <= 2.821 pi^{3/2} (n-1)^{-1/2} t^{-3/2}
  LegendreEnvelope,  // |P_n(cos t)| <= (n t)^{-1/2}
};

inline constexpr Inequality kAllInequalities[] = {
    Inequality::JacobiTerm,    Inequality::LegendreTerm,   Inequality::Principal,
    Inequality::Scaled,        Inequality::SmallArgument,  Inequality::BesselMoment,
    Inequality::LegendreBessel, Inequality::JacobiEnvelope, Inequality::LegendreEnvelope};

std::string_view to_string(Inequality id);
/// Accepts the names produced by to_string; throws std::invalid_argument otherwise.
Inequality parse_inequality(std::string_view name);

struct GridPoint {
  int n = 0;
  /// theta, or the evaluation angle t for the pointwise polynomial bounds.
  double theta = 0.0;
};

struct AuditRow {
  int n = 0;
  double theta = 0.0;
  /// The argument the bound is stated in: n theta, (n + 1/2) theta, or t.
  double variable = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// Slack of the inequality: nonnegative exactly when it holds.
  double margin = 0.0;
  bool pass = false;
  /// Hypotheses violated at this point; the row is not evaluated.
  bool skipped = false;
  std::string note;
};

struct BoundAuditReport {
  Inequality id = Inequality::JacobiTerm;
  /// Name of AuditRow::variable ("n*theta", "u", "t").
  std::string variable_name;
  std::vector<AuditRow> rows;
  /// Every evaluated row has margin >= 0.
  bool all_pass = true;

  int violations() const;
  int skipped() const;
};

BoundAuditReport bounds_audit(Inequality id, std::span<const GridPoint> grid);

/// The four bounds on the two-sphere split evaluated from one decomposition
/// per grid point, in the order JacobiTerm, LegendreTerm, Principal, Scaled.
std::vector<BoundAuditReport> decomposition_audits(std::span<const GridPoint> grid);

/// Hypothesis-respecting grid used by the acceptance run. For the
/// decomposition bounds n theta spans [5, 1e7] on a logarithmic scale.
std::vector<GridPoint> default_audit_grid(Inequality id);

/// int_0^theta (1 - t/theta)^{3/2} t dt; equals (4/35) theta^2.
quad::Result small_argument_moment(double theta);

struct BesselMoment {
  double u = 0.0;
  /// (4/35) * (1 - 2u^2/33 for u <= sqrt(33/2); 2.0963 / u^3 for u >= sqrt(12)),
  /// the larger of the two where both apply.
  double lower_bound = 0.0;
  /// int_0^1 (1-x)^{3/2} J_0(u x) x dx by quadrature.
  double direct = 0.0;
  double abs_error = 0.0;
};

BesselMoment bessel_moment(double u);

struct MidRangeBound {
  int n = 0;
  double theta = 0.0;
  /// (n + 1/2) theta.
  double u = 0.0;
  BesselMoment moment;
  /// sqrt(2/pi) * moment.lower_bound - 0.1711 theta / B.
  double chain = 0.0;
  /// theta^{-7/2} int_0^theta (theta - t)^{3/2} P_n(cos t) sin t dt, for comparison.
  double scaled_integral = 0.0;
};

/// Lower bound for the mid-range B <= n theta <= A. Throws std::domain_error
/// outside that range.
MidRangeBound case3_lower_bound(int n, double theta, double large = kLargeArgumentThreshold,
                                double small = kSmallArgumentLimit);

/// (C / (3/2 - sqrt2))^2: the n theta beyond which the scaled lower bound is positive.
double large_argument_threshold(double constant = kScaledConstant);

/// Largest theta for which the mid-range chain stays positive on all of [B, A]:
///   (B / 0.1711) sqrt(2/pi) (4/35) 2.0963 / A^3.
double admissible_theta(double large, double small = kSmallArgumentLimit);

/// admissible_theta with A from large_argument_threshold().
double recomputed_theta_threshold();

struct SweepConfig {
  int d = 2;
  double delta = 1.5;
  int n_min = 0;
  int n_max = -1;
  std::vector<double> thetas;
};

enum class CellStatus { Positive, Indeterminate, Negative };

std::string_view to_string(CellStatus s);

struct SweepCell {
  int n = 0;
  double theta = 0.0;
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = false;
  CellStatus status = CellStatus::Indeterminate;
  /// Positivity here follows from a proved result rather than numerics alone.
  bool guaranteed = false;
};

struct SweepReport {
  SweepConfig config;
  /// Row-major in (theta, n).
  std::vector<SweepCell> cells;
  double min_value = 0.0;
  int argmin_n = -1;
  double argmin_theta = 0.0;
  /// min over cells of value / abs_error (infinite when every error is zero).
  double min_error_ratio = 0.0;
  /// Indices into cells with status Negative.
  std::vector<std::size_t> failures;
  std::size_t indeterminate = 0;
  std::size_t guaranteed = 0;
  /// theta bound below which d = 2 cells are guaranteed (0 when not applicable).
  double guarantee_theta = 0.0;
  bool converged = true;
};

/// int_0^theta (theta - t)^delta C_n^lambda(cos t) sin^{2 lambda} t dt on the
/// grid, lambda = (d - 1) / 2. d in {2, 3, 5, 7}, delta >= (d + 1) / 2. Each
/// theta is one vector quadrature pass over all n; theta values are spread
/// over `threads` workers and results are identical for any thread count.
SweepReport sweep(const SweepConfig& config, int threads = 1);

/// Columns d,delta,n,theta,value,abs_error,status,guaranteed.
void write_sweep_csv(std::ostream& os, const SweepReport& r);
/// Columns theta,min_value (minimum over n).
void write_sweep_plot_csv(std::ostream& os, const SweepReport& r);
/// {min_value, argmin, failures[], ...}.
nlohmann::json sweep_summary_json(const SweepReport& r);

/// Columns inequality,n,theta,variable,lhs,rhs,margin,pass,skipped.
void write_audit_csv(std::ostream& os, std::span<const BoundAuditReport> reports);
nlohmann::json to_json(const BoundAuditReport& r);

}  // namespace spherepd::lab
