#pragma once

// Positivity criteria for isotropic kernels: Gegenbauer coefficients on the
// sphere, the radial Fourier (Hankel) transform on R^d, and Gram matrices of
// random point sets.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spherepd/kernels.hpp"
#include "spherepd/quadrature.hpp"

namespace spherepd::pd {

using kernels::Dimension;
using kernels::KernelSpec;

/// R_n^lambda(cos t); lambda = 0 gives cos(n t).
double zonal(int n, double lambda, double t);

/// Squared norm h_n of C_n^lambda(cos t) in L^2(sin^{2 lambda} t dt) on [0, pi]
/// (cos(n t) for lambda = 0).
double gegenbauer_norm_squared(int n, double lambda);

struct GegenbauerSeries {
  Dimension dim{1};
  /// a_n = integral_0^pi g(t) C_n^lambda(cos t) sin^{2 lambda} t dt
  /// (cos(n t) in place of C_n^lambda for d = 1).
  std::vector<double> coefficients;
  std::vector<double> per_coeff_error;
  /// Sum over n <= nmax of (a_n / h_n) C_n^lambda(1): the truncated expansion
  /// of g at t = 0.
  double weighted_partial_sum = 0.0;
  /// Tolerance the coefficients were computed against (per-coefficient error
  /// target is tol / 10).
  double tol = 0.0;
  bool converged = false;

  int nmax() const { return static_cast<int>(coefficients.size()) - 1; }
};

/// Default sign tolerance 1e-10 * max(|a_0|, |g(0)|).
double default_coefficient_tolerance(const KernelSpec& g, const Dimension& d);

/// tol <= 0 selects default_coefficient_tolerance.
GegenbauerSeries gegenbauer_coefficients(const KernelSpec& g, const Dimension& d, int nmax, double tol = 0.0);

enum class Status { PD, PSD, NotPD, Inconclusive };
std::string to_string(Status s);

struct Witness {
  enum class Kind { CoefficientIndex, Frequency, PointSet };
  Kind kind = Kind::CoefficientIndex;
  int index = -1;
  double frequency = 0.0;
  /// Value at the witness: a_n, the transform, or the Gram eigenvalue.
  double value = 0.0;
  Eigen::MatrixXd points;  // one point per row
  Eigen::VectorXd eigenvector;
};

struct Margins {
  double min_value = 0.0;
  double max_value = 0.0;
  /// Index (coefficients), frequency (transform) or trial of min_value.
  double argmin = 0.0;
  int negative = 0;
  int positive_even = 0;
  int positive_odd = 0;
  int positive = 0;
  int indeterminate = 0;
};

struct PDVerdict {
  Status status = Status::Inconclusive;
  /// True when the verdict rests on finitely many samples (grid or points)
  /// rather than on a coefficient sequence.
  bool sampled = false;
  std::optional<Witness> witness;
  int nmax = -1;
  double tol = 0.0;
  Margins margins;
  std::string note;
};

/// tol <= 0 uses series.tol.
PDVerdict schoenberg_test(const GegenbauerSeries& series, double tol = 0.0);

struct HankelValue {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = false;
};

/// (2 pi)^{d/2} integral_0^inf g(u) j_{(d-2)/2}(xi u) u^{d-1} du with
/// j_a(z) = z^{-a} J_a(z).
HankelValue hankel_transform(const KernelSpec& g, const Dimension& d, double xi, double abs_tol = 1e-12);

/// xi_grid sorted and nonnegative. tol <= 0 selects 1e-9 * |transform at 0|.
/// threads > 1 evaluates grid cells concurrently; the result does not depend
/// on the thread count.
PDVerdict bochner_test(const KernelSpec& g, const Dimension& d, std::span<const double> xi_grid, double tol = 0.0,
                       int threads = 1);

/// Uniform grid of count points on (0, xi_max].
std::vector<double> frequency_grid(double xi_max, int count);

enum class Space { Sphere, Euclidean };

struct PointSet {
  Space space = Space::Sphere;
  int d = 2;
  Eigen::MatrixXd points;  // rows in R^{d+1} (sphere) or R^d
};

/// Normalized standard Gaussian vectors on S^d.
PointSet sample_sphere(int d, int n_points, std::uint64_t seed);
/// Gaussian cloud in R^d with standard deviation `spread` per coordinate.
PointSet sample_euclidean(int d, int n_points, double spread, std::uint64_t seed);

/// Geodesic distance on the sphere, Euclidean norm otherwise.
double distance(const PointSet& ps, int i, int j);
Eigen::MatrixXd gram_matrix(const KernelSpec& g, const PointSet& ps);

struct GramResult {
  double min_eigenvalue = 0.0;
  PDVerdict verdict;
};

/// Minimum Gram eigenvalue over `trials` independent point sets. Euclidean
/// points are spread over the kernel support. NotPD when an eigenvalue falls
/// below -tol * spectral norm.
GramResult gram_oracle(const KernelSpec& g, Space space, int d, int n_points, int trials, std::uint64_t seed,
                       double tol = 1e-8);

struct InheritanceReport {
  PDVerdict sphere;
  PDVerdict euclidean;
  /// False when the Euclidean test passes but the sphere test finds a
  /// negative coefficient.
  bool consistent = true;
  std::string finding;
};

/// Runs bochner_test on xi_grid (empty: 400 points on (0, 100]) and
/// schoenberg_test at the same odd d >= 3.
InheritanceReport inheritance_check(const KernelSpec& g, const Dimension& d, int nmax,
                                    std::span<const double> xi_grid = {}, int threads = 1);

struct ConverseRow {
  int n = 0;
  double theta = 0.0;
  double scaled_moment = 0.0;  // n^{2 lambda + 1} integral of g(t/theta) R_n^lambda sin^{2 lambda}
  double gap = 0.0;            // |scaled_moment - target|
  bool converged = false;
};

struct ConverseTable {
  double x = 0.0;
  /// c_lambda x^{2 lambda + 1} (2 pi)^{-d/2} times the Hankel transform at x.
  double target = 0.0;
  std::vector<ConverseRow> rows;
  bool gaps_decreasing = false;
  std::string note;
};

/// Scaled sphere moments at theta_n = x / n, n in n_list (each theta_n < 1),
/// against their Bessel limit.
ConverseTable converse_check(const KernelSpec& g, const Dimension& d, double x, std::span<const int> n_list);

nlohmann::json to_json(const PDVerdict& v);
nlohmann::json to_json(const ConverseTable& t);
/// Columns n,a_n,error.
void write_series_csv(std::ostream& os, const GegenbauerSeries& s);

}  // namespace spherepd::pd
