#pragma once

// Adaptive Gauss-Kronrod (7/15) integration with algebraic endpoint weights
// and oscillation-aware initial panels.
//
// Every initial panel is refined by local bisection against a share of the
// tolerance proportional to its width, so memory stays O(depth) even when a
// highly oscillatory integrand needs millions of panels.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace spherepd::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  long max_evals = 1'000'000;
  /// Geometric panels (ratio 1/2) laid toward an endpoint whose exponent
  /// is not a multiple of 1/2.
  int grading_depth = 40;
  /// Oscillation scale N; initial panels are at most pi / (2 max(N, 1)) wide.
  /// Zero disables the cap.
  double frequency = 0.0;
};

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  long evaluations = 0;
  bool converged = false;
};

struct VectorResult {
  std::vector<double> value;
  std::vector<double> abs_error;
  long evaluations = 0;
  bool converged = false;
};

/// Exponents of (t - a) and (b - t) multiplying the smooth factor.
struct SingularWeight {
  double left = 0.0;
  double right = 0.0;
};

using Integrand = std::function<double(double)>;
/// Writes every component of the integrand at t into out.
using VectorIntegrand = std::function<void(double t, std::span<double> out)>;

/// Requested tolerance max(abs_tol, rel_tol |value|).
double requested_tolerance(const Options& opt, double value);

Result integrate(const Integrand& f, double a, double b, const Options& opt = {});

/// Same contract as integrate() with opt.frequency replaced by n.
Result integrate_oscillatory(const Integrand& f, double a, double b, double n, Options opt = {});

/// Integrates f(t) (t-a)^left (b-t)^right. Exponents that are multiples of
/// 1/2 are removed exactly by t = a + s^2 or t = b - s^2.
Result integrate_singular(const Integrand& f, double a, double b, SingularWeight w,
                          const Options& opt = {});

/// Component-wise version of integrate_singular; tolerances apply per
/// component, with abs_tols (if non-empty) overriding opt.abs_tol.
VectorResult integrate_vector(const VectorIntegrand& f, std::size_t dim, double a, double b,
                              SingularWeight w, const Options& opt,
                              std::span<const double> abs_tols = {});

/// Raised when the vanishing hypotheses of the endpoint expansion fail.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Endpoint { Left, Right };

/// phi(t, k) returns the k-th derivative of the amplitude at t.
using DerivativeFn = std::function<double(double t, int order)>;

struct EndpointExpansion {
  std::complex<double> value;
  /// N^{-v} * integral of |phi^{(v)}| times the endpoint weight, plus the
  /// quadrature error of that integral.
  double error_bound = 0.0;
};

/// Leading terms of integral_a^b e^{iNt} w(t) phi(t) dt where w is
/// (t-a)^{exponent-1} (Left) or (b-t)^{exponent-1} (Right), 0 < exponent < 1.
/// phi and its derivatives through order v-1 must vanish (to 1e-8) at the
/// opposite endpoint.
EndpointExpansion endpoint_asymptotic(const DerivativeFn& phi, double a, double b, double exponent,
                                      double n, int v, Endpoint side, const Options& opt = {});

}  // namespace spherepd::quad
