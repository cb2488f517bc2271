#pragma once

// Immutable isotropic kernel descriptions g(t), t = geodesic or Euclidean
// distance, plus the transforms used to build new kernels from old ones.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spherepd/quadrature.hpp"

namespace spherepd::kernels {

/// Sphere S^d or R^d with lambda = (d - 1) / 2.
class Dimension {
 public:
  explicit Dimension(int d);
  int d() const { return d_; }
  double lambda() const { return 0.5 * (d_ - 1); }
  /// lambda is a positive integer iff d is odd and at least 3.
  bool integer_lambda() const { return d_ >= 3 && d_ % 2 == 1; }

 private:
  int d_;
};

enum class Interpolation { Linear, MonotoneCubic };

class KernelSpec;

/// (theta - t)_+^delta; delta = 0 is the indicator of [0, theta).
struct TruncatedPower {
  double theta = 1.0;
  double delta = 0.0;
};

struct Tabulated {
  std::vector<double> nodes;
  std::vector<double> values;
  Interpolation interpolation = Interpolation::MonotoneCubic;
  std::vector<double> slopes;  // Hermite slopes; empty for linear
};

/// g(t) (sin t / t)^{d-1}.
struct SincPower {
  std::shared_ptr<const KernelSpec> inner;
  int d = 1;
};

/// g(t / theta).
struct Scaled {
  std::shared_ptr<const KernelSpec> inner;
  double theta = 1.0;
};

/// sum_k c_k R_k^lambda(cos t) on [0, pi]; zero beyond pi. lambda = 0 uses
/// cos(k t).
struct GegenbauerSum {
  double lambda = 0.5;
  std::vector<double> coefficients;
};

/// exp(-(t / scale)^2) for t < cutoff, zero beyond.
struct Gaussian {
  double scale = 1.0;
  double cutoff = 1.0;
};

using KernelVariant = std::variant<TruncatedPower, Tabulated, SincPower, Scaled, GegenbauerSum, Gaussian>;

/// g(t) = (end - t)^exponent * smooth(t) on [0, end], smooth being smooth.
struct EndpointForm {
  double end = 0.0;
  double exponent = 0.0;
  std::function<double(double)> smooth;
};

class KernelSpec {
 public:
  static KernelSpec truncated_power(double theta, double delta);
  static KernelSpec tabulated(std::vector<double> nodes, std::vector<double> values,
                              Interpolation interp = Interpolation::MonotoneCubic);
  static KernelSpec gegenbauer_sum(double lambda, std::vector<double> coefficients);
  static KernelSpec gaussian(double scale, double cutoff);
  /// g = cos t.
  static KernelSpec cosine();
  /// g = c on [0, pi].
  static KernelSpec constant(double c);
  /// g = 0 (tabulated zeros on [0, pi]).
  static KernelSpec zero();

  /// Throws std::domain_error for t < 0 or tabulated extrapolation inside
  /// the support.
  double operator()(double t) const;

  double support_end() const { return support_end_; }
  int continuity_class() const { return continuity_; }
  const KernelVariant& variant() const { return v_; }
  std::string kind() const;

  /// Present when the kernel has an algebraic zero at support_end().
  std::optional<EndpointForm> endpoint_form() const;
  /// Interior points of (0, support_end()) where the kernel loses smoothness.
  std::vector<double> breakpoints() const;
  /// True when the kernel vanishes identically.
  bool is_zero() const;

 private:
  KernelSpec(KernelVariant v, double support_end, int continuity);
  friend KernelSpec scale_kernel(const KernelSpec&, double);
  friend KernelSpec sinc_power_transform(const KernelSpec&, int);

  KernelVariant v_;
  double support_end_;
  int continuity_;
};

/// Scaled(g, theta), theta in (0, 1]; support becomes theta * support.
KernelSpec scale_kernel(const KernelSpec& g, double theta);

/// SincPower(g, d); support unchanged.
KernelSpec sinc_power_transform(const KernelSpec& g, int d);

/// Integrates g(t) * factor_c(t) over [lo, min(hi, support_end)] for every
/// component c, splitting at breakpoints and removing the algebraic zero at
/// the support end through the endpoint form.
quad::VectorResult integrate_kernel(const KernelSpec& g, double lo, double hi,
                                    const quad::VectorIntegrand& factor, std::size_t dim,
                                    const quad::Options& opt, std::span<const double> abs_tols = {});

struct LiftCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  bool converged = false;
};

/// Beta-function identity relating (theta-u)^{delta1} moments to iterated
/// (delta2, delta1-delta2-1) moments of h(u) = g(u) C_n^lambda(cos u) sin^{2 lambda} u.
LiftCheck fractional_lift_check(const KernelSpec& g, double delta1, double delta2, double theta, int n,
                                const Dimension& dim);

}  // namespace spherepd::kernels
