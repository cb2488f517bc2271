#include "spherepd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "spherepd/specfun.hpp"

namespace spherepd::kernels {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSmooth = std::numeric_limits<int>::max();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Fritsch-Butland slopes for a shape-preserving cubic Hermite interpolant.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), del(n - 1), d(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    del[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = del[0];
    return d;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (del[k - 1] * del[k] <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
  }
  auto edge = [](double h0, double h1, double m0, double m1) {
    double s = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (s * m0 <= 0.0) return 0.0;
    if (m0 * m1 <= 0.0 && std::abs(s) > 3.0 * std::abs(m0)) s = 3.0 * m0;
    return s;
  };
  d[0] = edge(h[0], h[1], del[0], del[1]);
  d[n - 1] = edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  return d;
}

double eval_tabulated(const Tabulated& tab, double support_end, double t) {
  const auto& x = tab.nodes;
  const auto& y = tab.values;
  if (t >= support_end) return 0.0;
  if (t < x.front() || t > x.back()) {
    throw std::domain_error("tabulated kernel: extrapolation at t = " + std::to_string(t));
  }
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t k = (it == x.begin()) ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  if (k + 1 >= x.size()) k = x.size() - 2;
  const double h = x[k + 1] - x[k];
  const double s = (t - x[k]) / h;
  if (tab.interpolation == Interpolation::Linear) return y[k] + s * (y[k + 1] - y[k]);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y[k] + (s3 - 2 * s2 + s) * h * tab.slopes[k] + (-2 * s3 + 3 * s2) * y[k + 1] +
         (s3 - s2) * h * tab.slopes[k + 1];
}

double sinc_factor(double t, int d) {
  if (d == 1) return 1.0;
  const double s = (t == 0.0) ? 1.0 : std::sin(t) / t;
  return std::pow(s, d - 1);
}

}  // namespace

Dimension::Dimension(int d) : d_(d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
}

KernelSpec::KernelSpec(KernelVariant v, double support_end, int continuity)
    : v_(std::move(v)), support_end_(support_end), continuity_(continuity) {}

KernelSpec KernelSpec::truncated_power(double theta, double delta) {
  if (!(theta > 0.0)) throw std::invalid_argument("trunc-power: theta must be positive");
  if (!(delta >= 0.0)) throw std::invalid_argument("trunc-power: delta must be >= 0");
  const int cls = delta == 0.0 ? 0 : std::max(0, static_cast<int>(std::ceil(delta)) - 1);
  return KernelSpec(TruncatedPower{theta, delta}, theta, cls);
}

KernelSpec KernelSpec::tabulated(std::vector<double> nodes, std::vector<double> values, Interpolation interp) {
  if (nodes.size() < 2 || nodes.size() != values.size()) {
    throw std::invalid_argument("tabulated: need >= 2 nodes and matching values");
  }
  if (nodes.front() < 0.0) throw std::invalid_argument("tabulated: nodes must be nonnegative");
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    if (!(nodes[k + 1] > nodes[k])) throw std::invalid_argument("tabulated: nodes must increase strictly");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("tabulated: values must be finite");
  }
  // Support ends at the node following the last nonzero value.
  double support = nodes.front();
  for (std::size_t k = values.size(); k-- > 0;) {
    if (values[k] != 0.0) {
      support = (k + 1 < nodes.size()) ? nodes[k + 1] : std::numeric_limits<double>::infinity();
      break;
    }
  }
  Tabulated tab{std::move(nodes), std::move(values), interp, {}};
  if (interp == Interpolation::MonotoneCubic) tab.slopes = pchip_slopes(tab.nodes, tab.values);
  if (std::isinf(support)) support = tab.nodes.back();
  const int cls = interp == Interpolation::Linear ? 0 : 1;
  return KernelSpec(std::move(tab), support, cls);
}

KernelSpec KernelSpec::gegenbauer_sum(double lambda, std::vector<double> coefficients) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("gegenbauer-sum: lambda must be >= 0");
  if (coefficients.empty()) throw std::invalid_argument("gegenbauer-sum: need at least one coefficient");
  return KernelSpec(GegenbauerSum{lambda, std::move(coefficients)}, kPi, kSmooth);
}

KernelSpec KernelSpec::gaussian(double scale, double cutoff) {
  if (!(scale > 0.0) || !(cutoff > 0.0)) throw std::invalid_argument("gaussian: scale and cutoff must be positive");
  return KernelSpec(Gaussian{scale, cutoff}, cutoff, 0);
}

KernelSpec KernelSpec::cosine() { return gegenbauer_sum(0.5, {0.0, 1.0}); }

KernelSpec KernelSpec::constant(double c) { return gegenbauer_sum(0.5, {c}); }

KernelSpec KernelSpec::zero() { return tabulated({0.0, kPi}, {0.0, 0.0}, Interpolation::Linear); }

double KernelSpec::operator()(double t) const {
  if (!(t >= 0.0)) throw std::domain_error("kernel: argument must be nonnegative");
  return std::visit(
      Overloaded{
          [&](const TruncatedPower& k) {
            if (t >= k.theta) return 0.0;
            return k.delta == 0.0 ? 1.0 : std::pow(k.theta - t, k.delta);
          },
          [&](const Tabulated& k) { return eval_tabulated(k, support_end_, t); },
          [&](const SincPower& k) { return (*k.inner)(t) * sinc_factor(t, k.d); },
          [&](const Scaled& k) { return (*k.inner)(t / k.theta); },
          [&](const GegenbauerSum& k) {
            if (t > kPi) return 0.0;
            std::vector<double> r(k.coefficients.size());
            specfun::gegenbauer_normalized_sequence(k.lambda, std::cos(t), r);
            double s = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) s += k.coefficients[i] * r[i];
            return s;
          },
          [&](const Gaussian& k) { return t < k.cutoff ? std::exp(-(t / k.scale) * (t / k.scale)) : 0.0; },
      },
      v_);
}

std::string KernelSpec::kind() const {
  return std::visit(Overloaded{
                        [](const TruncatedPower&) { return std::string("trunc-power"); },
                        [](const Tabulated&) { return std::string("tabulated"); },
                        [](const SincPower&) { return std::string("sinc-power"); },
                        [](const Scaled&) { return std::string("scaled"); },
                        [](const GegenbauerSum&) { return std::string("gegenbauer-sum"); },
                        [](const Gaussian&) { return std::string("gaussian"); },
                    },
                    v_);
}

std::optional<EndpointForm> KernelSpec::endpoint_form() const {
  return std::visit(
      Overloaded{
          [](const TruncatedPower& k) -> std::optional<EndpointForm> {
            if (k.delta == 0.0) return std::nullopt;
            return EndpointForm{k.theta, k.delta, [](double) { return 1.0; }};
          },
          [](const Tabulated&) -> std::optional<EndpointForm> { return std::nullopt; },
          [](const SincPower& k) -> std::optional<EndpointForm> {
            auto inner = k.inner->endpoint_form();
            if (!inner) return std::nullopt;
            const int d = k.d;
            auto smooth = inner->smooth;
            return EndpointForm{inner->end, inner->exponent,
                                [smooth, d](double t) { return smooth(t) * sinc_factor(t, d); }};
          },
          [](const Scaled& k) -> std::optional<EndpointForm> {
            auto inner = k.inner->endpoint_form();
            if (!inner) return std::nullopt;
            const double s = k.theta;
            const double factor = std::pow(s, -inner->exponent);
            auto smooth = inner->smooth;
            return EndpointForm{s * inner->end, inner->exponent,
                                [smooth, s, factor](double t) { return factor * smooth(t / s); }};
          },
          [](const GegenbauerSum&) -> std::optional<EndpointForm> { return std::nullopt; },
          [](const Gaussian&) -> std::optional<EndpointForm> { return std::nullopt; },
      },
      v_);
}

std::vector<double> KernelSpec::breakpoints() const {
  std::vector<double> out;
  std::visit(Overloaded{
                 [&](const Tabulated& k) {
                   for (double x : k.nodes) {
                     if (x > 0.0 && x < support_end_) out.push_back(x);
                   }
                 },
                 [&](const SincPower& k) { out = k.inner->breakpoints(); },
                 [&](const Scaled& k) {
                   for (double x : k.inner->breakpoints()) out.push_back(x * k.theta);
                 },
                 [](const auto&) {},
             },
             v_);
  return out;
}

bool KernelSpec::is_zero() const {
  return std::visit(Overloaded{
                        [](const TruncatedPower&) { return false; },
                        [](const Tabulated& k) {
                          return std::all_of(k.values.begin(), k.values.end(), [](double v) { return v == 0.0; });
                        },
                        [](const SincPower& k) { return k.inner->is_zero(); },
                        [](const Scaled& k) { return k.inner->is_zero(); },
                        [](const GegenbauerSum& k) {
                          return std::all_of(k.coefficients.begin(), k.coefficients.end(),
                                             [](double v) { return v == 0.0; });
                        },
                        [](const Gaussian&) { return false; },
                    },
                    v_);
}

KernelSpec scale_kernel(const KernelSpec& g, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("scale_kernel: theta must lie in (0, 1]");
  return KernelSpec(Scaled{std::make_shared<const KernelSpec>(g), theta}, theta * g.support_end(),
                    g.continuity_class());
}

KernelSpec sinc_power_transform(const KernelSpec& g, int d) {
  if (d < 1) throw std::invalid_argument("sinc_power_transform: d must be >= 1");
  return KernelSpec(SincPower{std::make_shared<const KernelSpec>(g), d}, g.support_end(), g.continuity_class());
}

quad::VectorResult integrate_kernel(const KernelSpec& g, double lo, double hi, const quad::VectorIntegrand& factor,
                                    std::size_t dim, const quad::Options& opt, std::span<const double> abs_tols) {
  quad::VectorResult total;
  total.value.assign(dim, 0.0);
  total.abs_error.assign(dim, 0.0);
  total.converged = true;
  const double upper = std::min(hi, g.support_end());
  if (!(upper > lo) || g.is_zero()) return total;

  std::vector<double> edges{lo};
  for (double x : g.breakpoints()) {
    if (x > lo && x < upper) edges.push_back(x);
  }
  edges.push_back(upper);
  const auto form = g.endpoint_form();
  const bool use_form = form && upper >= form->end && form->exponent != 0.0;

  std::vector<double> tol(dim, opt.abs_tol);
  if (!abs_tols.empty()) tol.assign(abs_tols.begin(), abs_tols.end());
  std::vector<double> seg_tol(dim);
  std::vector<double> scratch;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    for (std::size_t c = 0; c < dim; ++c) seg_tol[c] = tol[c] * (b - a) / (upper - lo);
    quad::VectorResult r;
    if (i + 2 == edges.size() && use_form) {
      const auto& smooth = form->smooth;
      const quad::VectorIntegrand f = [&](double t, std::span<double> out) {
        factor(t, out);
        const double s = smooth(t);
        for (auto& x : out) x *= s;
      };
      r = quad::integrate_vector(f, dim, a, b, quad::SingularWeight{0.0, form->exponent}, opt, seg_tol);
    } else {
      const quad::VectorIntegrand f = [&](double t, std::span<double> out) {
        factor(t, out);
        const double s = g(t);
        for (auto& x : out) x *= s;
      };
      r = quad::integrate_vector(f, dim, a, b, quad::SingularWeight{}, opt, seg_tol);
    }
    for (std::size_t c = 0; c < dim; ++c) {
      total.value[c] += r.value[c];
      total.abs_error[c] += r.abs_error[c];
    }
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  }
  return total;
}

namespace {

// integral_0^end (end - u)^exponent g(u) basis(u) du with the weight removed
// analytically when g is smooth up to `end`.
quad::Result weighted_moment(const KernelSpec& g, double end, double exponent,
                             const std::function<double(double)>& basis, const quad::Options& opt) {
  if (!(end > 0.0)) return quad::Result{0.0, 0.0, 0, true};
  const bool inside = g.support_end() < end;
  if (inside || exponent == 0.0) {
    const quad::VectorIntegrand f = [&](double u, std::span<double> out) {
      out[0] = basis(u) * (exponent == 0.0 ? 1.0 : std::pow(end - u, exponent));
    };
    const auto r = integrate_kernel(g, 0.0, end, f, 1, opt);
    return quad::Result{r.value[0], r.abs_error[0], r.evaluations, r.converged};
  }
  // Breakpoints below `end` are handled piecewise; the final piece carries
  // the (end - u)^exponent weight exactly.
  std::vector<double> edges{0.0};
  for (double x : g.breakpoints()) {
    if (x < end) edges.push_back(x);
  }
  edges.push_back(end);
  quad::Result total{0.0, 0.0, 0, true};
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i], b = edges[i + 1];
    quad::Options o = opt;
    o.abs_tol = opt.abs_tol * (b - a) / end;
    quad::Result r;
    if (i + 2 == edges.size()) {
      r = quad::integrate_singular([&](double u) { return g(u) * basis(u); }, a, b, quad::SingularWeight{0.0, exponent}, o);
    } else {
      r = quad::integrate([&](double u) { return g(u) * basis(u) * std::pow(end - u, exponent); }, a, b, o);
    }
    total.value += r.value;
    total.abs_error += r.abs_error;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  }
  return total;
}

}  // namespace

LiftCheck fractional_lift_check(const KernelSpec& g, double delta1, double delta2, double theta, int n,
                                const Dimension& dim) {
  const double a = delta1 - delta2 - 1.0;
  const double b = delta2;
  if (!(a > -1.0)) throw std::invalid_argument("fractional_lift_check: need delta1 - delta2 - 1 > -1");
  if (!(b > -1.0)) throw std::invalid_argument("fractional_lift_check: need delta2 > -1");
  if (!(theta > 0.0)) throw std::invalid_argument("fractional_lift_check: theta must be positive");
  if (n < 0) throw std::invalid_argument("fractional_lift_check: negative degree");
  LiftCheck out;
  if (g.is_zero()) {
    out.converged = true;
    return out;
  }
  const double lambda = dim.lambda();
  auto basis = [n, lambda](double u) {
    const double c = std::cos(u);
    const double p = lambda == 0.0 ? std::cos(n * u) : specfun::gegenbauer(n, lambda, c);
    return lambda == 0.0 ? p : p * std::pow(std::sin(u), 2.0 * lambda);
  };

  quad::Options inner;
  inner.abs_tol = 1e-16;
  inner.rel_tol = 1e-11;
  // Shallower grading keeps the nested quadrature affordable; the innermost
  // panel error estimate still certifies the tolerance.
  inner.grading_depth = 34;
  inner.frequency = std::max(1.0, static_cast<double>(n));
  const auto lhs = weighted_moment(g, theta, delta1, basis, inner);

  bool ok = lhs.converged;
  // Inner moments only need to be accurate on the scale of the result.
  quad::Options nested = inner;
  nested.abs_tol = 1e-13 * std::max(std::abs(lhs.value), 1e-300);
  nested.rel_tol = 1e-11;
  auto inner_moment = [&](double t) {
    const auto r = weighted_moment(g, t, b, basis, nested);
    ok = ok && r.converged;
    return r.value;
  };
  quad::Options outer = inner;
  outer.abs_tol = 1e-12 * std::max(std::abs(lhs.value), 1e-300);
  outer.rel_tol = 1e-10;
  const auto iterated = quad::integrate_singular(inner_moment, 0.0, theta, quad::SingularWeight{0.0, a}, outer);
  const double beta = std::exp(std::lgamma(b + 1.0) + std::lgamma(a + 1.0) - std::lgamma(a + b + 2.0));
  out.lhs = lhs.value;
  out.rhs = iterated.value / beta;
  out.residual = std::abs(out.lhs - out.rhs);
  out.converged = ok && iterated.converged;
  return out;
}

}  // namespace spherepd::kernels
