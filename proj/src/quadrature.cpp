#include "spherepd/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace spherepd::quad {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxDepth = 50;

// 15-point Kronrod abscissae (positive half, descending) and weights; the
// odd-indexed abscissae are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
    else comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

class Engine {
 public:
  Engine(std::size_t dim, long max_evals)
      : dim_(dim), max_evals_(max_evals), value_(dim), error_(dim, 0.0),
        nodes_(15 * dim), k_(dim), g_(dim), err_(dim), resabs_(dim),
        parent_err_(kMaxDepth + 2, std::vector<double>(dim, 0.0)) {}

  // Integrates g over [lo, hi] with initial panels no wider than max_panel,
  // allowing tol_density[c] absolute error per unit length in component c.
  void run(const VectorIntegrand& g, double lo, double hi, double max_panel,
           const std::vector<double>& tol_density) {
    if (!(hi > lo)) return;
    long panels = 1;
    if (max_panel > 0.0 && std::isfinite(max_panel)) {
      panels = std::max(1L, static_cast<long>(std::ceil((hi - lo) / max_panel)));
    }
    const double h = (hi - lo) / static_cast<double>(panels);
    for (long i = 0; i < panels; ++i) {
      const double a = lo + h * static_cast<double>(i);
      const double b = (i + 1 == panels) ? hi : lo + h * static_cast<double>(i + 1);
      refine(g, a, b, tol_density, 0);
    }
  }

  // Adds a contribution computed outside the Kronrod rule.
  void add(std::span<const double> value, std::span<const double> error, long evals) {
    for (std::size_t c = 0; c < dim_; ++c) {
      value_[c].add(value[c]);
      error_[c] += error[c];
    }
    evals_ += evals;
  }

  std::vector<double> values() const {
    std::vector<double> v(dim_);
    for (std::size_t c = 0; c < dim_; ++c) v[c] = value_[c].value();
    return v;
  }
  const std::vector<double>& errors() const { return error_; }
  long evaluations() const { return evals_; }
  bool exhausted() const { return exhausted_; }

 private:
  void rule(const VectorIntegrand& g, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::span<double> buf(nodes_);
    for (int j = 0; j < 7; ++j) {
      const double dx = half * kXgk[j];
      g(center - dx, buf.subspan(static_cast<std::size_t>(2 * j) * dim_, dim_));
      g(center + dx, buf.subspan(static_cast<std::size_t>(2 * j + 1) * dim_, dim_));
    }
    g(center, buf.subspan(14 * dim_, dim_));
    evals_ += 15;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double fc = nodes_[14 * dim_ + c];
      double k = kWgk[7] * fc;
      double gs = kWg[3] * fc;
      double ra = kWgk[7] * std::abs(fc);
      for (int j = 0; j < 7; ++j) {
        const double s = nodes_[2 * j * dim_ + c] + nodes_[(2 * j + 1) * dim_ + c];
        k += kWgk[j] * s;
        ra += kWgk[j] * (std::abs(nodes_[2 * j * dim_ + c]) + std::abs(nodes_[(2 * j + 1) * dim_ + c]));
        if (j % 2 == 1) gs += kWg[j / 2] * s;
      }
      k_[c] = k * half;
      g_[c] = gs * half;
      resabs_[c] = ra * std::abs(half);
      err_[c] = std::abs(k_[c] - g_[c]);
    }
  }

  // A failing component whose error shrank by less than this factor since
  // the parent panel is treated as roundoff-limited (integrand noise scales
  // linearly with width, while a kink still gains a factor of four).
  static constexpr double kStagnation = 0.4;

  void refine(const VectorIntegrand& g, double lo, double hi, const std::vector<double>& tol_density,
              int depth) {
    rule(g, lo, hi);
    const double width = hi - lo;
    bool accept = depth >= kMaxDepth || exhausted_;
    if (!accept && evals_ + 30 > max_evals_) {
      exhausted_ = true;
      accept = true;
    }
    if (!accept) {
      bool failing = false, progressing = false;
      for (std::size_t c = 0; c < dim_; ++c) {
        const double local = tol_density[c] * width;
        const double floor = 50.0 * kEps * resabs_[c];
        if (err_[c] > local && err_[c] > floor) {
          failing = true;
          if (depth < 3 || err_[c] < kStagnation * parent_err_[depth][c]) progressing = true;
        }
      }
      accept = !failing || !progressing;
    }
    const double mid = 0.5 * (lo + hi);
    if (!accept && (mid <= lo || mid >= hi)) accept = true;
    if (accept) {
      for (std::size_t c = 0; c < dim_; ++c) {
        value_[c].add(k_[c]);
        error_[c] += err_[c];
      }
      return;
    }
    std::copy(err_.begin(), err_.end(), parent_err_[depth + 1].begin());
    refine(g, lo, mid, tol_density, depth + 1);
    refine(g, mid, hi, tol_density, depth + 1);
  }

  std::size_t dim_;
  long max_evals_;
  long evals_ = 0;
  bool exhausted_ = false;
  std::vector<Neumaier> value_;
  std::vector<double> error_;
  std::vector<double> nodes_;
  std::vector<double> k_, g_, err_, resabs_;
  std::vector<std::vector<double>> parent_err_;
};

bool is_half_integer_multiple(double e) {
  const double twice = 2.0 * e;
  return std::floor(twice) == twice;
}

double oscillation_cap(double frequency) {
  if (!(frequency > 0.0)) return std::numeric_limits<double>::infinity();
  return kPi / (2.0 * std::max(frequency, 1.0));
}

// One pass of the piecewise scheme with fixed absolute targets.
VectorResult integrate_pass(const VectorIntegrand& f, std::size_t dim, double a, double b,
                            SingularWeight w, const Options& opt, const std::vector<double>& target) {
  Engine engine(dim, opt.max_evals);
  const double length = b - a;
  const double cap = oscillation_cap(opt.frequency);
  auto share = [&](double piece_length, double param_length) {
    std::vector<double> d(dim);
    for (std::size_t c = 0; c < dim; ++c) d[c] = target[c] * (piece_length / length) / param_length;
    return d;
  };
  auto weight = [&](double t) {
    double v = 1.0;
    if (w.left != 0.0) v *= std::pow(t - a, w.left);
    if (w.right != 0.0) v *= std::pow(b - t, w.right);
    return v;
  };

  const bool left_sing = w.left != 0.0;
  const bool right_sing = w.right != 0.0;
  double piece = 0.5 * length;
  if (opt.frequency > 0.0) piece = std::min(piece, 8.0 * kPi / opt.frequency);
  const double left_end = left_sing ? a + piece : a;
  const double right_start = right_sing ? b - piece : b;

  // Regular middle portion.
  {
    const double lo = left_end;
    const double hi = right_start;
    if (hi > lo) {
      VectorIntegrand g = [&](double t, std::span<double> out) {
        f(t, out);
        if (left_sing || right_sing) {
          const double wt = weight(t);
          for (auto& x : out) x *= wt;
        }
      };
      engine.run(g, lo, hi, cap, share(hi - lo, hi - lo));
    }
  }

  // Singular end piece at endpoint `end` with exponent e, direction sigma
  // (t = end + sigma * u, u in [0, width]); `other` is the exponent at the
  // far endpoint `far`.
  auto end_piece = [&](double end, double sigma, double e, double width, double far, double other) {
    if (!(width > 0.0)) return;
    auto far_weight = [&](double t) { return other == 0.0 ? 1.0 : std::pow(std::abs(far - t), other); };
    if (is_half_integer_multiple(e)) {
      const double smax = std::sqrt(width);
      const double power = 2.0 * e + 1.0;
      VectorIntegrand g = [&](double s, std::span<double> out) {
        const double t = end + sigma * s * s;
        f(t, out);
        const double wt = 2.0 * std::pow(s, power) * far_weight(t);
        for (auto& x : out) x *= wt;
      };
      const double scap = (opt.frequency > 0.0)
                              ? kPi / (2.0 * std::max(2.0 * opt.frequency * smax, 1.0))
                              : std::numeric_limits<double>::infinity();
      engine.run(g, 0.0, smax, scap, share(width, smax));
    } else {
      VectorIntegrand g = [&](double u, std::span<double> out) {
        const double t = end + sigma * u;
        f(t, out);
        const double wt = std::pow(u, e) * far_weight(t);
        for (auto& x : out) x *= wt;
      };
      double hi = width;
      for (int level = 0; level < opt.grading_depth; ++level) {
        const double lo = 0.5 * hi;
        engine.run(g, lo, hi, cap, share(hi - lo, hi - lo));
        hi = lo;
      }
      // Innermost panel [0, hi]: product midpoint rule against u^e, error
      // from the variation of the smooth factor across the panel.
      std::vector<double> f_mid(dim), f_end(dim), f_far(dim), value(dim), err(dim);
      f(end + sigma * 0.5 * hi, f_mid);
      f(end, f_end);
      f(end + sigma * hi, f_far);
      const double scale = std::pow(hi, e + 1.0) / (e + 1.0) * far_weight(end + sigma * 0.5 * hi);
      for (std::size_t c = 0; c < dim; ++c) {
        value[c] = scale * f_mid[c];
        err[c] = std::abs(scale) * (std::abs(f_far[c] - f_mid[c]) + std::abs(f_end[c] - f_mid[c]));
      }
      engine.add(value, err, 3);
    }
  };

  if (left_sing) end_piece(a, 1.0, w.left, left_end - a, b, w.right);
  if (right_sing) end_piece(b, -1.0, w.right, b - right_start, a, w.left);

  VectorResult out;
  out.value = engine.values();
  out.abs_error = engine.errors();
  out.evaluations = engine.evaluations();
  out.converged = !engine.exhausted();
  return out;
}

void validate(double a, double b, SingularWeight w) {
  if (!(b > a)) throw std::invalid_argument("quadrature: require a < b");
  if (!(w.left > -1.0) || !(w.right > -1.0)) {
    throw std::invalid_argument("quadrature: endpoint exponents must exceed -1");
  }
}

}  // namespace

double requested_tolerance(const Options& opt, double value) {
  return std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
}

VectorResult integrate_vector(const VectorIntegrand& f, std::size_t dim, double a, double b,
                              SingularWeight w, const Options& opt, std::span<const double> abs_tols) {
  if (a == b) {
    VectorResult r;
    r.value.assign(dim, 0.0);
    r.abs_error.assign(dim, 0.0);
    r.converged = true;
    return r;
  }
  validate(a, b, w);
  if (!abs_tols.empty() && abs_tols.size() != dim) {
    throw std::invalid_argument("quadrature: abs_tols size mismatch");
  }
  std::vector<double> abs_target(dim, opt.abs_tol);
  if (!abs_tols.empty()) abs_target.assign(abs_tols.begin(), abs_tols.end());

  auto goal = [&](const std::vector<double>& values) {
    std::vector<double> t(dim);
    for (std::size_t c = 0; c < dim; ++c) t[c] = std::max(abs_target[c], opt.rel_tol * std::abs(values[c]));
    return t;
  };
  auto meets = [&](const VectorResult& r) {
    const auto g = goal(r.value);
    for (std::size_t c = 0; c < dim; ++c) {
      if (!(r.abs_error[c] <= g[c])) return false;
    }
    return true;
  };

  std::vector<double> target = abs_target;
  long spent = 0;
  if (opt.rel_tol > 0.0) {
    // Coarse pass to size the relative target.
    Options coarse = opt;
    coarse.max_evals = 0;
    const auto probe = integrate_pass(f, dim, a, b, w, coarse, abs_target);
    spent += probe.evaluations;
    target = goal(probe.value);
  }
  VectorResult result;
  for (int attempt = 0; attempt < 3; ++attempt) {
    result = integrate_pass(f, dim, a, b, w, opt, target);
    spent += result.evaluations;
    if (meets(result) || !result.converged || opt.rel_tol <= 0.0) break;
    const auto next = goal(result.value);
    bool tighter = false;
    for (std::size_t c = 0; c < dim; ++c) {
      if (next[c] < 0.5 * target[c]) tighter = true;
      target[c] = std::min(target[c], next[c]);
    }
    if (!tighter) break;
  }
  result.evaluations = spent;
  result.converged = result.converged && meets(result);
  return result;
}

Result integrate_singular(const Integrand& f, double a, double b, SingularWeight w, const Options& opt) {
  const VectorIntegrand g = [&f](double t, std::span<double> out) { out[0] = f(t); };
  const auto r = integrate_vector(g, 1, a, b, w, opt);
  return Result{r.value[0], r.abs_error[0], r.evaluations, r.converged};
}

Result integrate(const Integrand& f, double a, double b, const Options& opt) {
  return integrate_singular(f, a, b, SingularWeight{}, opt);
}

Result integrate_oscillatory(const Integrand& f, double a, double b, double n, Options opt) {
  if (n < 0.0) throw std::invalid_argument("quadrature: negative frequency");
  opt.frequency = std::max(n, 1.0);
  return integrate(f, a, b, opt);
}

EndpointExpansion endpoint_asymptotic(const DerivativeFn& phi, double a, double b, double exponent,
                                      double n, int v, Endpoint side, const Options& opt) {
  if (!(exponent > 0.0 && exponent < 1.0)) throw std::invalid_argument("endpoint_asymptotic: exponent must lie in (0, 1)");
  if (v < 1) throw std::invalid_argument("endpoint_asymptotic: order must be >= 1");
  if (!(b > a)) throw std::invalid_argument("endpoint_asymptotic: require a < b");
  if (!(n > 0.0)) throw std::invalid_argument("endpoint_asymptotic: N must be positive");
  const bool left = side == Endpoint::Left;
  const double near = left ? a : b;
  const double far = left ? b : a;
  for (int k = 0; k < v; ++k) {
    const double d = phi(far, k);
    if (!(std::abs(d) <= 1e-8)) {
      throw HypothesisViolation("endpoint_asymptotic: derivative of order " + std::to_string(k) +
                                " does not vanish at the opposite endpoint");
    }
  }
  EndpointExpansion out;
  const double sign = left ? 1.0 : -1.0;
  for (int k = 0; k < v; ++k) {
    const double mag = std::exp(std::lgamma(k + exponent) - std::lgamma(k + 1.0) - (k + exponent) * std::log(n));
    const double phase = n * near + sign * 0.5 * exponent * kPi + 0.5 * k * kPi;
    out.value += mag * phi(near, k) * std::polar(1.0, phase);
  }
  SingularWeight w;
  if (left) w.left = exponent - 1.0; else w.right = exponent - 1.0;
  const auto rem = integrate_singular([&](double t) { return std::abs(phi(t, v)); }, a, b, w, opt);
  out.error_bound = std::pow(n, -v) * (rem.value + rem.abs_error);
  return out;
}

}  // namespace spherepd::quad
