#include "spherepd/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "spherepd/specfun.hpp"

namespace spherepd::decomp {

namespace {

using boost::multiprecision::cpp_rational;

constexpr int kExactLimit = 30;

// Coefficients of R_n(cos t) cos^{2 lambda}(t/2) in R_{2j}(cos t/2).
// Multiplying by cos^2(t/2) lowers the second Jacobi parameter c by one:
//   cos^2(t/2) P_m^{(a,c)} = A P_m^{(a,c-1)} + B P_{m+1}^{(a,c-1)},
//   A = (m + c) / (2m + a + c + 1), B = (m + 1) / (2m + a + c + 1),
// with a = lambda - 1/2. After lambda steps c = -1/2 and the quadratic
// transformation turns P_j^{(a,-1/2)}(cos t) / P_n^{(a,a)}(1) into
// prod_{k=n}^{j-1} (k + lambda + 1/2) / (k + 1) times R_{2j}(cos t/2).
// Every factor is a positive rational; all quantities below are doubled to
// stay integral.
template <class Num>
std::vector<Num> half_angle(int n, int lambda) {
  std::vector<Num> g{Num(1)};
  int two_c = 2 * lambda - 1;
  for (int step = 0; step < lambda; ++step, two_c -= 2) {
    std::vector<Num> next(g.size() + 1, Num(0));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const long m = n + static_cast<long>(i);
      const Num den(4 * m + 2 * lambda + two_c + 1);
      next[i] += g[i] * Num(2 * m + two_c) / den;
      next[i + 1] += g[i] * Num(2 * m + 2) / den;
    }
    g = std::move(next);
  }
  Num scale(1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i > 0) {
      const long k = n + static_cast<long>(i) - 1;
      scale = scale * Num(2 * k + 2 * lambda + 1) / Num(2 * k + 2);
    }
    g[i] *= scale;
  }
  return g;
}

void check_lambda(int lambda) {
  if (lambda < 1) throw std::invalid_argument("lambda must be a positive integer");
}

}  // namespace

HalfAngleCoeffs half_angle_coeffs(int n, int lambda) {
  check_lambda(lambda);
  if (n < 0) throw std::invalid_argument("half_angle_coeffs: negative degree");
  HalfAngleCoeffs out;
  out.n = n;
  out.lambda = lambda;
  if (n + lambda <= kExactLimit) {
    for (const auto& q : half_angle<cpp_rational>(n, lambda)) {
      out.coeffs.push_back(static_cast<double>(q));
      out.exact.push_back(q.str());
    }
  } else {
    for (long double x : half_angle<long double>(n, lambda)) out.coeffs.push_back(static_cast<double>(x));
  }
  return out;
}

double verify_half_angle(int n, int lambda, std::span<const double> t_grid) {
  const auto h = half_angle_coeffs(n, lambda);
  double worst = 0.0;
  for (double t : t_grid) {
    if (t < 0.0 || t > std::numbers::pi) throw std::invalid_argument("verify_half_angle: t outside [0, pi]");
    const double lhs =
        specfun::gegenbauer_normalized(n, lambda, std::cos(t)) * std::pow(std::cos(t / 2), 2.0 * lambda);
    double rhs = 0.0;
    for (int i = 0; i <= lambda; ++i) {
      rhs += h.coeffs[i] * specfun::gegenbauer_normalized(2 * (n + i), lambda, std::cos(t / 2));
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

RefinementResult refinement_check(const KernelSpec& f, int n, double theta, int lambda, int levels) {
  check_lambda(lambda);
  if (n < 0 || levels < 1) throw std::invalid_argument("refinement_check: need n >= 0 and levels >= 1");
  if (!(theta > 0.0 && theta <= std::numbers::pi)) throw std::invalid_argument("refinement_check: theta in (0, pi]");
  if (f.support_end() > 1.0 + 1e-15) throw std::invalid_argument("refinement_check: profile support exceeds [0, 1]");
  RefinementResult r;
  if (f.is_zero()) {
    r.converged = true;
    return r;
  }
  const double two_l = 2.0 * lambda;

  // Chains of half-angle coefficients collapse into weights per final degree.
  std::map<int, double> weights{{n, 1.0}};
  const double gain = std::pow(2.0, two_l + 1.0);
  for (int level = 0; level < levels; ++level) {
    std::map<int, double> next;
    for (const auto& [m, w] : weights) {
      const auto h = half_angle_coeffs(m, lambda);
      for (int i = 0; i <= lambda; ++i) next[2 * (m + i)] += w * gain * h.coeffs[i];
    }
    weights = std::move(next);
  }

  // Substituting t = theta u keeps the profile on [0, 1].
  quad::Options lopt;
  lopt.abs_tol = 1e-300;
  lopt.rel_tol = 1e-12;
  lopt.frequency = std::max(1.0, n * theta);
  lopt.max_evals = 5'000'000;
  const quad::VectorIntegrand lf = [&](double u, std::span<double> out) {
    const double t = theta * u;
    out[0] = theta * specfun::gegenbauer_normalized(n, lambda, std::cos(t)) * std::pow(std::sin(t), two_l);
  };
  const auto left = kernels::integrate_kernel(f, 0.0, 1.0, lf, 1, lopt);
  r.lhs = left.value[0];

  const double theta_l = theta / std::pow(2.0, levels);
  std::vector<int> degrees;
  std::vector<double> w;
  for (const auto& [m, x] : weights) {
    degrees.push_back(m);
    w.push_back(x);
  }
  std::vector<double> tols(degrees.size());
  for (std::size_t c = 0; c < degrees.size(); ++c) {
    tols[c] = 1e-12 * std::abs(r.lhs) / (w[c] * theta_l * static_cast<double>(degrees.size()));
  }
  quad::Options ropt;
  ropt.frequency = std::max(1.0, degrees.back() * theta_l);
  ropt.max_evals = 5'000'000;
  const quad::VectorIntegrand rf = [&](double u, std::span<double> out) {
    const double s = theta_l * u;
    const double weight = std::pow(std::sin(s), two_l);
    for (std::size_t c = 0; c < degrees.size(); ++c) {
      out[c] = specfun::gegenbauer_normalized(degrees[c], lambda, std::cos(s)) * weight;
    }
  };
  const auto right = kernels::integrate_kernel(f, 0.0, 1.0, rf, degrees.size(), ropt, tols);
  double rhs = 0.0;
  for (std::size_t c = 0; c < degrees.size(); ++c) rhs += w[c] * theta_l * right.value[c];
  r.rhs = rhs;
  r.residual = r.lhs != 0.0 ? std::abs(r.lhs - r.rhs) / std::abs(r.lhs) : std::abs(r.rhs);
  r.converged = left.converged && right.converged;
  return r;
}

FEllTable f_ell_coeffs(int lambda, int ell) {
  check_lambda(lambda);
  if (ell < 0 || ell > lambda) throw std::invalid_argument("f_ell_coeffs: need 0 <= ell <= lambda");
  FEllTable t{lambda, 0, {{1.0}}};
  for (int l = 0; l < ell; ++l) {
    std::vector<std::vector<double>> next(l + 2);
    for (int j = 0; j <= l + 1; ++j) next[j].assign((l + 1 - j) / 2 + 1, 0.0);
    for (int j = 0; j <= l; ++j) {
      for (int k = 0; k <= (l - j) / 2; ++k) {
        const double a = t.alpha[j][k];
        const int sin_power = 2 * lambda - 2 * l + j + 2 * k;
        const int cos_power = l - j - 2 * k;
        // d/dt of theta^{-j} f^{(j)}(t/theta) sin^{p-1} t cos^q t.
        next[j + 1][k] += a;
        next[j][k] += (sin_power - 1) * a;
        if (cos_power > 0) next[j][k + 1] -= cos_power * a;
      }
    }
    t.alpha = std::move(next);
    t.ell = l + 1;
  }
  return t;
}

Profile polynomial_profile(std::vector<double> coefficients) {
  return [c = std::move(coefficients)](double u, int order) {
    double s = 0.0;
    for (std::size_t k = c.size(); k-- > static_cast<std::size_t>(order);) {
      double falling = 1.0;
      for (int r = 0; r < order; ++r) falling *= static_cast<double>(k - r);
      s = s * u + c[k] * falling;
    }
    return s;
  };
}

double f_ell_closed_form(const FEllTable& table, const Profile& f, double theta, double t) {
  const double s = std::sin(t), c = std::cos(t);
  double total = 0.0;
  for (int j = 0; j <= table.ell; ++j) {
    double inner = 0.0;
    for (int k = 0; k <= (table.ell - j) / 2; ++k) {
      inner += table.alpha[j][k] * std::pow(s, 2 * table.lambda - 2 * table.ell + j + 2 * k) *
               std::pow(c, table.ell - j - 2 * k);
    }
    total += std::pow(theta, -j) * f(t / theta, j) * inner;
  }
  return total;
}

namespace {

constexpr double kStencil[] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};

class NestedDifference {
 public:
  NestedDifference(const Profile& f, int lambda, double theta) : f_(f), lambda_(lambda), theta_(theta) {}

  double operator()(int level, double t) const {
    if (level == 0) return f_(t / theta_, 0) * std::pow(std::sin(t), 2 * lambda_);
    // Keep every nested stencil on one side of the nearest zero of sin t so
    // that the quotient never divides two roundoff-sized numbers.
    const double r = std::fmod(std::abs(t), std::numbers::pi);
    const double gap = std::min(r, std::numbers::pi - r);
    if (!(gap > 0.0)) throw std::domain_error("verify_f_ell: stencil touches a zero of sin t");
    const double h = std::min(theta_ / 32.0, gap / (12.0 * level));
    const double coarse = derivative(level, t, h);
    const double fine = derivative(level, t, h / 2);
    return (256.0 * fine - coarse) / 255.0;
  }

 private:
  double derivative(int level, double t, double h) const {
    double s = 0.0;
    for (int i = -4; i <= 4; ++i) {
      if (i == 0) continue;
      const double x = t + i * h;
      s += kStencil[i + 4] * (*this)(level - 1, x) / std::sin(x);
    }
    return s / h;
  }

  const Profile& f_;
  int lambda_;
  double theta_;
};

}  // namespace

double verify_f_ell(const Profile& f, int lambda, int ell, double theta, std::span<const double> t_grid) {
  const auto table = f_ell_coeffs(lambda, ell);
  const NestedDifference numeric(f, lambda, theta);
  double worst = 0.0, scale = 1.0;
  for (double t : t_grid) {
    const double exact = f_ell_closed_form(table, f, theta, t);
    scale = std::max(scale, std::abs(exact));
    worst = std::max(worst, std::abs(exact - numeric(ell, t)));
  }
  return worst / scale;
}

void write_half_angle_csv(std::ostream& os, std::span<const HalfAngleCoeffs> tables) {
  os << "n,lambda,j,a_nj\n";
  char buf[96];
  for (const auto& t : tables) {
    for (std::size_t i = 0; i < t.coeffs.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g\n", t.n, t.lambda, t.n + static_cast<int>(i), t.coeffs[i]);
      os << buf;
    }
  }
}

void write_f_ell_csv(std::ostream& os, const FEllTable& table) {
  os << "lambda,ell,j,k,alpha\n";
  for (int j = 0; j <= table.ell; ++j) {
    for (std::size_t k = 0; k < table.alpha[j].size(); ++k) {
      os << table.lambda << ',' << table.ell << ',' << j << ',' << k << ',' << table.alpha[j][k] << '\n';
    }
  }
}

}  // namespace spherepd::decomp
