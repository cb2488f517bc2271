#include "spherepd/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace spherepd::specfun {

namespace {

void require_unit_interval(double x) {
  if (!(std::abs(x) <= 1.0)) {
    throw std::domain_error("argument outside [-1, 1]: " + std::to_string(x));
  }
}

bool is_negative_integer(double v, int* out) {
  if (v >= 0.0 || std::floor(v) != v) return false;
  *out = static_cast<int>(-v);
  return true;
}

double jacobi_recurrence(int n, double a, double b, double x) {
  if (n == 0) return 1.0;
  double p_prev = 1.0;
  double p = 0.5 * (a - b + (a + b + 2.0) * x);
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    const double a1 = 2.0 * (k + 1) * (k + a + b + 1.0) * s;
    const double a2 = (s + 1.0) * (a * a - b * b);
    const double a3 = s * (s + 1.0) * (s + 2.0);
    const double a4 = 2.0 * (k + a) * (k + b) * (s + 2.0);
    const double next = ((a2 + a3 * x) * p - a4 * p_prev) / a1;
    p_prev = p;
    p = next;
  }
  return p;
}

// Bernoulli polynomials B_2..B_7 for the Stirling difference series.
double bernoulli_poly(int k, double a) {
  const double a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a, a6 = a5 * a, a7 = a6 * a;
  switch (k) {
    case 2: return a2 - a + 1.0 / 6.0;
    case 3: return a3 - 1.5 * a2 + 0.5 * a;
    case 4: return a4 - 2.0 * a3 + a2 - 1.0 / 30.0;
    case 5: return a5 - 2.5 * a4 + (5.0 / 3.0) * a3 - a / 6.0;
    case 6: return a6 - 3.0 * a5 + 2.5 * a4 - 0.5 * a2 + 1.0 / 42.0;
    case 7: return a7 - 3.5 * a6 + 3.5 * a5 - (7.0 / 6.0) * a3 + a / 6.0;
    default: return 0.0;
  }
}

constexpr double kStirlingCutoff = 1000.0;

// Power series of j_alpha, accumulated in extended precision.
double bessel_normalized_series(double alpha, double z) {
  const long double q = -0.25L * static_cast<long double>(z) * z;
  long double term = 1.0L / std::tgamma(static_cast<long double>(alpha) + 1.0L);
  long double sum = term;
  for (int v = 1; v < 500; ++v) {
    term *= q / (static_cast<long double>(v) * (v + alpha));
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum) && v > z) break;
  }
  return static_cast<double>(sum / std::pow(2.0L, static_cast<long double>(alpha)));
}

// Hankel asymptotic expansion; returns false if the series does not
// reach full precision before its terms start growing.
bool bessel_hankel_asymptotic(double alpha, double z, double* out) {
  const double mu = 4.0 * alpha * alpha;
  double p = 0.0, q = 0.0;
  double term = 1.0;  // a_k / z^k
  double last = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int k = 0; k < 200; ++k) {
    const double mag = std::abs(term);
    if (mag > last && k > 2) break;
    // (-1)^{floor(k/2)} sign pattern of P and Q
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) p += sign * term; else q += sign * term;
    if (mag < 1e-17) { converged = true; break; }
    last = mag;
    const double odd = 2.0 * k + 1.0;
    term *= (mu - odd * odd) / (8.0 * (k + 1) * z);
    if (term == 0.0) { converged = true; break; }
  }
  if (!converged) return false;
  const double chi = z - (0.5 * alpha + 0.25) * kPi;
  *out = std::sqrt(2.0 / (kPi * z)) * (p * std::cos(chi) - q * std::sin(chi));
  return true;
}

// Miller backward recurrence normalised by
//   (z/2)^nu = Gamma(nu+1) sum_k (nu+2k) (nu+1)_{k-1}/k! J_{nu+2k}(z).
// Returns j_nu(z) = J_nu(z) / z^nu.
double bessel_normalized_miller(double nu, double z) {
  int top = static_cast<int>(z + 50.0 + 2.0 * std::sqrt(z));
  if (top % 2 != 0) ++top;
  double f_next = 0.0;
  double f = 1e-280;
  double sum = 0.0;
  // weights w_k for even orders 2k: w_0 = 1, w_k = (nu+2k) g_k, g_1 = 1,
  // g_{k+1} = g_k (nu+k)/(k+1). Precompute g up to top/2.
  std::vector<double> g(top / 2 + 2, 0.0);
  g[1] = 1.0;
  for (int k = 1; k + 1 < static_cast<int>(g.size()); ++k) g[k + 1] = g[k] * (nu + k) / (k + 1);
  auto weight = [&](int k) { return k == 0 ? 1.0 : (nu + 2.0 * k) * g[k]; };
  if (top % 2 == 0) sum += weight(top / 2) * f;
  for (int k = top; k >= 1; --k) {
    const double f_prev = 2.0 * (nu + k) / z * f - f_next;
    f_next = f;
    f = f_prev;
    const int order = k - 1;
    if (order % 2 == 0) sum += weight(order / 2) * f;
    if (std::abs(f) > 1e250) {
      f *= 1e-250;
      f_next *= 1e-250;
      sum *= 1e-250;
    }
  }
  return f / (sum * std::pow(2.0, nu) * std::tgamma(nu + 1.0));
}

}  // namespace

double log_gamma_ratio(double x, double a, double b) {
  if (a == b) return 0.0;
  const double lo = x + std::min(a, b);
  if (lo <= 0.0) throw std::domain_error("log_gamma_ratio: nonpositive argument");
  if (lo < kStirlingCutoff) {
    // Shift upward so the asymptotic branch applies, peeling off log terms.
    const int shift = static_cast<int>(std::ceil(kStirlingCutoff - lo));
    if (shift > 0 && std::max(std::abs(a), std::abs(b)) < 50.0) {
      double acc = 0.0;
      for (int j = 0; j < shift; ++j) acc += std::log1p((a - b) / (x + b + j));
      return log_gamma_ratio(x + shift, a, b) - acc;
    }
    return std::lgamma(x + a) - std::lgamma(x + b);
  }
  double s = (a - b) * std::log(x);
  double xp = x;
  for (int k = 1; k <= 6; ++k) {
    const double c = (bernoulli_poly(k + 1, a) - bernoulli_poly(k + 1, b)) / (k * (k + 1.0));
    s += ((k % 2 == 1) ? c : -c) / xp;
    xp *= x;
  }
  return s;
}

double jacobi_at_one(int n, double alpha) {
  if (n == 0) return 1.0;
  if (n <= 2000) {
    double v = 1.0;
    for (int k = 1; k <= n; ++k) v *= (alpha + k) / k;
    return v;
  }
  return std::exp(log_gamma_ratio(n, alpha + 1.0, 1.0) - std::lgamma(alpha + 1.0));
}

double jacobi(const JacobiIndex& idx, double x) {
  require_unit_interval(x);
  const int n = idx.n;
  if (n < 0) throw std::invalid_argument("jacobi: negative degree");
  if (n == 0) return 1.0;
  int l = 0;
  if (is_negative_integer(idx.alpha, &l)) {
    if (l > n) throw std::invalid_argument("jacobi: alpha = -l with l > n is unsupported");
    double factor = 1.0;
    for (int i = 0; i < l; ++i) factor *= (n + idx.beta - i) / (n - i);
    if (factor == 0.0) return 0.0;
    return factor * std::pow(0.5 * (x - 1.0), l) * jacobi(JacobiIndex{n - l, static_cast<double>(l), idx.beta}, x);
  }
  if (is_negative_integer(idx.beta, &l)) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * jacobi(JacobiIndex{n, idx.beta, idx.alpha}, -x);
  }
  if (idx.alpha <= -1.0 || idx.beta <= -1.0) {
    throw std::invalid_argument("jacobi: parameters <= -1 must be negative integers");
  }
  return jacobi_recurrence(n, idx.alpha, idx.beta, x);
}

void jacobi_sequence(double a, double b, double x, std::span<double> out) {
  require_unit_interval(x);
  if (a <= -1.0 || b <= -1.0) throw std::invalid_argument("jacobi_sequence: parameters must exceed -1");
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = 0.5 * (a - b + (a + b + 2.0) * x);
  for (std::size_t kk = 1; kk + 1 < out.size(); ++kk) {
    const double k = static_cast<double>(kk);
    const double s = 2.0 * k + a + b;
    const double a1 = 2.0 * (k + 1) * (k + a + b + 1.0) * s;
    const double a2 = (s + 1.0) * (a * a - b * b);
    const double a3 = s * (s + 1.0) * (s + 2.0);
    const double a4 = 2.0 * (k + a) * (k + b) * (s + 2.0);
    out[kk + 1] = ((a2 + a3 * x) * out[kk] - a4 * out[kk - 1]) / a1;
  }
}

double gegenbauer_at_one(int n, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("gegenbauer_at_one: lambda must be positive");
  if (n == 0) return 1.0;
  if (n <= 2000) {
    double v = 1.0;
    for (int k = 0; k < n; ++k) v *= (k + 2.0 * lambda) / (k + 1.0);
    return v;
  }
  return std::exp(log_gamma_ratio(n, 2.0 * lambda, 1.0) - std::lgamma(2.0 * lambda));
}

void gegenbauer_normalized_sequence(double lambda, double x, std::span<double> out) {
  require_unit_interval(x);
  if (lambda < 0.0) throw std::invalid_argument("gegenbauer: lambda must be nonnegative");
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = x;
  for (std::size_t kk = 1; kk + 1 < out.size(); ++kk) {
    const double k = static_cast<double>(kk);
    out[kk + 1] = (2.0 * (k + lambda) * x * out[kk] - k * out[kk - 1]) / (k + 2.0 * lambda);
  }
}

double gegenbauer_normalized(int n, double lambda, double x) {
  if (n < 0) throw std::invalid_argument("gegenbauer: negative degree");
  require_unit_interval(x);
  if (lambda <= 0.0) throw std::invalid_argument("gegenbauer: lambda must be positive");
  if (n == 0) return 1.0;
  double r_prev = 1.0, r = x;
  for (int k = 1; k < n; ++k) {
    const double next = (2.0 * (k + lambda) * x * r - k * r_prev) / (k + 2.0 * lambda);
    r_prev = r;
    r = next;
  }
  return r;
}

double gegenbauer(int n, double lambda, double x) {
  return gegenbauer_normalized(n, lambda, x) * gegenbauer_at_one(n, lambda);
}

double legendre(int n, double x) {
  require_unit_interval(x);
  if (n < 0) throw std::invalid_argument("legendre: negative degree");
  if (n == 0) return 1.0;
  double p_prev = 1.0, p = x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
    p_prev = p;
    p = next;
  }
  return p;
}

double bessel_j_normalized(double alpha, double z) {
  if (!(alpha > -1.0)) throw std::invalid_argument("bessel: alpha must exceed -1");
  if (!(z >= 0.0)) throw std::domain_error("bessel: negative argument");
  if (z <= 12.0) return bessel_normalized_series(alpha, z);
  double j = 0.0;
  if (z >= 25.0 && bessel_hankel_asymptotic(alpha, z, &j)) return j / std::pow(z, alpha);
  return bessel_normalized_miller(alpha, z);
}

double bessel_j(double alpha, double z) {
  if (!(alpha > -1.0)) throw std::invalid_argument("bessel: alpha must exceed -1");
  if (!(z >= 0.0)) throw std::domain_error("bessel: negative argument");
  if (z == 0.0) {
    if (alpha == 0.0) return 1.0;
    if (alpha > 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  if (z >= 25.0) {
    double j = 0.0;
    if (bessel_hankel_asymptotic(alpha, z, &j)) return j;
  }
  return bessel_j_normalized(alpha, z) * std::pow(z, alpha);
}

std::vector<CosineTerm> cosine_expansion(int n, double lambda) {
  if (n < 0) throw std::invalid_argument("cosine_expansion: negative degree");
  if (!(lambda > 0.0)) throw std::invalid_argument("cosine_expansion: lambda must be positive");
  // c_0 = (lambda)_n / n!, c_{k+1}/c_k = (lambda+k)(n-k) / ((k+1)(lambda+n-k-1)).
  double log_c0 = 0.0;
  for (int i = 0; i < n; ++i) log_c0 += std::log((lambda + i) / (i + 1.0));
  std::vector<double> c(n + 1);
  c[0] = std::exp(log_c0);
  for (int k = 0; k < n; ++k) {
    c[k + 1] = c[k] * (lambda + k) * (n - k) / ((k + 1.0) * (lambda + n - k - 1.0));
  }
  std::vector<CosineTerm> terms;
  for (int k = 0; 2 * k <= n; ++k) {
    const int freq = n - 2 * k;
    const double coeff = (freq == 0) ? c[k] : c[k] + c[n - k];
    terms.push_back({freq, coeff});
  }
  return terms;
}

AsymptoticApprox jacobi_bessel_approx(int n, double alpha, double t, double eps) {
  if (n < 1) throw std::invalid_argument("jacobi_bessel_approx: n must be >= 1");
  if (!(alpha > -0.5)) throw std::invalid_argument("jacobi_bessel_approx: alpha must exceed -1/2");
  if (t < 0.0) throw std::domain_error("jacobi_bessel_approx: t must be nonnegative");
  if (t > kPi - eps) throw std::domain_error("jacobi_bessel_approx: t within eps of pi");
  AsymptoticApprox out;
  out.shifted_degree = n + alpha + 0.5;
  const double ratio = (t == 0.0) ? 1.0 : t / std::sin(t);
  out.value = std::pow(2.0, alpha) * std::tgamma(alpha + 1.0) * std::pow(ratio, alpha + 0.5) *
              bessel_j_normalized(alpha, out.shifted_degree * t);
  if (alpha == 0.0 && t <= 0.5 * kPi) {
    out.error_bound = 0.1711 / n;
    out.certified = true;
  } else {
    out.error_bound = std::numeric_limits<double>::infinity();
  }
  return out;
}

// ---------------------------------------------------------------------------
// LegendreCos

LegendreCos::LegendreCos(int n) : n_(n) {
  if (n < 0) throw std::invalid_argument("LegendreCos: negative degree");
  if (n > kRecurrenceMax) {
    st_n_ = make_stieltjes(n);
    st_prev_ = make_stieltjes(n - 1);
  }
}

LegendreCos::Stieltjes LegendreCos::make_stieltjes(int m) {
  Stieltjes s;
  s.prefactor = 2.0 / std::sqrt(kPi) * std::exp(log_gamma_ratio(m, 1.0, 1.5));
  s.coefficients.reserve(64);
  double c = 1.0;
  for (int k = 0; k < 64; ++k) {
    s.coefficients.push_back(c);
    c *= (k + 0.5) * (k + 0.5) / ((k + 1.0) * (m + 1.5 + k));
  }
  return s;
}

std::complex<double> LegendreCos::stieltjes_phase(int m, double t) {
  constexpr long double two_pi = 6.283185307179586476925286766559L;
  const long double phase = std::fmod((m + 0.5L) * static_cast<long double>(t), two_pi) -
                            0.785398163397448309615660845819876L;
  // The reduced phase is O(1), so double trigonometry loses nothing further.
  const double reduced = static_cast<double>(phase);
  return {std::cos(reduced), std::sin(reduced)};
}

double LegendreCos::stieltjes_eval(const Stieltjes& s, std::complex<double> e, double sin_t, double cos_t) {
  const std::complex<double> rot(sin_t, -cos_t);  // exp(i (t - pi/2))
  const double rho = 1.0 / (2.0 * sin_t);
  double scale = std::sqrt(rho);
  double sum = 0.0;
  const double first = s.coefficients[0] * scale;
  double last = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.coefficients.size(); ++k) {
    const double mag = s.coefficients[k] * scale;
    if (mag > last) break;
    sum += mag * e.real();
    if (mag < 1e-17 * first) break;
    last = mag;
    e *= rot;
    scale *= rho;
  }
  return s.prefactor * sum;
}

LegendreCosValues LegendreCos::recurrence(double t) const {
  LegendreCosValues v;
  const double x = std::cos(t);
  const double sh = std::sin(0.5 * t);
  const double u = 2.0 * sh * sh;  // 1 - cos t
  if (n_ == 0) {
    v.p = 1.0;
    return v;
  }
  double p_prev = 1.0, p = x;
  double d_prev = 0.0, d = u;
  double dp_prev = 0.0, dp = 1.0;  // P_k'(x)
  for (int k = 1; k < n_; ++k) {
    const double a = 2.0 * k + 1.0;
    const double p_next = (a * x * p - k * p_prev) / (k + 1.0);
    const double d_next = (a * u + a * x * d - k * d_prev) / (k + 1.0);
    const double dp_next = dp_prev + a * p;
    p_prev = p; p = p_next;
    d_prev = d; d = d_next;
    dp_prev = dp; dp = dp_next;
  }
  v.p = p;
  v.p_prev = p_prev;
  v.one_minus_p = d;
  v.jacobi11 = 2.0 * dp / (n_ + 1.0);
  return v;
}

LegendreCosValues LegendreCos::pole_series(double t) const {
  // Series in s = sin^2(t'/2) about the nearer pole t' in {t, pi - t}.
  const bool reflect = t > 0.5 * kPi;
  const double tp = reflect ? kPi - t : t;
  const long double sh = std::sin(0.5L * tp);
  const long double s = sh * sh;
  const int n = n_;
  auto hyper = [s](long double a, long double b, long double c, bool skip_first) {
    long double term = 1.0L, sum = skip_first ? 0.0L : 1.0L, peak = 1.0L;
    for (int k = 1; k < 100000; ++k) {
      term *= (a + k - 1) * (b + k - 1) / ((c + k - 1) * k) * s;
      sum += term;
      peak = std::max(peak, std::fabs(term));
      if (term == 0.0L || (std::fabs(term) < 1e-24L * peak && k > 4)) break;
    }
    return sum;
  };
  const long double p = hyper(-n, n + 1, 1, false);
  const long double p_prev = hyper(-(n - 1), n, 1, false);
  const long double one_minus = -hyper(-n, n + 1, 1, true);
  const long double j11 = n * hyper(1 - n, n + 2, 2, false);
  LegendreCosValues v;
  if (!reflect) {
    v.p = static_cast<double>(p);
    v.p_prev = static_cast<double>(p_prev);
    v.one_minus_p = static_cast<double>(one_minus);
    v.jacobi11 = static_cast<double>(j11);
  } else {
    const double sn = (n % 2 == 0) ? 1.0 : -1.0;
    v.p = sn * static_cast<double>(p);
    v.p_prev = -sn * static_cast<double>(p_prev);
    v.one_minus_p = 1.0 - v.p;
    v.jacobi11 = -sn * static_cast<double>(j11);
  }
  return v;
}

LegendreCosValues LegendreCos::operator()(double t) const {
  if (!(t >= 0.0 && t <= kPi)) throw std::domain_error("LegendreCos: t outside [0, pi]");
  if (n_ <= kRecurrenceMax) return recurrence(t);
  const double st = std::sin(t);
  if (n_ * st < kPoleThreshold) return pole_series(t);
  LegendreCosValues v;
  const double x = std::cos(t);
  // Degree n - 1 has phase (n - 1/2) t - pi/4: one rotation by exp(-i t).
  const std::complex<double> e = stieltjes_phase(n_, t);
  v.p = stieltjes_eval(st_n_, e, st, x);
  v.p_prev = stieltjes_eval(st_prev_, e * std::complex<double>(x, -st), st, x);
  v.one_minus_p = 1.0 - v.p;
  // (1 - x^2) P_n'(x) = n (P_{n-1}(x) - x P_n(x)); P_{n-1}^{(1,1)} = 2 P_n' / (n+1)
  v.jacobi11 = 2.0 * n_ * (v.p_prev - x * v.p) / ((n_ + 1.0) * st * st);
  return v;
}

}  // namespace spherepd::specfun
