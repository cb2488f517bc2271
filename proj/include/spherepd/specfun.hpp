#pragma once

// Orthogonal polynomials and Bessel functions on [-1, 1] / [0, inf).
//
// All routines are pure and reentrant. Argument-domain violations throw
// std::domain_error; unsupported parameter combinations throw
// std::invalid_argument.

#include <complex>
#include <span>
#include <vector>

namespace spherepd::specfun {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Degree and Jacobi parameters of P_n^{(alpha, beta)}.
struct JacobiIndex {
  int n = 0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// P_n^{(alpha,beta)}(x) by forward three-term recurrence.
///
/// alpha, beta > -1 use the recurrence directly. A negative-integer
/// parameter -l with 1 <= l <= n is reduced through
///   P_n^{(-l,b)}(x) = C(n+b,l)/C(n,l) ((x-1)/2)^l P_{n-l}^{(l,b)}(x)
/// and the reflection P_n^{(a,b)}(-x) = (-1)^n P_n^{(b,a)}(x).
double jacobi(const JacobiIndex& idx, double x);
inline double jacobi(int n, double alpha, double beta, double x) {
  return jacobi(JacobiIndex{n, alpha, beta}, x);
}

/// Fills out[k] = P_k^{(alpha,beta)}(x) for k = 0..out.size()-1 (alpha, beta > -1).
void jacobi_sequence(double alpha, double beta, double x, std::span<double> out);

/// P_n^{(alpha,beta)}(1) = C(n+alpha, n).
double jacobi_at_one(int n, double alpha);

/// Raw Gegenbauer polynomial C_n^lambda(x), lambda > 0.
double gegenbauer(int n, double lambda, double x);

/// Normalized Gegenbauer polynomial R_n^lambda(x) = C_n^lambda(x) / C_n^lambda(1).
double gegenbauer_normalized(int n, double lambda, double x);

/// out[k] = R_k^lambda(x). lambda = 0 gives the Chebyshev limit T_k(x).
void gegenbauer_normalized_sequence(double lambda, double x, std::span<double> out);

/// C_n^lambda(1) = Gamma(n + 2 lambda) / (n! Gamma(2 lambda)).
double gegenbauer_at_one(int n, double lambda);

/// Legendre polynomial P_n(x).
double legendre(int n, double x);

/// Bessel function of the first kind J_alpha(z), alpha > -1, z >= 0.
double bessel_j(double alpha, double z);

/// j_alpha(z) = z^{-alpha} J_alpha(z); j_alpha(0) = 1 / (2^alpha Gamma(alpha + 1)).
double bessel_j_normalized(double alpha, double z);

struct CosineTerm {
  int frequency = 0;
  double coefficient = 0.0;
};

/// C_n^lambda(cos t) = sum_k coefficient_k cos(frequency_k t) with the
/// frequencies n, n-2, ..., (n mod 2). Terms with +m and -m are merged.
/// Requires lambda > 0; every coefficient is then positive.
std::vector<CosineTerm> cosine_expansion(int n, double lambda);

/// Bessel-type approximation of P_n^{(a,a)}(cos t) / P_n^{(a,a)}(1).
struct AsymptoticApprox {
  double value = 0.0;
  /// Certified absolute bound on |exact - value|, +inf when no constant is known.
  double error_bound = 0.0;
  /// Shifted degree N = n + alpha + 1/2.
  double shifted_degree = 0.0;
  bool certified = false;
};

/// 2^a Gamma(a+1) (t / sin t)^{a+1/2} j_a(N t). For alpha = 0 and
/// t in [0, pi/2] the bound 0.1711 / n is attached. Throws
/// std::domain_error when t > pi - eps.
AsymptoticApprox jacobi_bessel_approx(int n, double alpha, double t, double eps = 1e-3);

/// log Gamma(x + a) - log Gamma(x + b) without cancellation for large x.
double log_gamma_ratio(double x, double a, double b);

/// Values of Legendre-family functions at cos t needed by the d = 2 analysis.
struct LegendreCosValues {
  double p = 0.0;            // P_n(cos t)
  double p_prev = 0.0;       // P_{n-1}(cos t)
  double one_minus_p = 0.0;  // 1 - P_n(cos t), accurate as t -> 0
  double jacobi11 = 0.0;     // P_{n-1}^{(1,1)}(cos t)
};

/// Evaluator for P_n(cos t) and relatives at fixed n, usable for n in the
/// millions. Small n uses recurrences; large n switches between a
/// hypergeometric series near the poles and the Stieltjes expansion
/// (truncated once twice the next term is below 1e-15 relative).
class LegendreCos {
 public:
  explicit LegendreCos(int n);

  int degree() const { return n_; }
  LegendreCosValues operator()(double t) const;

  /// Largest degree handled entirely by recurrence.
  static constexpr int kRecurrenceMax = 256;
  /// n * sin t below which the pole series replaces the Stieltjes expansion.
  static constexpr double kPoleThreshold = 15.0;

 private:
  struct Stieltjes {
    double prefactor = 0.0;                  // (2/sqrt(pi)) Gamma(m+1)/Gamma(m+3/2)
    std::vector<double> coefficients;        // (1/2)_k^2 / (k! (m+3/2)_k)
  };
  static Stieltjes make_stieltjes(int m);
  /// exp(i ((m + 1/2) t - pi/4)) with the phase reduced in extended precision.
  static std::complex<double> stieltjes_phase(int m, double t);
  static double stieltjes_eval(const Stieltjes& s, std::complex<double> phase, double sin_t, double cos_t);

  LegendreCosValues recurrence(double t) const;
  LegendreCosValues pole_series(double t) const;

  int n_;
  Stieltjes st_n_;
  Stieltjes st_prev_;
};

}  // namespace spherepd::specfun
