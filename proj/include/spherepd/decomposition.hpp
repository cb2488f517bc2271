#pragma once

// Structural identities for integer lambda = (d - 1) / 2:
//   * half-angle expansion R_n(cos t) cos^{2 lambda}(t/2) = sum_j a_{n,j} R_{2j}(cos t/2),
//     j = n..n+lambda, with a_{n,j} > 0;
//   * the resulting refinement of truncated Gegenbauer moments;
//   * the derivative decomposition of F_l = (F_{l-1} / sin t)'.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spherepd/kernels.hpp"

namespace spherepd::decomp {

using kernels::KernelSpec;

struct HalfAngleCoeffs {
  int n = 0;
  int lambda = 1;
  /// coeffs[i] = a_{n, n+i}, i = 0..lambda.
  std::vector<double> coeffs;
  /// Exact values "p/q" when computed in rational arithmetic, else empty.
  std::vector<std::string> exact;

  double at(int j) const { return coeffs.at(static_cast<std::size_t>(j - n)); }
};

/// Rational arithmetic when n + lambda <= 30, long double products beyond.
HalfAngleCoeffs half_angle_coeffs(int n, int lambda);

/// max over t_grid (in [0, pi]) of |R_n(cos t) cos^{2 lambda}(t/2) - sum_j a_{n,j} R_{2j}(cos t/2)|.
double verify_half_angle(int n, int lambda, std::span<const double> t_grid);

struct RefinementResult {
  double lhs = 0.0;
  double rhs = 0.0;
  /// |lhs - rhs| / |lhs| (absolute when lhs == 0).
  double residual = 0.0;
  bool converged = false;
};

/// Checks, for a profile f supported in [0, 1],
///   int_0^theta f(t/theta) R_n(cos t) sin^{2l} t dt
///     = sum over degree chains of prod (2^{2l+1} a_{m,j}) int_0^{theta/2^L} f(2^L s/theta) R_m(cos s) sin^{2l} s ds
/// after `levels` = L applications of the half-angle expansion.
RefinementResult refinement_check(const KernelSpec& f, int n, double theta, int lambda, int levels = 1);

/// Coefficients alpha_{l,k}^{(j)} of
///   F_l(t) = sum_j theta^{-j} f^{(j)}(t/theta) sum_k alpha_{l,k}^{(j)} sin^{2 lambda - 2l + j + 2k} t cos^{l - j - 2k} t.
struct FEllTable {
  int lambda = 1;
  int ell = 0;
  /// alpha[j][k], 0 <= j <= ell, 0 <= k <= (ell - j) / 2. Entries are integers.
  std::vector<std::vector<double>> alpha;

  double at(int j, int k) const { return alpha.at(j).at(k); }
};

/// Built by differentiating the ell - 1 table term by term.
FEllTable f_ell_coeffs(int lambda, int ell);

/// f^{(order)}(u).
using Profile = std::function<double(double u, int order)>;

/// sum_k c_k u^k with exact derivatives.
Profile polynomial_profile(std::vector<double> coefficients);

/// Closed-form F_ell(t) from the table.
double f_ell_closed_form(const FEllTable& table, const Profile& f, double theta, double t);

/// Max over t_grid of |closed form - F_ell by nested finite differences|,
/// divided by max(1, max |closed form|). Differences use 9-point centered
/// stencils with one Richardson step. Throws std::domain_error if a stencil
/// touches a zero of sin t.
double verify_f_ell(const Profile& f, int lambda, int ell, double theta, std::span<const double> t_grid);

/// Columns n,lambda,j,a_nj.
void write_half_angle_csv(std::ostream& os, std::span<const HalfAngleCoeffs> tables);
/// Columns lambda,ell,j,k,alpha.
void write_f_ell_csv(std::ostream& os, const FEllTable& table);

}  // namespace spherepd::decomp
