#include "spherepd/conjecture_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "spherepd/specfun.hpp"

namespace spherepd::lab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kBetaMoment = 4.0 / 35.0;  // B(2, 5/2)

// Oscillation panels of half a period of P_n(cos t) keep GK15 near roundoff.
double panel_frequency(double n) { return std::max(1.0, 0.5 * n); }

void check_theta(double theta, double hi, const char* where) {
  if (!(theta > 0.0 && theta <= hi)) throw std::invalid_argument(std::string(where) + ": theta out of range");
}

}  // namespace

quad::Result d2_integral(int n, double theta, double delta) {
  if (n < 0) throw std::invalid_argument("d2_integral: negative degree");
  check_theta(theta, kPi, "d2_integral");
  if (!(delta >= 1.5)) throw std::invalid_argument("d2_integral: delta must be at least 3/2");
  const specfun::LegendreCos legendre(n);
  const double x = std::max(1.0, n * theta);
  const double size = std::pow(theta, delta + 2.0);
  quad::Options opt;
  // Relative accuracy against the (n theta)^{-3} decay, capped by the roundoff
  // floor of the oscillating integrand.
  opt.abs_tol = std::max(1e-13 * size / (x * x * x), size * std::max(1e-13 / std::sqrt(x), 5e-18 * std::sqrt(x)));
  opt.rel_tol = 1e-10;
  opt.frequency = panel_frequency(n);
  opt.max_evals = 200'000'000;
  return quad::integrate_singular([&](double t) { return legendre(t).p * std::sin(t); }, 0.0, theta,
                                  {0.0, delta}, opt);
}

double D2Decomposition::max_term() const {
  const double scaled = 4.0 * n * (n + 1.0) / 3.0 * target;
  return std::max({std::abs(scaled), std::abs(principal), std::abs(jacobi_term), std::abs(positive_term),
                   std::abs(legendre_term)});
}

D2Decomposition d2_decomposition(int n, double theta) {
  if (n < 1) throw std::invalid_argument("d2_decomposition: n must be positive");
  check_theta(theta, 0.5 * kPi, "d2_decomposition");
  const specfun::LegendreCos legendre(n);
  const double nn1 = n * (n + 1.0);

  // All components share the weight (theta - t)^{-1/2}.
  const quad::VectorIntegrand f = [&](double t, std::span<double> out) {
    const auto v = legendre(t);
    const double s = std::sin(t), c = std::cos(t), w = theta - t;
    double over_s2 = nn1 / 4.0, over_s = 0.0;  // limits of (1 - P_n) / sin^k t at t = 0
    if (s > 0.0) {
      over_s2 = v.one_minus_p / (s * s);
      over_s = v.one_minus_p / s;
    }
    out[0] = v.p * s * w * w;
    out[1] = 2.0 / nn1 * over_s2 * c * w;
    out[2] = v.jacobi11 * s * c / (2.0 * n);
    out[3] = over_s / nn1;
    out[4] = v.p * s;
  };

  // Terms scale like theta^{3/2} / (n theta). The oscillating ones stop at
  // a roundoff floor: a few hundred ulps of an L1 norm of order
  // theta^{3/2} / sqrt(n theta), amplified by n theta once the rounding of
  // the nodes themselves shifts the phase (and by (n theta)^2 for the target).
  const double x = std::max(1.0, n * theta);
  const double base = std::pow(theta, 1.5);
  const double term_tol = 1e-12 * base / x;
  const double floor = base * std::max(1e-13 / std::sqrt(x), 5e-18 * std::sqrt(x));
  const double osc_tol = std::max(term_tol, floor);
  const double target_tol = 3.0 / (4.0 * nn1) * std::max(term_tol, floor * x * x);
  const double tols[] = {target_tol, term_tol, osc_tol, term_tol, osc_tol};

  quad::Options opt;
  opt.frequency = panel_frequency(n);
  opt.max_evals = 400'000'000;
  const auto r = quad::integrate_vector(f, 5, 0.0, theta, {0.0, -0.5}, opt, tols);

  D2Decomposition d;
  d.n = n;
  d.theta = theta;
  d.target = r.value[0];
  d.principal = r.value[1];
  d.jacobi_term = r.value[2];
  d.positive_term = r.value[3];
  d.legendre_term = r.value[4];
  d.abs_error = r.abs_error;
  d.converged = r.converged;
  d.identity_residual = std::abs(4.0 * nn1 / 3.0 * d.target - d.recombined());
  return d;
}

// ---------------------------------------------------------------------------
// Audits

std::string_view to_string(Inequality id) {
  switch (id) {
    case Inequality::JacobiTerm: return "jacobi-term";
    case Inequality::LegendreTerm: return "legendre-term";
    case Inequality::Principal: return "principal";
    case Inequality::Scaled: return "scaled";
    case Inequality::SmallArgument: return "small-argument";
    case Inequality::BesselMoment: return "bessel-moment";
    case Inequality::LegendreBessel: return "legendre-bessel";
    case Inequality::JacobiEnvelope: return "jacobi-envelope";
    case Inequality::LegendreEnvelope: return "legendre-envelope";
  }
  return "unknown";
}

Inequality parse_inequality(std::string_view name) {
  for (Inequality id : kAllInequalities) {
    if (to_string(id) == name) return id;
  }
  throw std::invalid_argument("unknown inequality '" + std::string(name) + "'");
}

int BoundAuditReport::violations() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const AuditRow& r) { return !r.skipped && !r.pass; }));
}

int BoundAuditReport::skipped() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const AuditRow& r) { return r.skipped; }));
}

namespace {

AuditRow skip(const GridPoint& p, double variable, std::string why) {
  AuditRow row;
  row.n = p.n;
  row.theta = p.theta;
  row.variable = variable;
  row.skipped = true;
  row.note = std::move(why);
  return row;
}

AuditRow evaluated(const GridPoint& p, double variable, double lhs, double rhs, bool upper) {
  AuditRow row;
  row.n = p.n;
  row.theta = p.theta;
  row.variable = variable;
  row.lhs = lhs;
  row.rhs = rhs;
  row.margin = upper ? rhs - lhs : lhs - rhs;
  row.pass = row.margin >= 0.0;
  return row;
}

void finish(BoundAuditReport& r) {
  r.all_pass = std::none_of(r.rows.begin(), r.rows.end(), [](const AuditRow& row) { return !row.skipped && !row.pass; });
}

std::string variable_name(Inequality id) {
  switch (id) {
    case Inequality::BesselMoment: return "u";
    case Inequality::LegendreBessel:
    case Inequality::JacobiEnvelope:
    case Inequality::LegendreEnvelope: return "t";
    default: return "n*theta";
  }
}

double bessel_moment_bound(double u) {
  double b = -std::numeric_limits<double>::infinity();
  if (u <= std::sqrt(33.0 / 2.0)) b = 1.0 - 2.0 * u * u / 33.0;
  if (u >= std::sqrt(12.0)) b = std::max(b, kMomentTailConstant / (u * u * u));
  return kBetaMoment * b;
}

// Pointwise bounds on Legendre and Jacobi polynomials at t = p.theta.
AuditRow pointwise_row(Inequality id, const GridPoint& p) {
  const double t = p.theta;
  const int n = p.n;
  if (!(t >= 0.0 && t <= 0.5 * kPi)) return skip(p, t, "t outside [0, pi/2]");
  switch (id) {
    case Inequality::LegendreBessel: {
      if (n < 1) return skip(p, t, "needs n >= 1");
      const double ratio = t > 0.0 ? std::sqrt(t / std::sin(t)) : 1.0;
      const double approx = ratio * specfun::bessel_j(0.0, (n + 0.5) * t);
      const double lhs = std::abs(specfun::LegendreCos(n)(t).p - approx);
      return evaluated(p, t, lhs, kLegendreBesselConstant / n, true);
    }
    case Inequality::JacobiEnvelope: {
      if (n < 2) return skip(p, t, "needs n >= 2");
      if (!(t > 0.0)) return skip(p, t, "needs t > 0");
      const double lhs = std::abs(specfun::jacobi(n - 1, 1.0, 1.0, std::cos(t)));
      const double rhs = kJacobiEnvelopeConstant * std::pow(kPi, 1.5) / (std::sqrt(n - 1.0) * std::pow(t, 1.5));
      return evaluated(p, t, lhs, rhs, true);
    }
    case Inequality::LegendreEnvelope: {
      if (n < 1) return skip(p, t, "needs n >= 1");
      if (!(t > 0.0)) return skip(p, t, "needs t > 0");
      const double lhs = std::abs(specfun::LegendreCos(n)(t).p);
      return evaluated(p, t, lhs, 1.0 / std::sqrt(n * t), true);
    }
    default: break;
  }
  throw std::logic_error("pointwise_row: not a pointwise bound");
}

}  // namespace

std::vector<BoundAuditReport> decomposition_audits(std::span<const GridPoint> grid) {
  const Inequality ids[] = {Inequality::JacobiTerm, Inequality::LegendreTerm, Inequality::Principal,
                            Inequality::Scaled};
  std::vector<BoundAuditReport> reports;
  for (Inequality id : ids) {
    BoundAuditReport r;
    r.id = id;
    r.variable_name = variable_name(id);
    reports.push_back(std::move(r));
  }
  for (const auto& p : grid) {
    const double x = p.n * p.theta;
    std::string why;
    if (p.n < 2) why = "needs n >= 2";
    else if (!(p.theta > 0.0 && p.theta <= 0.5 * kPi)) why = "theta outside (0, pi/2]";
    else if (!(x >= 5.0)) why = "needs n theta >= 5";
    if (!why.empty()) {
      for (auto& r : reports) r.rows.push_back(skip(p, x, why));
      continue;
    }
    const auto d = d2_decomposition(p.n, p.theta);
    const double th = p.theta;
    const double th32 = std::pow(th, 1.5);
    const double N = p.n + 0.5;

    reports[0].rows.push_back(
        evaluated(p, x, std::abs(d.jacobi_term), kJacobiTermConstant / (x * x) * th32, true));

    const double oscillation = kSqrt2 * std::sin(N * th) * std::sqrt(std::sin(th) / th) * std::sqrt(th) / p.n;
    reports[1].rows.push_back(
        evaluated(p, x, d.legendre_term, oscillation + kLegendreTermConstant * std::pow(x, -1.5) * th32, true));

    reports[2].rows.push_back(evaluated(p, x, d.principal,
                                        1.5 * std::sqrt(th) / p.n - kPrincipalConstant * std::pow(x, -1.5) * th32,
                                        false));

    const double scaled_rhs = (1.5 - kSqrt2) / x - kScaledConstant * std::pow(x, -1.5);
    auto row = evaluated(p, x, d.recombined() / th32, scaled_rhs, false);
    if (x >= kLargeArgumentThreshold) row.note = scaled_rhs > 0.0 ? "lower bound positive" : "lower bound not positive";
    reports[3].rows.push_back(std::move(row));

    if (!d.converged) {
      for (auto& r : reports) r.rows.back().note += (r.rows.back().note.empty() ? "" : "; ") + std::string("quadrature not converged");
    }
  }
  for (auto& r : reports) finish(r);
  return reports;
}

BoundAuditReport bounds_audit(Inequality id, std::span<const GridPoint> grid) {
  switch (id) {
    case Inequality::JacobiTerm:
    case Inequality::LegendreTerm:
    case Inequality::Principal:
    case Inequality::Scaled: {
      auto all = decomposition_audits(grid);
      return std::move(all[static_cast<std::size_t>(id) - static_cast<std::size_t>(Inequality::JacobiTerm)]);
    }
    default: break;
  }
  BoundAuditReport r;
  r.id = id;
  r.variable_name = variable_name(id);
  for (const auto& p : grid) {
    switch (id) {
      case Inequality::SmallArgument: {
        const double x = p.n * p.theta;
        if (p.n < 1) {
          r.rows.push_back(skip(p, x, "needs n >= 1"));
        } else if (!(p.theta > 0.0 && p.theta <= kPi)) {
          r.rows.push_back(skip(p, x, "theta outside (0, pi]"));
        } else if (!(x < kSmallArgumentLimit)) {
          r.rows.push_back(skip(p, x, "needs n theta < 2/35"));
        } else {
          const double lhs = d2_integral(p.n, p.theta).value / std::pow(p.theta, 3.5);
          r.rows.push_back(evaluated(p, x, lhs, kBetaMoment - 2.0 * x, false));
        }
        break;
      }
      case Inequality::BesselMoment: {
        const double u = (p.n + 0.5) * p.theta;
        if (p.n < 0 || !(p.theta >= 0.0)) {
          r.rows.push_back(skip(p, u, "needs n >= 0 and theta >= 0"));
        } else {
          const auto m = bessel_moment(u);
          r.rows.push_back(evaluated(p, u, m.direct, m.lower_bound, false));
        }
        break;
      }
      default:
        r.rows.push_back(pointwise_row(id, p));
        break;
    }
  }
  finish(r);
  return r;
}

std::vector<GridPoint> default_audit_grid(Inequality id) {
  std::vector<GridPoint> g;
  switch (id) {
    case Inequality::JacobiTerm:
    case Inequality::LegendreTerm:
    case Inequality::Principal:
    case Inequality::Scaled: {
      const double xs[] = {5.0, 7.0, 10.0, 15.0, 25.0, 40.0, 70.0, 100.0, 300.0, 1e3, 3e3, 1e4, 1e5, 1e6, 1e7};
      for (double x : xs) {
        for (double th : {0.05, 0.4, 1.5}) {
          if (x > 1e5 && th == 0.4) continue;  // keeps the largest cells affordable
          const int n = static_cast<int>(std::ceil(x / th));
          g.push_back({std::max(n, 2), th});
        }
      }
      break;
    }
    case Inequality::SmallArgument:
      for (int n : {1, 2, 3, 5, 10, 50, 100, 1000}) {
        for (double x : {1e-5, 1e-3, 0.01, 0.03, 0.05, 0.057}) g.push_back({n, x / n});
      }
      break;
    case Inequality::BesselMoment: {
      constexpr double th = 1e-3;
      const double us[] = {0.05, 0.1, 0.5, 1.0, 2.0, 3.0, 3.47, 3.8, 4.0, 4.06, 5.0, 7.0,
                           10.0,   20.0, 50.0, 100.0, 300.0, 1e3, 3e3, 1e4};
      for (double u : us) g.push_back({std::max(0, static_cast<int>(std::lround(u / th - 0.5))), th});
      break;
    }
    case Inequality::LegendreBessel:
      for (int n = 5; n <= 100; ++n) {
        for (int i = 0; i <= 200; ++i) g.push_back({n, 0.5 * kPi * i / 200});
      }
      break;
    case Inequality::JacobiEnvelope:
    case Inequality::LegendreEnvelope: {
      std::vector<int> ns;
      for (int n = 1; n <= 100; ++n) ns.push_back(n);
      for (int n : {300, 1000, 10000, 100000}) ns.push_back(n);
      for (int n : ns) {
        if (id == Inequality::JacobiEnvelope && n < 2) continue;
        for (int i = 1; i <= 100; ++i) g.push_back({n, 0.5 * kPi * i / 100});
      }
      break;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Moments and thresholds

quad::Result small_argument_moment(double theta) {
  check_theta(theta, std::numeric_limits<double>::infinity(), "small_argument_moment");
  quad::Options opt;
  opt.abs_tol = 1e-15 * theta * theta;
  opt.rel_tol = 1e-14;
  const double scale = std::pow(theta, -1.5);
  return quad::integrate_singular([scale](double t) { return scale * t; }, 0.0, theta, {0.0, 1.5}, opt);
}

BesselMoment bessel_moment(double u) {
  if (!(u >= 0.0)) throw std::invalid_argument("bessel_moment: u must be nonnegative");
  BesselMoment m;
  m.u = u;
  m.lower_bound = bessel_moment_bound(u);
  quad::Options opt;
  const double tail = kBetaMoment * std::min(1.0, 1.0 / (u * u * u));
  opt.abs_tol = std::max(1e-12 * tail, 2e-15 / std::sqrt(std::max(1.0, u)));
  opt.rel_tol = 1e-11;
  opt.frequency = panel_frequency(u);
  opt.max_evals = 50'000'000;
  const auto r = quad::integrate_singular([u](double x) { return x * specfun::bessel_j(0.0, u * x); }, 0.0, 1.0,
                                          {0.0, 1.5}, opt);
  m.direct = r.value;
  m.abs_error = r.abs_error;
  return m;
}

MidRangeBound case3_lower_bound(int n, double theta, double large, double small) {
  if (n < 0) throw std::invalid_argument("case3_lower_bound: negative degree");
  check_theta(theta, kPi, "case3_lower_bound");
  const double x = n * theta;
  if (!(x >= small && x <= large)) throw std::domain_error("case3_lower_bound: n theta outside the mid range");
  MidRangeBound b;
  b.n = n;
  b.theta = theta;
  b.u = (n + 0.5) * theta;
  b.moment = bessel_moment(b.u);
  b.chain = std::sqrt(2.0 / kPi) * b.moment.lower_bound - kLegendreBesselConstant * theta / small;
  b.scaled_integral = d2_integral(n, theta).value / std::pow(theta, 3.5);
  return b;
}

double large_argument_threshold(double constant) {
  const double r = constant / (1.5 - kSqrt2);
  return r * r;
}

double admissible_theta(double large, double small) {
  if (!(large > 0.0 && small > 0.0)) throw std::invalid_argument("admissible_theta: thresholds must be positive");
  return small / kLegendreBesselConstant * std::sqrt(2.0 / kPi) * kBetaMoment * kMomentTailConstant /
         (large * large * large);
}

double recomputed_theta_threshold() { return admissible_theta(large_argument_threshold()); }

// ---------------------------------------------------------------------------
// Sweeps

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Positive: return "positive";
    case CellStatus::Indeterminate: return "indeterminate";
    case CellStatus::Negative: return "negative";
  }
  return "unknown";
}

namespace {

struct ThetaResult {
  std::vector<SweepCell> cells;
  bool converged = true;
};

ThetaResult sweep_theta(const SweepConfig& c, double lambda, double theta, double guarantee) {
  const int count = c.n_max - c.n_min + 1;
  const double two_l = 2.0 * lambda;
  std::vector<double> norms(count), tols(count);
  const double size = std::pow(theta, c.delta + two_l + 1.0) * std::beta(two_l + 1.0, c.delta + 1.0);
  for (int i = 0; i < count; ++i) {
    const int n = c.n_min + i;
    norms[i] = specfun::gegenbauer_at_one(n, lambda);
    const double x = std::max(1.0, n * theta);
    // Values decay like (n theta)^{-(2 lambda + 2)}; roundoff is set by an
    // L1 norm decaying like (n theta)^{-lambda}.
    tols[i] = norms[i] * size * std::max(1e-10 * std::pow(x, -(two_l + 2.0)), 1e-12 * std::pow(x, -lambda));
  }
  std::vector<double> seq(c.n_max + 1);
  const quad::VectorIntegrand f = [&](double t, std::span<double> out) {
    specfun::gegenbauer_normalized_sequence(lambda, std::cos(t), seq);
    const double w = std::pow(std::sin(t), two_l);
    for (int i = 0; i < count; ++i) out[i] = seq[c.n_min + i] * norms[i] * w;
  };
  quad::Options opt;
  opt.frequency = panel_frequency(c.n_max);
  opt.max_evals = 50'000'000;
  const auto r = quad::integrate_vector(f, count, 0.0, theta, {0.0, c.delta}, opt, tols);

  ThetaResult out;
  out.converged = r.converged;
  out.cells.resize(count);
  for (int i = 0; i < count; ++i) {
    auto& cell = out.cells[i];
    cell.n = c.n_min + i;
    cell.theta = theta;
    cell.value = r.value[i];
    cell.abs_error = r.abs_error[i];
    cell.converged = r.abs_error[i] <= tols[i];
    if (cell.value > cell.abs_error) cell.status = CellStatus::Positive;
    else if (cell.value < -cell.abs_error) cell.status = CellStatus::Negative;
    else cell.status = CellStatus::Indeterminate;
    cell.guaranteed = theta <= guarantee;
  }
  return out;
}

}  // namespace

SweepReport sweep(const SweepConfig& config, int threads) {
  const int d = config.d;
  if (d != 2 && d != 3 && d != 5 && d != 7) throw std::invalid_argument("sweep: d must be 2, 3, 5 or 7");
  if (!(config.delta >= 0.5 * (d + 1))) throw std::invalid_argument("sweep: delta below (d + 1) / 2");
  if (config.n_min < 0) throw std::invalid_argument("sweep: negative degree");
  for (double th : config.thetas) check_theta(th, kPi, "sweep");

  SweepReport rep;
  rep.config = config;
  const double lambda = 0.5 * (d - 1);
  // Odd dimensions are settled for theta < pi; on the two-sphere only the
  // small-theta range is.
  rep.guarantee_theta = d == 2 ? recomputed_theta_threshold() : std::nextafter(kPi, 0.0);
  if (config.n_min > config.n_max || config.thetas.empty()) return rep;

  std::vector<ThetaResult> per_theta(config.thetas.size());
  auto work = [&](std::size_t start, std::size_t stride) {
    for (std::size_t k = start; k < config.thetas.size(); k += stride) {
      per_theta[k] = sweep_theta(config, lambda, config.thetas[k], rep.guarantee_theta);
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  rep.min_value = std::numeric_limits<double>::infinity();
  rep.min_error_ratio = std::numeric_limits<double>::infinity();
  for (auto& tr : per_theta) {
    rep.converged = rep.converged && tr.converged;
    for (auto& cell : tr.cells) {
      if (cell.value < rep.min_value) {
        rep.min_value = cell.value;
        rep.argmin_n = cell.n;
        rep.argmin_theta = cell.theta;
      }
      if (cell.abs_error > 0.0) rep.min_error_ratio = std::min(rep.min_error_ratio, cell.value / cell.abs_error);
      if (cell.status == CellStatus::Negative) rep.failures.push_back(rep.cells.size());
      if (cell.status == CellStatus::Indeterminate) ++rep.indeterminate;
      if (cell.guaranteed) ++rep.guaranteed;
      rep.converged = rep.converged && cell.converged;
      rep.cells.push_back(cell);
    }
  }
  return rep;
}

void write_sweep_csv(std::ostream& os, const SweepReport& r) {
  os << "d,delta,n,theta,value,abs_error,status,guaranteed\n";
  char buf[256];
  for (const auto& c : r.cells) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%.17g,%.17g,%.17g,", r.config.d, r.config.delta, c.n, c.theta,
                  c.value, c.abs_error);
    os << buf << to_string(c.status) << ',' << (c.guaranteed ? 1 : 0) << '\n';
  }
}

void write_sweep_plot_csv(std::ostream& os, const SweepReport& r) {
  os << "theta,min_value\n";
  char buf[96];
  for (std::size_t i = 0; i < r.cells.size();) {
    const double theta = r.cells[i].theta;
    double m = r.cells[i].value;
    for (; i < r.cells.size() && r.cells[i].theta == theta; ++i) m = std::min(m, r.cells[i].value);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", theta, m);
    os << buf;
  }
}

nlohmann::json sweep_summary_json(const SweepReport& r) {
  nlohmann::json j;
  j["d"] = r.config.d;
  j["delta"] = r.config.delta;
  j["cells"] = r.cells.size();
  if (r.cells.empty()) {
    j["min_value"] = nullptr;
    j["argmin"] = nullptr;
  } else {
    j["min_value"] = r.min_value;
    j["argmin"] = {{"n", r.argmin_n}, {"theta", r.argmin_theta}};
  }
  j["failures"] = nlohmann::json::array();
  for (std::size_t k : r.failures) {
    const auto& c = r.cells[k];
    j["failures"].push_back({{"n", c.n}, {"theta", c.theta}, {"value", c.value}, {"abs_error", c.abs_error}});
  }
  j["indeterminate"] = r.indeterminate;
  j["guaranteed_cells"] = r.guaranteed;
  j["exploratory_cells"] = r.cells.size() - r.guaranteed;
  j["guarantee_theta"] = r.guarantee_theta;
  if (r.config.d == 2) j["published_theta_threshold"] = kPublishedThetaThreshold;
  if (std::isfinite(r.min_error_ratio)) j["min_value_to_error"] = r.min_error_ratio;
  j["converged"] = r.converged;
  return j;
}

void write_audit_csv(std::ostream& os, std::span<const BoundAuditReport> reports) {
  os << "inequality,n,theta,variable,lhs,rhs,margin,pass,skipped\n";
  char buf[256];
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      std::snprintf(buf, sizeof buf, ",%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d\n", row.n, row.theta, row.variable,
                    row.lhs, row.rhs, row.margin, row.pass ? 1 : 0, row.skipped ? 1 : 0);
      os << to_string(r.id) << buf;
    }
  }
}

nlohmann::json to_json(const BoundAuditReport& r) {
  nlohmann::json j;
  j["inequality"] = std::string(to_string(r.id));
  j["variable"] = r.variable_name;
  j["all_pass"] = r.all_pass;
  j["rows"] = r.rows.size();
  j["violations"] = r.violations();
  j["skipped"] = r.skipped();
  double worst = std::numeric_limits<double>::infinity();
  nlohmann::json at = nullptr;
  for (const auto& row : r.rows) {
    if (!row.skipped && row.margin < worst) {
      worst = row.margin;
      at = {{"n", row.n}, {"theta", row.theta}, {r.variable_name, row.variable}};
    }
  }
  j["min_margin"] = std::isfinite(worst) ? nlohmann::json(worst) : nlohmann::json(nullptr);
  j["argmin"] = at;
  j["findings"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    if (row.skipped || row.pass) continue;
    j["findings"].push_back({{"n", row.n}, {"theta", row.theta}, {"lhs", row.lhs}, {"rhs", row.rhs},
                             {"margin", row.margin}, {"note", row.note}});
  }
  return j;
}

}  // namespace spherepd::lab
