#include "spherepd/pd_tester.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "spherepd/specfun.hpp"

namespace spherepd::pd {

namespace {

constexpr double kPi = std::numbers::pi;

// 2^a Gamma(a + 1) with a = lambda - 1/2: Bessel limit constant of R_n^lambda.
double mehler_heine_constant(double lambda) {
  const double a = lambda - 0.5;
  return std::exp(a * std::log(2.0) + std::lgamma(a + 1.0));
}

}  // namespace

double zonal(int n, double lambda, double t) {
  if (lambda == 0.0) return std::cos(n * t);
  return specfun::gegenbauer_normalized(n, lambda, std::cos(t));
}

double gegenbauer_norm_squared(int n, double lambda) {
  if (n < 0) throw std::invalid_argument("gegenbauer_norm_squared: negative degree");
  if (lambda == 0.0) return n == 0 ? kPi : kPi / 2.0;
  const double log_h = std::log(kPi) + (1.0 - 2.0 * lambda) * std::log(2.0) + std::lgamma(n + 2.0 * lambda) -
                       std::lgamma(n + 1.0) - std::log(n + lambda) - 2.0 * std::lgamma(lambda);
  return std::exp(log_h);
}

double default_coefficient_tolerance(const KernelSpec& g, const Dimension& d) {
  const double lambda = d.lambda();
  const quad::VectorIntegrand w = [lambda](double t, std::span<double> out) {
    out[0] = lambda == 0.0 ? 1.0 : std::pow(std::sin(t), 2.0 * lambda);
  };
  quad::Options opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-8;
  const double a0 = kernels::integrate_kernel(g, 0.0, kPi, w, 1, opt).value[0];
  const double g0 = g.support_end() > 0.0 ? std::abs(g(0.0)) : 0.0;
  return std::max(1e-10 * std::max(std::abs(a0), g0), DBL_MIN);
}

GegenbauerSeries gegenbauer_coefficients(const KernelSpec& g, const Dimension& d, int nmax, double tol) {
  if (nmax < 0) throw std::invalid_argument("gegenbauer_coefficients: nmax must be >= 0");
  if (g.support_end() > kPi * (1.0 + 1e-15)) {
    throw std::invalid_argument("gegenbauer_coefficients: kernel support exceeds [0, pi]");
  }
  if (!(tol > 0.0)) tol = default_coefficient_tolerance(g, d);
  const double lambda = d.lambda();
  const auto count = static_cast<std::size_t>(nmax) + 1;

  std::vector<double> at_one(count, 1.0);
  if (lambda > 0.0) {
    for (std::size_t n = 0; n < count; ++n) at_one[n] = specfun::gegenbauer_at_one(static_cast<int>(n), lambda);
  }
  const quad::VectorIntegrand basis = [&](double t, std::span<double> out) {
    specfun::gegenbauer_normalized_sequence(lambda, std::cos(t), out);
    const double w = lambda == 0.0 ? 1.0 : std::pow(std::sin(t), 2.0 * lambda);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] *= at_one[n] * w;
  };
  quad::Options opt;
  opt.frequency = std::max(1, nmax);
  opt.max_evals = 20'000'000;
  const std::vector<double> tols(count, tol / 10.0);
  const auto r = kernels::integrate_kernel(g, 0.0, kPi, basis, count, opt, tols);

  GegenbauerSeries s{d, r.value, r.abs_error, 0.0, tol, r.converged};
  double sum = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    sum += s.coefficients[n] / gegenbauer_norm_squared(static_cast<int>(n), lambda) * at_one[n];
  }
  s.weighted_partial_sum = sum;
  return s;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::PD: return "PD";
    case Status::PSD: return "PSD";
    case Status::NotPD: return "NotPD";
    case Status::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

PDVerdict schoenberg_test(const GegenbauerSeries& series, double tol) {
  if (!(tol > 0.0)) tol = series.tol;
  PDVerdict v;
  v.nmax = series.nmax();
  v.tol = tol;
  auto& m = v.margins;
  m.min_value = m.max_value = series.coefficients.empty() ? 0.0 : series.coefficients[0];
  for (int n = 0; n <= series.nmax(); ++n) {
    const double a = series.coefficients[n];
    const double e = series.per_coeff_error[n];
    if (a < m.min_value) {
      m.min_value = a;
      m.argmin = n;
    }
    m.max_value = std::max(m.max_value, a);
    if (a + e < -tol) {
      ++m.negative;
      if (!v.witness || a < v.witness->value) {
        Witness w;
        w.kind = Witness::Kind::CoefficientIndex;
        w.index = n;
        w.value = a;
        v.witness = w;
      }
    } else if (a - e < -tol) {
      ++m.indeterminate;
    } else if (a - e > tol) {
      ++m.positive;
      ++(n % 2 == 0 ? m.positive_even : m.positive_odd);
    }
  }
  if (m.negative > 0) {
    v.status = Status::NotPD;
  } else if (m.indeterminate > 0) {
    v.status = Status::Inconclusive;
    v.note = "quadrature error straddles the sign threshold";
  } else if (m.positive_even > 0 && m.positive_odd > 0) {
    v.status = Status::PD;
  } else {
    v.status = Status::PSD;
  }
  if (!series.converged && v.status != Status::NotPD) {
    v.note += (v.note.empty() ? "" : "; ") + std::string("coefficient quadrature hit its budget");
  }
  return v;
}

HankelValue hankel_transform(const KernelSpec& g, const Dimension& d, double xi, double abs_tol) {
  if (!(xi >= 0.0)) throw std::invalid_argument("hankel_transform: xi must be >= 0");
  const double alpha = 0.5 * (d.d() - 2);
  const double scale = std::pow(2.0 * kPi, 0.5 * d.d());
  const int power = d.d() - 1;
  const quad::VectorIntegrand f = [&](double u, std::span<double> out) {
    out[0] = scale * specfun::bessel_j_normalized(alpha, xi * u) * std::pow(u, power);
  };
  quad::Options opt;
  opt.abs_tol = abs_tol;
  opt.frequency = xi;
  opt.max_evals = 5'000'000;
  const auto r = kernels::integrate_kernel(g, 0.0, g.support_end(), f, 1, opt);
  return HankelValue{r.value[0], r.abs_error[0], r.converged};
}

std::vector<double> frequency_grid(double xi_max, int count) {
  if (!(xi_max > 0.0) || count < 1) throw std::invalid_argument("frequency_grid: need xi_max > 0 and count >= 1");
  std::vector<double> grid(count);
  for (int k = 0; k < count; ++k) grid[k] = xi_max * (k + 1) / count;
  return grid;
}

PDVerdict bochner_test(const KernelSpec& g, const Dimension& d, std::span<const double> xi_grid, double tol,
                       int threads) {
  if (xi_grid.empty()) throw std::invalid_argument("bochner_test: empty grid");
  for (std::size_t k = 0; k < xi_grid.size(); ++k) {
    if (!(xi_grid[k] >= 0.0) || (k > 0 && xi_grid[k] < xi_grid[k - 1])) {
      throw std::invalid_argument("bochner_test: grid must be sorted and nonnegative");
    }
  }
  if (!(tol > 0.0)) tol = std::max(1e-9 * std::abs(hankel_transform(g, d, 0.0).value), DBL_MIN);

  std::vector<HankelValue> values(xi_grid.size());
  auto work = [&](std::size_t start, std::size_t stride) {
    for (std::size_t k = start; k < xi_grid.size(); k += stride) {
      values[k] = hankel_transform(g, d, xi_grid[k], tol / 10.0);
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  PDVerdict v;
  v.sampled = true;
  v.tol = tol;
  auto& m = v.margins;
  m.min_value = m.max_value = values[0].value;
  m.argmin = xi_grid[0];
  bool converged = true;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double f = values[k].value, e = values[k].abs_error;
    converged = converged && values[k].converged;
    if (f < m.min_value) {
      m.min_value = f;
      m.argmin = xi_grid[k];
    }
    m.max_value = std::max(m.max_value, f);
    if (f + e < -tol) {
      ++m.negative;
      if (!v.witness || f < v.witness->value) {
        Witness w;
        w.kind = Witness::Kind::Frequency;
        w.frequency = xi_grid[k];
        w.value = f;
        v.witness = w;
      }
    } else if (f - e < -tol) {
      ++m.indeterminate;
    } else if (f - e > tol) {
      ++m.positive;
    }
  }
  if (m.negative > 0) {
    v.status = Status::NotPD;
  } else if (m.indeterminate > 0) {
    v.status = Status::Inconclusive;
  } else if (m.positive == static_cast<int>(values.size())) {
    v.status = Status::PD;
  } else {
    v.status = Status::PSD;
  }
  v.note = "grid evidence only (" + std::to_string(xi_grid.size()) + " frequencies)";
  if (!converged) v.note += "; transform quadrature hit its budget";
  return v;
}

PointSet sample_sphere(int d, int n_points, std::uint64_t seed) {
  if (d < 1 || n_points < 1) throw std::invalid_argument("sample_sphere: need d >= 1 and n_points >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  PointSet ps{Space::Sphere, d, Eigen::MatrixXd(n_points, d + 1)};
  for (int i = 0; i < n_points; ++i) {
    double norm = 0.0;
    do {
      for (int k = 0; k <= d; ++k) ps.points(i, k) = normal(rng);
      norm = ps.points.row(i).norm();
    } while (norm == 0.0);
    ps.points.row(i) /= norm;
  }
  return ps;
}

PointSet sample_euclidean(int d, int n_points, double spread, std::uint64_t seed) {
  if (d < 1 || n_points < 1) throw std::invalid_argument("sample_euclidean: need d >= 1 and n_points >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, spread);
  PointSet ps{Space::Euclidean, d, Eigen::MatrixXd(n_points, d)};
  for (int i = 0; i < n_points; ++i) {
    for (int k = 0; k < d; ++k) ps.points(i, k) = normal(rng);
  }
  return ps;
}

double distance(const PointSet& ps, int i, int j) {
  if (ps.space == Space::Euclidean) return (ps.points.row(i) - ps.points.row(j)).norm();
  if (i == j) return 0.0;
  const double c = std::clamp(ps.points.row(i).dot(ps.points.row(j)), -1.0, 1.0);
  return std::acos(c);
}

Eigen::MatrixXd gram_matrix(const KernelSpec& g, const PointSet& ps) {
  const auto n = static_cast<int>(ps.points.rows());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = g(distance(ps, i, j));
  }
  return m;
}

GramResult gram_oracle(const KernelSpec& g, Space space, int d, int n_points, int trials, std::uint64_t seed,
                       double tol) {
  if (trials < 1) throw std::invalid_argument("gram_oracle: trials must be >= 1");
  GramResult out;
  PDVerdict& v = out.verdict;
  v.sampled = true;
  v.tol = tol;
  std::mt19937_64 seeder(seed);
  bool first = true;
  bool all_positive = true;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t s = seeder();
    const auto ps = space == Space::Sphere ? sample_sphere(d, n_points, s)
                                           : sample_euclidean(d, n_points, 0.5 * g.support_end(), s);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_matrix(g, ps));
    const double lo = eig.eigenvalues()(0);
    const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (first || lo < out.min_eigenvalue) {
      out.min_eigenvalue = lo;
      v.margins.min_value = lo;
      v.margins.argmin = trial;
    }
    v.margins.max_value = first ? norm : std::max(v.margins.max_value, norm);
    first = false;
    if (lo < -tol * norm) {
      ++v.margins.negative;
      if (!v.witness || lo < v.witness->value) {
        Witness w;
        w.kind = Witness::Kind::PointSet;
        w.value = lo;
        w.points = ps.points;
        w.eigenvector = eig.eigenvectors().col(0);
        v.witness = std::move(w);
      }
    }
    if (!(lo > tol * norm)) all_positive = false;
  }
  v.status = v.margins.negative > 0 ? Status::NotPD : (all_positive ? Status::PD : Status::PSD);
  v.note = std::to_string(trials) + " trials of " + std::to_string(n_points) + " points";
  return out;
}

InheritanceReport inheritance_check(const KernelSpec& g, const Dimension& d, int nmax,
                                    std::span<const double> xi_grid, int threads) {
  if (!d.integer_lambda()) throw std::invalid_argument("inheritance_check: d must be odd and >= 3");
  std::vector<double> grid;
  if (xi_grid.empty()) {
    grid = frequency_grid(100.0, 400);
    xi_grid = grid;
  }
  InheritanceReport r;
  r.euclidean = bochner_test(g, d, xi_grid, 0.0, threads);
  r.sphere = schoenberg_test(gegenbauer_coefficients(g, d, nmax));
  const bool euclid_ok = r.euclidean.status == Status::PD || r.euclidean.status == Status::PSD;
  if (euclid_ok && r.sphere.status == Status::NotPD) {
    r.consistent = false;
    r.finding = "Euclidean test passes but coefficient " + std::to_string(r.sphere.witness->index) +
                " is negative on the sphere";
  } else if (r.euclidean.status == Status::PD && r.sphere.status == Status::PSD) {
    r.finding = "Euclidean PD on the grid but the finite sphere surrogate only reaches PSD up to nmax";
  }
  return r;
}

ConverseTable converse_check(const KernelSpec& g, const Dimension& d, double x, std::span<const int> n_list) {
  if (!(x > 0.0)) throw std::invalid_argument("converse_check: x must be positive");
  if (g.support_end() > kPi * (1.0 + 1e-15)) throw std::invalid_argument("converse_check: support exceeds [0, pi]");
  const double lambda = d.lambda();
  ConverseTable table;
  table.x = x;
  const auto h = hankel_transform(g, d, x, 1e-13);
  table.target = std::pow(x, 2.0 * lambda + 1.0) * mehler_heine_constant(lambda) * std::pow(2.0 * kPi, -0.5 * d.d()) *
                 h.value;
  const double target_scale = std::max(std::abs(table.target), 1e-300);

  for (int n : n_list) {
    const double theta = x / n;
    if (n < 1 || !(theta < 1.0)) throw std::invalid_argument("converse_check: need x / n in (0, 1)");
    const auto scaled = kernels::scale_kernel(g, theta);
    const double amplify = std::pow(static_cast<double>(n), 2.0 * lambda + 1.0);
    const quad::VectorIntegrand f = [&](double t, std::span<double> out) {
      out[0] = zonal(n, lambda, t) * (lambda == 0.0 ? 1.0 : std::pow(std::sin(t), 2.0 * lambda));
    };
    quad::Options opt;
    opt.abs_tol = 1e-10 * target_scale / amplify;
    opt.frequency = n;
    opt.max_evals = 5'000'000;
    const auto r = kernels::integrate_kernel(scaled, 0.0, kPi, f, 1, opt);
    ConverseRow row;
    row.n = n;
    row.theta = theta;
    row.scaled_moment = amplify * r.value[0];
    row.gap = std::abs(row.scaled_moment - table.target);
    row.converged = r.converged && h.converged;
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  table.gaps_decreasing = true;
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    if (table.rows[k].gap > table.rows[k - 1].gap) table.gaps_decreasing = false;
  }
  table.note = "scale parameter sampled only at theta = x / n; the converse hypothesis concerns every theta in (0, 1)";
  return table;
}

nlohmann::json to_json(const PDVerdict& v) {
  nlohmann::json j;
  j["status"] = to_string(v.status);
  j["sampled"] = v.sampled;
  j["nmax"] = v.nmax;
  j["tol"] = v.tol;
  j["margins"] = {{"min", v.margins.min_value},         {"max", v.margins.max_value},
                  {"argmin", v.margins.argmin},         {"negative", v.margins.negative},
                  {"positive", v.margins.positive},     {"positive_even", v.margins.positive_even},
                  {"positive_odd", v.margins.positive_odd}, {"indeterminate", v.margins.indeterminate}};
  if (v.witness) {
    const auto& w = *v.witness;
    nlohmann::json wj;
    wj["value"] = w.value;
    switch (w.kind) {
      case Witness::Kind::CoefficientIndex:
        wj["kind"] = "coefficient";
        wj["n"] = w.index;
        break;
      case Witness::Kind::Frequency:
        wj["kind"] = "frequency";
        wj["xi"] = w.frequency;
        break;
      case Witness::Kind::PointSet: {
        wj["kind"] = "points";
        auto pts = nlohmann::json::array();
        for (Eigen::Index i = 0; i < w.points.rows(); ++i) {
          std::vector<double> row(w.points.row(i).begin(), w.points.row(i).end());
          pts.push_back(row);
        }
        wj["points"] = pts;
        wj["eigenvector"] = std::vector<double>(w.eigenvector.begin(), w.eigenvector.end());
        break;
      }
    }
    j["witness"] = wj;
  } else {
    j["witness"] = nullptr;
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

nlohmann::json to_json(const ConverseTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"n", r.n}, {"theta", r.theta}, {"S_n", r.scaled_moment}, {"gap", r.gap},
                    {"converged", r.converged}});
  }
  return {{"x", t.x}, {"target", t.target}, {"rows", rows}, {"gaps_decreasing", t.gaps_decreasing}, {"note", t.note}};
}

void write_series_csv(std::ostream& os, const GegenbauerSeries& s) {
  os << "n,a_n,error\n";
  char buf[96];
  for (int n = 0; n <= s.nmax(); ++n) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.3e\n", n, s.coefficients[n], s.per_coeff_error[n]);
    os << buf;
  }
}

}  // namespace spherepd::pd
