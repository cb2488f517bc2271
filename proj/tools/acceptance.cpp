// Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime
// budgets are fixed here; exit status is 0 only when every selected
// criterion passes. Runs single-threaded.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spherepd/cli.hpp"
#include "spherepd/conjecture_lab.hpp"
#include "spherepd/decomposition.hpp"
#include "spherepd/kernels.hpp"
#include "spherepd/pd_tester.hpp"

namespace {

using namespace spherepd;
using kernels::Dimension;
using kernels::KernelSpec;

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok    " : "FAILED") + "  " + what);
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void budget(Outcome& o, const Stopwatch& w, double limit) {
  const double s = w.seconds();
  o.check(s < limit, "runtime " + sci(s) + " s < " + sci(limit) + " s");
}

// Half-angle coefficients: positivity and the expansion identity.
Outcome half_angle() {
  Stopwatch w;
  Outcome o;
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[i] = kPi * i / 100;
  double min_coeff = INFINITY, worst = 0.0;
  int nonpositive = 0;
  for (int lambda = 1; lambda <= 3; ++lambda) {
    for (int n = 0; n <= 50; ++n) {
      for (double a : decomp::half_angle_coeffs(n, lambda).coeffs) {
        min_coeff = std::min(min_coeff, a);
        nonpositive += a > 0.0 ? 0 : 1;
      }
      worst = std::max(worst, decomp::verify_half_angle(n, lambda, grid));
    }
  }
  o.check(nonpositive == 0, "all coefficients positive for lambda 1..3, n <= 50 (min " + sci(min_coeff) + ")");
  o.check(worst <= 1e-9, "max identity residual " + sci(worst) + " <= 1e-9 on 101-point grids");
  budget(o, w, 30.0);
  return o;
}

// Every bound audit, zero violations.
Outcome audits() {
  Stopwatch w;
  Outcome o;
  std::vector<lab::BoundAuditReport> reports =
      lab::decomposition_audits(lab::default_audit_grid(lab::Inequality::JacobiTerm));
  for (auto id : lab::kAllInequalities) {
    const bool split = id == lab::Inequality::JacobiTerm || id == lab::Inequality::LegendreTerm ||
                       id == lab::Inequality::Principal || id == lab::Inequality::Scaled;
    if (!split) reports.push_back(lab::bounds_audit(id, lab::default_audit_grid(id)));
  }
  for (const auto& r : reports) {
    double min_margin = INFINITY;
    int evaluated = 0;
    for (const auto& row : r.rows) {
      if (row.skipped) continue;
      ++evaluated;
      min_margin = std::min(min_margin, row.margin);
    }
    o.check(r.violations() == 0 && evaluated > 0,
            std::string(lab::to_string(r.id)) + ": " + std::to_string(r.violations()) + " violations in " +
                std::to_string(evaluated) + " rows, min margin " + sci(min_margin));
  }
  budget(o, w, 180.0);
  return o;
}

// The four-term split reproduces the target; the positive term is nonnegative.
Outcome split_identity() {
  Stopwatch w;
  Outcome o;
  double worst = 0.0, min_positive = INFINITY;
  int worst_n = 0, cells = 0;
  double worst_theta = 0.0;
  bool converged = true;
  for (int n = 1; n <= 100; ++n) {
    for (int k = 1; k <= 30; ++k) {
      const double theta = 0.05 * k;
      const auto d = lab::d2_decomposition(n, theta);
      ++cells;
      converged = converged && d.converged;
      const double rel = d.identity_residual / d.max_term();
      if (rel > worst) {
        worst = rel;
        worst_n = n;
        worst_theta = theta;
      }
      min_positive = std::min(min_positive, d.positive_term);
    }
  }
  o.check(worst <= 1e-8, "max relative identity residual " + sci(worst) + " <= 1e-8 over " + std::to_string(cells) +
                             " cells (worst n=" + std::to_string(worst_n) + ", theta=" + sci(worst_theta) + ")");
  o.check(min_positive >= -1e-12, "min positive term " + sci(min_positive) + " >= -1e-12");
  o.check(converged, "all decompositions converged");
  budget(o, w, 120.0);
  return o;
}

// Desk-scale sweeps: the proved three-sphere case and the small-theta two-sphere case.
Outcome sweeps() {
  Stopwatch w;
  Outcome o;
  lab::SweepConfig s3;
  s3.d = 3;
  s3.delta = 2.0;
  s3.n_max = 200;
  for (int k = 1; k <= 63; ++k) s3.thetas.push_back(k * kPi / 64);
  const auto r3 = lab::sweep(s3);
  std::size_t weak = 0;
  for (const auto& c : r3.cells) weak += c.value > 10.0 * c.abs_error ? 0 : 1;
  o.check(weak == 0 && r3.failures.empty() && r3.converged,
          "d=3, delta=2: " + std::to_string(r3.cells.size()) + " cells, min value " + sci(r3.min_value) +
              ", min value/error " + sci(r3.min_error_ratio) + ", " + std::to_string(weak) + " below 10x error");

  lab::SweepConfig s2;
  s2.d = 2;
  s2.delta = 1.5;
  s2.n_max = 500;
  s2.thetas = {1e-22, 1.2e-21, 1e-20, 1e-15, 1e-10, 1e-6, 1e-5, 1e-4, 2.5e-4, 5e-4, 7.5e-4, 1e-3};
  const auto r2 = lab::sweep(s2);
  const std::size_t exploratory = r2.cells.size() - r2.guaranteed;
  o.check(r2.failures.empty() && r2.indeterminate == 0 && r2.converged,
          "d=2, delta=3/2: " + std::to_string(r2.cells.size()) + " cells positive, min value " + sci(r2.min_value) +
              ", min value/error " + sci(r2.min_error_ratio));
  o.check(r2.guaranteed > 0 && exploratory > 0,
          std::to_string(r2.guaranteed) + " guaranteed (theta <= " + sci(r2.guarantee_theta) + "), " +
              std::to_string(exploratory) + " exploratory");
  budget(o, w, 300.0);
  return o;
}

// Schoenberg, Bochner and Gram verdicts agree on a fixed battery.
Outcome cross_agreement() {
  Stopwatch w;
  Outcome o;
  const Dimension dim(3);
  struct Entry {
    std::string name;
    KernelSpec g;
    bool pd;
  };
  const auto base = KernelSpec::truncated_power(1.0, 2.0);
  const std::vector<Entry> battery = {
      {"trunc-power(1, 2)", base, true},
      {"trunc-power(2.5, 2.5)", KernelSpec::truncated_power(2.5, 2.5), true},
      {"trunc-power(pi, 3)", KernelSpec::truncated_power(kPi, 3.0), true},
      {"sinc-power(trunc-power(1, 2), 3)", kernels::sinc_power_transform(base, 3), true},
      {"sinc-power(trunc-power(2, 2), 3)", kernels::sinc_power_transform(KernelSpec::truncated_power(2.0, 2.0), 3),
       true},
      {"gegenbauer-sum(1, 0.5, -0.3)", KernelSpec::gegenbauer_sum(1.0, {1.0, 0.5, -0.3}), false},
      {"gegenbauer-sum(1, -0.4)", KernelSpec::gegenbauer_sum(1.0, {1.0, -0.4}), false},
      {"gegenbauer-sum(-0.2, 1)", KernelSpec::gegenbauer_sum(1.0, {-0.2, 1.0}), false},
      {"gegenbauer-sum(0.5, 0.3, 0.2, -0.25)", KernelSpec::gegenbauer_sum(1.0, {0.5, 0.3, 0.2, -0.25}), false},
      {"gegenbauer-sum(1, 0, 0, 0, -0.5)", KernelSpec::gegenbauer_sum(1.0, {1.0, 0.0, 0.0, 0.0, -0.5}), false},
  };
  const auto grid = pd::frequency_grid(100.0, 400);
  for (const auto& e : battery) {
    const auto series = pd::gegenbauer_coefficients(e.g, dim, 200);
    const auto sch = pd::schoenberg_test(series);
    const auto gram = pd::gram_oracle(e.g, pd::Space::Sphere, 3, 200, 20, 20240601);
    const bool sch_pd = sch.status == pd::Status::PD || sch.status == pd::Status::PSD;
    const bool gram_neg = gram.verdict.status == pd::Status::NotPD;
    std::string line = e.name + ": schoenberg " + pd::to_string(sch.status) + ", gram " +
                       pd::to_string(gram.verdict.status) + " (min eigenvalue " + sci(gram.min_eigenvalue) + ")";
    bool ok = e.pd ? sch_pd && !gram_neg && gram.min_eigenvalue >= -1e-8 * e.g(0.0)
                   : sch.status == pd::Status::NotPD && gram_neg;
    // Bochner applies where a Euclidean verdict is meaningful: it must confirm
    // the Askey-range truncated powers and may never call an indefinite
    // sphere kernel Euclidean positive definite.
    if (e.g.kind() == "trunc-power" || !e.pd) {
      const auto boc = pd::bochner_test(e.g, dim, grid);
      line += ", bochner " + pd::to_string(boc.status);
      ok = ok && (e.pd ? boc.status == pd::Status::PD : boc.status != pd::Status::PD && boc.status != pd::Status::PSD);
    }
    o.check(ok, line);
  }
  budget(o, w, 300.0);
  return o;
}

// Transform identities.
Outcome transforms() {
  Stopwatch w;
  Outcome o;
  const auto ball = KernelSpec::truncated_power(1.0, 0.0);
  double worst = 0.0, worst_xi = 0.0;
  for (int k = 0; k <= 499; ++k) {
    const double xi = 0.1 + (50.0 - 0.1) * k / 499;
    const double exact = 4 * kPi * (std::sin(xi) - xi * std::cos(xi)) / (xi * xi * xi);
    const double rel = std::abs(pd::hankel_transform(ball, Dimension(3), xi, 1e-14).value - exact) / std::abs(exact);
    if (rel > worst) {
      worst = rel;
      worst_xi = xi;
    }
  }
  o.check(worst <= 1e-9, "ball indicator transform, 500 points on [0.1, 50]: max relative error " + sci(worst) +
                             " (xi=" + sci(worst_xi) + ")");

  double moment = 0.0;
  for (double theta : {1e-6, 1e-3, 0.01, 0.05, 0.5, 1.0, 2.0, kPi}) {
    const auto m = lab::small_argument_moment(theta);
    const double exact = 4.0 / 35.0 * theta * theta;
    moment = std::max(moment, std::abs(m.value - exact) / exact);
  }
  o.check(moment <= 1e-12, "small-argument moment equals (4/35) theta^2: max relative error " + sci(moment));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int dims[] = {2, 3, 5};
  const KernelSpec profiles[] = {KernelSpec::constant(1.0), KernelSpec::gegenbauer_sum(0.5, {1.0, -0.4, 0.2}),
                                 KernelSpec::truncated_power(2.0, 2.5)};
  double lift = 0.0;
  bool converged = true;
  for (int trial = 0; trial < 50; ++trial) {
    const double d2 = 0.05 + 2.5 * u(rng);
    const double d1 = d2 + 0.1 + 2.0 * u(rng);
    const double theta = 0.2 + (kPi - 0.2) * u(rng);
    const int n = static_cast<int>(12 * u(rng));
    const auto r = kernels::fractional_lift_check(profiles[trial % 3], d1, d2, theta, n, Dimension(dims[trial % 3]));
    converged = converged && r.converged;
    lift = std::max(lift, r.residual / std::abs(r.lhs));
  }
  o.check(lift <= 1e-8 && converged, "Beta lift, 50 random cases: max relative residual " + sci(lift));
  budget(o, w, 120.0);
  return o;
}

// Converse convergence table.
Outcome converse() {
  Stopwatch w;
  Outcome o;
  const int ns[] = {50, 100, 200, 400};
  const auto t = pd::converse_check(KernelSpec::truncated_power(1.0, 2.0), Dimension(3), 5.0, ns);
  std::string gaps;
  bool converged = true;
  for (const auto& r : t.rows) {
    gaps += (gaps.empty() ? "" : ", ") + std::to_string(r.n) + ": " + sci(r.gap);
    converged = converged && r.converged;
  }
  o.check(t.gaps_decreasing && converged, "gaps decrease (" + gaps + ")");
  const double final_share = t.rows.back().gap / std::abs(t.target);
  o.check(final_share <= 0.05, "final gap " + sci(100 * final_share) + "% of target " + sci(t.target) + " <= 5%");
  budget(o, w, 60.0);
  return o;
}

// Determinism; the runtime budget is checked by main over the whole run.
Outcome determinism() {
  Outcome o;
  const auto g = KernelSpec::truncated_power(1.2, 1.5);
  const auto a = pd::gram_oracle(g, pd::Space::Sphere, 2, 120, 4, 77);
  const auto b = pd::gram_oracle(g, pd::Space::Sphere, 2, 120, 4, 77);
  o.check(std::memcmp(&a.min_eigenvalue, &b.min_eigenvalue, sizeof(double)) == 0,
          "gram oracle bit-identical under a fixed seed");

  lab::SweepConfig s;
  s.d = 5;
  s.delta = 3.0;
  s.n_max = 80;
  s.thetas = {0.3, 1.1, 2.0, 2.9};
  std::ostringstream one, four;
  lab::write_sweep_csv(one, lab::sweep(s, 1));
  lab::write_sweep_csv(four, lab::sweep(s, 4));
  o.check(one.str() == four.str(), "sweep CSV identical for 1 and 4 workers");

  const auto config = cli::config_from_settings(
      {{"command", "schoenberg"}, {"kernel", "trunc-power:theta=1,delta=2"}, {"d", "3"}, {"nmax", "300"}});
  std::ostringstream first, second, err;
  cli::run(config, first, err);
  cli::run(cli::config_from_settings(cli::settings_from_report(first.str())), second, err);
  o.check(first.str() == second.str(), "report replayed from its header is byte-identical");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spherepd acceptance criteria"};
  std::vector<int> only;
  bool verbose = false;
  app.add_option("--only", only, "run only these criteria (1-8)")->check(CLI::Range(1, 8));
  app.add_flag("-v,--verbose", verbose, "print every check");
  CLI11_PARSE(app, argc, argv);

  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"half-angle coefficients", half_angle},
      {"bound audits", audits},
      {"four-term split identity", split_identity},
      {"positivity sweeps", sweeps},
      {"criterion cross-agreement", cross_agreement},
      {"transform identities", transforms},
      {"converse convergence", converse},
      {"runtime and determinism", determinism},
  };
  Stopwatch total;
  bool all = true;
  for (int i = 0; i < 8; ++i) {
    const int id = i + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Stopwatch w;
    Outcome o = criteria[i].second();
    if (id == 8 && only.empty()) budget(o, total, 600.0);
    std::printf("criterion %d %s  %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, w.seconds());
    for (const auto& d : o.details) {
      if (verbose || d.starts_with("FAILED")) std::printf("    %s\n", d.c_str());
    }
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
