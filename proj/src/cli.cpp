#include "spherepd/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "spherepd/conjecture_lab.hpp"
#include "spherepd/decomposition.hpp"
#include "spherepd/kernel_io.hpp"
#include "spherepd/pd_tester.hpp"

namespace spherepd::cli {

namespace {

using nlohmann::json;

constexpr std::pair<Command, std::string_view> kCommandNames[] = {
    {Command::Eval, "eval"},
    {Command::Coeffs, "coeffs"},
    {Command::Schoenberg, "schoenberg"},
    {Command::Bochner, "bochner"},
    {Command::Gram, "gram"},
    {Command::Decompose, "decompose"},
    {Command::FEll, "f-ell"},
    {Command::ConjectureSweep, "conjecture-sweep"},
    {Command::BoundsAudit, "bounds-audit"},
    {Command::Converse, "converse"},
};

// Keys read by each command beyond command/format/output/threads/seed.
std::vector<std::string> command_keys(Command c, std::string_view mode) {
  switch (c) {
    case Command::Eval: return {"kernel", "t", "points"};
    case Command::Coeffs:
    case Command::Schoenberg: return {"kernel", "d", "nmax", "tol"};
    case Command::Bochner: return {"kernel", "d", "xi_max", "xi_count", "tol"};
    case Command::Gram: return {"kernel", "d", "space", "points", "trials", "tol"};
    case Command::Decompose:
      if (mode == "refinement") return {"mode", "kernel", "d", "n", "theta", "levels", "tol"};
      return {"mode", "d", "nmax", "tol"};
    case Command::FEll: return {"d", "ell"};
    case Command::ConjectureSweep: return {"d", "delta", "n_min", "nmax", "thetas", "theta_max", "theta_count", "plot"};
    case Command::BoundsAudit: return {"inequality"};
    case Command::Converse: return {"kernel", "d", "x", "n_list"};
  }
  return {};
}

const std::set<std::string> kCommonKeys = {"command", "format", "output", "threads", "seed"};
// Keys that only affect where or how fast results are written.
const std::set<std::string> kNonCanonical = {"output", "threads", "plot"};

std::string fmt(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T x{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (v.empty() || ec != std::errc{} || p != end) throw ConfigError("'" + key + "': not a valid number: '" + v + "'");
  return x;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = std::min(v.find(',', start), v.size());
    std::string item = v.substr(start, comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(parse_number<T>(key, item));
    start = comma + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

int env_threads() {
  const char* v = std::getenv("SPHEREPD_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  const int t = parse_number<int>("SPHEREPD_THREADS", v);
  if (t < 1) throw ConfigError("SPHEREPD_THREADS must be >= 1");
  return t;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool odd_sphere(int d) { return d >= 3 && d % 2 == 1; }

int default_points(const RunConfig& c) { return c.command == Command::Gram ? 200 : 101; }

double default_tol(const RunConfig& c) {
  switch (c.command) {
    case Command::Gram: return 1e-8;
    case Command::Decompose: return c.mode == "refinement" ? 1e-8 : 1e-9;
    default: return 0.0;
  }
}

}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [cmd, name] : kCommandNames) {
    if (cmd == c) return name;
  }
  return "eval";
}

Command parse_command(std::string_view name) {
  for (const auto& [cmd, n] : kCommandNames) {
    if (n == name) return cmd;
  }
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::vector<std::string_view> command_names() {
  std::vector<std::string_view> out;
  for (const auto& entry : kCommandNames) out.push_back(entry.second);
  return out;
}

kernels::KernelSpec RunConfig::kernel_spec() const {
  try {
    return kernels::parse_kernel(kernel);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
}

RunConfig config_from_settings(const Settings& s) {
  RunConfig c;
  const auto cmd = s.find("command");
  require(cmd != s.end(), "missing 'command'");
  c.command = parse_command(cmd->second);
  if (auto it = s.find("mode"); it != s.end()) {
    require(it->second == "half-angle" || it->second == "refinement", "mode must be half-angle or refinement");
    c.mode = it->second;
  }
  const auto keys = command_keys(c.command, c.mode);
  for (const auto& [k, v] : s) {
    if (kCommonKeys.contains(k)) continue;
    require(std::find(keys.begin(), keys.end(), k) != keys.end(),
            "key '" + k + "' is not used by " + std::string(to_string(c.command)));
  }

  auto get = [&](const char* key) -> const std::string* {
    auto it = s.find(key);
    return it == s.end() ? nullptr : &it->second;
  };
  if (auto v = get("format")) {
    require(*v == "csv" || *v == "json", "format must be csv or json");
    c.format = *v == "csv" ? Format::Csv : Format::Json;
  }
  if (auto v = get("output")) c.output = *v;
  c.threads = env_threads();
  if (auto v = get("threads")) c.threads = parse_number<int>("threads", *v);
  require(c.threads >= 1, "threads must be >= 1");
  if (auto v = get("seed")) c.seed = parse_number<std::uint64_t>("seed", *v);

  if (auto v = get("kernel")) {
    c.kernel = *v;
    c.kernel = kernels::format_kernel(c.kernel_spec());
  } else if (std::find(keys.begin(), keys.end(), "kernel") != keys.end()) {
    throw ConfigError(std::string(to_string(c.command)) + " needs a kernel");
  }
  if (auto v = get("d")) c.d = parse_number<int>("d", *v);
  if (auto v = get("tol")) c.tol = parse_number<double>("tol", *v);
  if (auto v = get("nmax")) c.nmax = parse_number<int>("nmax", *v);
  if (auto v = get("t")) c.t = parse_list<double>("t", *v);
  if (auto v = get("points")) c.points = parse_number<int>("points", *v);
  if (auto v = get("xi_max")) c.xi_max = parse_number<double>("xi_max", *v);
  if (auto v = get("xi_count")) c.xi_count = parse_number<int>("xi_count", *v);
  if (auto v = get("space")) c.space = *v;
  if (auto v = get("trials")) c.trials = parse_number<int>("trials", *v);
  if (auto v = get("n")) c.n = parse_number<int>("n", *v);
  if (auto v = get("theta")) c.theta = parse_number<double>("theta", *v);
  if (auto v = get("levels")) c.levels = parse_number<int>("levels", *v);
  if (auto v = get("ell")) c.ell = parse_number<int>("ell", *v);
  if (auto v = get("delta")) c.delta = parse_number<double>("delta", *v);
  if (auto v = get("n_min")) c.n_min = parse_number<int>("n_min", *v);
  if (auto v = get("thetas")) c.thetas = parse_list<double>("thetas", *v);
  if (auto v = get("theta_max")) c.theta_max = parse_number<double>("theta_max", *v);
  if (auto v = get("theta_count")) c.theta_count = parse_number<int>("theta_count", *v);
  if (auto v = get("plot")) c.plot = *v;
  if (auto v = get("inequality")) c.inequality = *v;
  if (auto v = get("x")) c.x = parse_number<double>("x", *v);
  if (auto v = get("n_list")) c.n_list = parse_list<int>("n_list", *v);

  if (c.points == 0) c.points = default_points(c);
  if (c.tol == 0.0) c.tol = default_tol(c);
  if (c.command == Command::Converse && c.n_list.empty()) c.n_list = {50, 100, 200, 400};

  require(c.d >= 1, "d must be >= 1");
  require(c.nmax >= 0, "nmax must be >= 0");
  require(c.tol >= 0.0, "tol must be >= 0");
  require(c.points >= 1, "points must be >= 1");
  require(c.space == "sphere" || c.space == "euclidean", "space must be sphere or euclidean");
  switch (c.command) {
    case Command::Decompose:
    case Command::FEll:
      require(odd_sphere(c.d), "d must be odd and >= 3 so that lambda is an integer");
      break;
    case Command::ConjectureSweep:
      require(c.thetas.empty() != (c.theta_count == 0), "give either thetas or theta_max with theta_count");
      if (c.thetas.empty()) {
        require(c.theta_max > 0.0 && c.theta_count >= 1, "theta_max must be > 0 and theta_count >= 1");
      }
      break;
    case Command::BoundsAudit:
      if (c.inequality != "all") {
        std::size_t start = 0;
        while (start <= c.inequality.size()) {
          const auto comma = std::min(c.inequality.find(',', start), c.inequality.size());
          try {
            lab::parse_inequality(trim(c.inequality.substr(start, comma - start)));
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
          }
          start = comma + 1;
        }
      }
      break;
    default: break;
  }
  return c;
}

Settings canonical_settings(const RunConfig& c) {
  Settings s;
  s["command"] = std::string(to_string(c.command));
  s["format"] = c.format == Format::Csv ? "csv" : "json";
  s["seed"] = std::to_string(c.seed);
  for (const auto& k : command_keys(c.command, c.mode)) {
    if (kNonCanonical.contains(k)) continue;
    std::string v;
    if (k == "kernel") v = c.kernel;
    else if (k == "d") v = std::to_string(c.d);
    else if (k == "tol") v = fmt(c.tol);
    else if (k == "nmax") v = std::to_string(c.nmax);
    else if (k == "t") v = join(c.t);
    else if (k == "points") v = std::to_string(c.points);
    else if (k == "xi_max") v = fmt(c.xi_max);
    else if (k == "xi_count") v = std::to_string(c.xi_count);
    else if (k == "space") v = c.space;
    else if (k == "trials") v = std::to_string(c.trials);
    else if (k == "mode") v = c.mode;
    else if (k == "n") v = std::to_string(c.n);
    else if (k == "theta") v = fmt(c.theta);
    else if (k == "levels") v = std::to_string(c.levels);
    else if (k == "ell") v = std::to_string(c.ell);
    else if (k == "delta") v = fmt(c.delta);
    else if (k == "n_min") v = std::to_string(c.n_min);
    else if (k == "thetas") v = join(c.thetas);
    else if (k == "theta_max") v = c.thetas.empty() ? fmt(c.theta_max) : "";
    else if (k == "theta_count") v = c.thetas.empty() ? std::to_string(c.theta_count) : "";
    else if (k == "inequality") v = c.inequality;
    else if (k == "x") v = fmt(c.x);
    else if (k == "n_list") v = join(c.n_list);
    if (!v.empty()) s[k] = v;
  }
  return s;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& c) {
  std::string text;
  for (const auto& [k, v] : canonical_settings(c)) text += k + "=" + v + "\n";
  return fnv1a64(text);
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void flatten(const json& j, Settings& out) {
  for (const auto& [k, v] : j.items()) {
    if (k == "kernel" && v.is_object()) {
      try {
        out[k] = kernels::format_kernel(kernels::kernel_from_json(v));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("kernel: ") + e.what());
      }
    } else if (v.is_object()) {
      flatten(v, out);
    } else if (v.is_array()) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) {
        require(v[i].is_number(), "'" + k + "': list entries must be numbers");
        s += (i ? "," : "") + v[i].dump();
      }
      out[k] = s;
    } else if (v.is_string()) {
      out[k] = v.get<std::string>();
    } else {
      out[k] = v.dump();
    }
  }
}

}  // namespace

Settings parse_config_text(std::string_view text) {
  Settings out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config JSON: ") + e.what());
    }
    flatten(j, out);
    return out;
  }
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    const auto eq = l.find('=');
    require(eq != std::string::npos && eq > 0, "config line " + std::to_string(lineno) + ": expected key=value");
    out[trim(l.substr(0, eq))] = trim(l.substr(eq + 1));
  }
  return out;
}

Settings settings_from_report(std::string_view text) {
  Settings out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("report JSON: ") + e.what());
    }
    require(j.contains("config") && j["config"].is_object(), "report has no config member");
    for (const auto& [k, v] : j["config"].items()) out[k] = v.get<std::string>();
    return out;
  }
  std::istringstream in{std::string(text)};
  std::string line;
  constexpr std::string_view tag = "# config ";
  while (std::getline(in, line)) {
    if (!line.starts_with(tag)) continue;
    const std::string kv = line.substr(tag.size());
    const auto eq = kv.find('=');
    require(eq != std::string::npos, "malformed config line in report: " + line);
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  require(!out.empty(), "report carries no configuration header");
  return out;
}

namespace {

// One command's outcome. CSV output is the header, the summary lines and
// csv; JSON output wraps summary and result together with the metadata.
struct Report {
  ExitCode code = ExitCode::Pass;
  std::vector<std::pair<std::string, std::string>> summary;
  std::string csv;
  json result;
};

ExitCode verdict_code(const pd::PDVerdict& v, bool converged) {
  switch (v.status) {
    case pd::Status::NotPD: return ExitCode::Finding;
    case pd::Status::Inconclusive: return ExitCode::NonConvergence;
    default: return converged ? ExitCode::Pass : ExitCode::NonConvergence;
  }
}

void verdict_summary(Report& r, const pd::PDVerdict& v) {
  r.summary.emplace_back("status", pd::to_string(v.status));
  r.summary.emplace_back("min_value", fmt(v.margins.min_value));
  r.summary.emplace_back("argmin", fmt(v.margins.argmin));
  r.summary.emplace_back("negative", std::to_string(v.margins.negative));
  if (!v.note.empty()) r.summary.emplace_back("note", v.note);
}

std::string verdict_csv(std::string_view criterion, const pd::PDVerdict& v) {
  std::ostringstream os;
  os << "criterion,status,min_value,max_value,argmin,negative,positive,indeterminate,tol\n"
     << criterion << ',' << pd::to_string(v.status) << ',' << fmt(v.margins.min_value) << ','
     << fmt(v.margins.max_value) << ',' << fmt(v.margins.argmin) << ',' << v.margins.negative << ','
     << v.margins.positive << ',' << v.margins.indeterminate << ',' << fmt(v.tol) << '\n';
  return os.str();
}

Report run_eval(const RunConfig& c) {
  const auto g = c.kernel_spec();
  std::vector<double> ts = c.t;
  if (ts.empty()) {
    const double end = std::isfinite(g.support_end()) ? g.support_end() : std::numbers::pi;
    for (int i = 0; i < c.points; ++i) ts.push_back(c.points == 1 ? 0.0 : end * i / (c.points - 1));
  }
  Report r;
  std::ostringstream os;
  os << "t,g\n";
  json rows = json::array();
  for (double t : ts) {
    const double v = g(t);
    os << fmt(t) << ',' << fmt(v) << '\n';
    rows.push_back({{"t", t}, {"g", v}});
  }
  r.csv = os.str();
  r.result = {{"kernel", c.kernel}, {"values", rows}};
  return r;
}

Report run_coeffs(const RunConfig& c, bool test) {
  const auto g = c.kernel_spec();
  const auto series = pd::gegenbauer_coefficients(g, kernels::Dimension(c.d), c.nmax, c.tol);
  Report r;
  std::ostringstream os;
  pd::write_series_csv(os, series);
  r.csv = os.str();
  r.summary.emplace_back("converged", series.converged ? "true" : "false");
  r.summary.emplace_back("coefficient_tol", fmt(series.tol));
  r.summary.emplace_back("weighted_partial_sum", fmt(series.weighted_partial_sum));
  r.result = {{"coefficients", series.coefficients},
              {"errors", series.per_coeff_error},
              {"converged", series.converged},
              {"weighted_partial_sum", series.weighted_partial_sum}};
  r.code = series.converged ? ExitCode::Pass : ExitCode::NonConvergence;
  if (test) {
    const auto v = pd::schoenberg_test(series);
    verdict_summary(r, v);
    r.result["verdict"] = pd::to_json(v);
    r.code = verdict_code(v, series.converged);
  }
  return r;
}

Report run_bochner(const RunConfig& c) {
  const auto grid = pd::frequency_grid(c.xi_max, c.xi_count);
  const auto v = pd::bochner_test(c.kernel_spec(), kernels::Dimension(c.d), grid, c.tol, c.threads);
  Report r;
  verdict_summary(r, v);
  r.csv = verdict_csv("bochner", v);
  r.result = pd::to_json(v);
  r.code = verdict_code(v, true);
  return r;
}

Report run_gram(const RunConfig& c) {
  const auto space = c.space == "sphere" ? pd::Space::Sphere : pd::Space::Euclidean;
  const auto g = pd::gram_oracle(c.kernel_spec(), space, c.d, c.points, c.trials, c.seed, c.tol);
  Report r;
  verdict_summary(r, g.verdict);
  r.summary.emplace_back("min_eigenvalue", fmt(g.min_eigenvalue));
  r.csv = verdict_csv("gram", g.verdict);
  r.result = pd::to_json(g.verdict);
  r.result["min_eigenvalue"] = g.min_eigenvalue;
  r.code = verdict_code(g.verdict, true);
  return r;
}

Report run_decompose(const RunConfig& c) {
  const int lambda = (c.d - 1) / 2;
  Report r;
  if (c.mode == "refinement") {
    const auto ref = decomp::refinement_check(c.kernel_spec(), c.n, c.theta, lambda, c.levels);
    std::ostringstream os;
    os << "n,theta,levels,lhs,rhs,residual,converged\n"
       << c.n << ',' << fmt(c.theta) << ',' << c.levels << ',' << fmt(ref.lhs) << ',' << fmt(ref.rhs) << ','
       << fmt(ref.residual) << ',' << (ref.converged ? "true" : "false") << '\n';
    r.csv = os.str();
    r.summary.emplace_back("residual", fmt(ref.residual));
    r.result = {{"lhs", ref.lhs}, {"rhs", ref.rhs}, {"residual", ref.residual}, {"converged", ref.converged}};
    r.code = !ref.converged ? ExitCode::NonConvergence : ref.residual > c.tol ? ExitCode::Finding : ExitCode::Pass;
    return r;
  }
  std::vector<double> grid(101);
  for (int i = 0; i <= 100; ++i) grid[i] = std::numbers::pi * i / 100;
  std::vector<decomp::HalfAngleCoeffs> tables;
  double min_coeff = 0.0, worst = 0.0;
  json rows = json::array();
  for (int n = 0; n <= c.nmax; ++n) {
    tables.push_back(decomp::half_angle_coeffs(n, lambda));
    const double res = decomp::verify_half_angle(n, lambda, grid);
    worst = std::max(worst, res);
    const double lo = *std::min_element(tables.back().coeffs.begin(), tables.back().coeffs.end());
    min_coeff = n == 0 ? lo : std::min(min_coeff, lo);
    rows.push_back({{"n", n}, {"coefficients", tables.back().coeffs}, {"exact", tables.back().exact}, {"residual", res}});
  }
  std::ostringstream os;
  decomp::write_half_angle_csv(os, tables);
  r.csv = os.str();
  r.summary.emplace_back("min_coefficient", fmt(min_coeff));
  r.summary.emplace_back("max_identity_residual", fmt(worst));
  r.result = {{"lambda", lambda}, {"rows", rows}};
  r.code = min_coeff > 0.0 && worst <= c.tol ? ExitCode::Pass : ExitCode::Finding;
  return r;
}

Report run_f_ell(const RunConfig& c) {
  const auto table = decomp::f_ell_coeffs((c.d - 1) / 2, c.ell);
  Report r;
  std::ostringstream os;
  decomp::write_f_ell_csv(os, table);
  r.csv = os.str();
  r.result = {{"lambda", table.lambda}, {"ell", table.ell}, {"alpha", table.alpha}};
  return r;
}

Report run_sweep(const RunConfig& c) {
  lab::SweepConfig sc;
  sc.d = c.d;
  sc.delta = c.delta;
  sc.n_min = c.n_min;
  sc.n_max = c.nmax;
  sc.thetas = c.thetas;
  if (sc.thetas.empty()) {
    for (int k = 1; k <= c.theta_count; ++k) sc.thetas.push_back(c.theta_max * k / c.theta_count);
  }
  const auto rep = lab::sweep(sc, c.threads);
  if (!c.plot.empty()) {
    std::ofstream plot(c.plot);
    require(static_cast<bool>(plot), "cannot open plot file '" + c.plot + "'");
    lab::write_sweep_plot_csv(plot, rep);
  }
  Report r;
  std::ostringstream os;
  lab::write_sweep_csv(os, rep);
  r.csv = os.str();
  r.summary.emplace_back("min_value", fmt(rep.min_value));
  r.summary.emplace_back("argmin", std::to_string(rep.argmin_n) + "," + fmt(rep.argmin_theta));
  r.summary.emplace_back("failures", std::to_string(rep.failures.size()));
  r.summary.emplace_back("indeterminate", std::to_string(rep.indeterminate));
  r.summary.emplace_back("guaranteed", std::to_string(rep.guaranteed));
  r.summary.emplace_back("guarantee_theta", fmt(rep.guarantee_theta));
  r.result = lab::sweep_summary_json(rep);
  r.code = !rep.failures.empty()                          ? ExitCode::Finding
           : !rep.converged || rep.indeterminate > 0 ? ExitCode::NonConvergence
                                                          : ExitCode::Pass;
  return r;
}

Report run_audit(const RunConfig& c) {
  std::vector<lab::Inequality> ids;
  if (c.inequality == "all") {
    ids.assign(std::begin(lab::kAllInequalities), std::end(lab::kAllInequalities));
  } else {
    std::size_t start = 0;
    while (start <= c.inequality.size()) {
      const auto comma = std::min(c.inequality.find(',', start), c.inequality.size());
      ids.push_back(lab::parse_inequality(trim(c.inequality.substr(start, comma - start))));
      start = comma + 1;
    }
  }
  auto is_split = [](lab::Inequality id) {
    return id == lab::Inequality::JacobiTerm || id == lab::Inequality::LegendreTerm ||
           id == lab::Inequality::Principal || id == lab::Inequality::Scaled;
  };
  std::vector<lab::BoundAuditReport> reports;
  std::vector<lab::BoundAuditReport> split;
  for (auto id : lab::kAllInequalities) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) continue;
    if (is_split(id)) {
      // The four split bounds share one decomposition per grid point.
      if (split.empty()) split = lab::decomposition_audits(lab::default_audit_grid(id));
      for (auto& s : split) {
        if (s.id == id) reports.push_back(s);
      }
    } else {
      reports.push_back(lab::bounds_audit(id, lab::default_audit_grid(id)));
    }
  }
  Report r;
  std::ostringstream os;
  lab::write_audit_csv(os, reports);
  r.csv = os.str();
  r.result = json::array();
  int violations = 0;
  for (const auto& rep : reports) {
    r.summary.emplace_back(std::string(lab::to_string(rep.id)),
                           std::to_string(rep.violations()) + " violations, " + std::to_string(rep.skipped()) +
                               " skipped of " + std::to_string(rep.rows.size()));
    r.result.push_back(lab::to_json(rep));
    violations += rep.violations();
  }
  r.code = violations > 0 ? ExitCode::Finding : ExitCode::Pass;
  return r;
}

Report run_converse(const RunConfig& c) {
  const auto t = pd::converse_check(c.kernel_spec(), kernels::Dimension(c.d), c.x, c.n_list);
  Report r;
  std::ostringstream os;
  os << "n,theta,scaled_moment,gap,converged\n";
  bool converged = true;
  for (const auto& row : t.rows) {
    os << row.n << ',' << fmt(row.theta) << ',' << fmt(row.scaled_moment) << ',' << fmt(row.gap) << ','
       << (row.converged ? "true" : "false") << '\n';
    converged = converged && row.converged;
  }
  r.csv = os.str();
  r.summary.emplace_back("target", fmt(t.target));
  r.summary.emplace_back("gaps_decreasing", t.gaps_decreasing ? "true" : "false");
  if (!t.note.empty()) r.summary.emplace_back("note", t.note);
  r.result = pd::to_json(t);
  r.code = !converged ? ExitCode::NonConvergence : t.gaps_decreasing ? ExitCode::Pass : ExitCode::Finding;
  return r;
}

Report dispatch(const RunConfig& c) {
  switch (c.command) {
    case Command::Eval: return run_eval(c);
    case Command::Coeffs: return run_coeffs(c, false);
    case Command::Schoenberg: return run_coeffs(c, true);
    case Command::Bochner: return run_bochner(c);
    case Command::Gram: return run_gram(c);
    case Command::Decompose: return run_decompose(c);
    case Command::FEll: return run_f_ell(c);
    case Command::ConjectureSweep: return run_sweep(c);
    case Command::BoundsAudit: return run_audit(c);
    case Command::Converse: return run_converse(c);
  }
  throw ConfigError("unhandled command");
}

void emit(std::ostream& os, const RunConfig& c, const Report& r) {
  const auto settings = canonical_settings(c);
  const std::string hash = hex64(config_hash(c));
  if (c.format == Format::Json) {
    json summary = json::object();
    for (const auto& [k, v] : r.summary) summary[k] = v;
    const json doc = {{"spherepd", std::string(kVersion)},
                      {"config_hash", "fnv1a64:" + hash},
                      {"seed", c.seed},
                      {"config", settings},
                      {"exit_code", static_cast<int>(r.code)},
                      {"summary", summary},
                      {"result", r.result}};
    os << doc.dump(2) << '\n';
    return;
  }
  os << "# spherepd " << kVersion << '\n' << "# config_hash fnv1a64:" << hash << '\n' << "# seed " << c.seed << '\n';
  for (const auto& [k, v] : settings) os << "# config " << k << '=' << v << '\n';
  for (const auto& [k, v] : r.summary) os << "# " << k << ' ' << v << '\n';
  os << "# exit_code " << static_cast<int>(r.code) << '\n' << r.csv;
}

}  // namespace

ExitCode run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Report r;
  try {
    r = dispatch(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::ConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::ConfigError;
  } catch (const std::domain_error& e) {
    err << "config error: " << e.what() << '\n';
    return ExitCode::ConfigError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return ExitCode::NonConvergence;
  }
  if (config.output.empty()) {
    emit(out, config, r);
  } else {
    std::ofstream file(config.output);
    if (!file) {
      err << "config error: cannot open output file '" << config.output << "'\n";
      return ExitCode::ConfigError;
    }
    emit(file, config, r);
  }
  switch (r.code) {
    case ExitCode::Finding: err << "finding: " << to_string(config.command) << " reported a negative result\n"; break;
    case ExitCode::NonConvergence: err << "non-convergence: " << to_string(config.command) << " could not decide\n"; break;
    default: break;
  }
  return r.code;
}

}  // namespace spherepd::cli
