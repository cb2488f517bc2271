#pragma once

// Batch front end: typed run configurations, their flat key=value and JSON
// text forms, and dispatch to the library operations.
//
// Every output starts with the tool version, an FNV-1a hash of the canonical
// configuration, the seed, and the canonical configuration itself, so a
// report can be replayed from its own header.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spherepd/kernels.hpp"

namespace spherepd::cli {

inline constexpr std::string_view kVersion = SPHEREPD_VERSION;

enum class Command { Eval, Coeffs, Schoenberg, Bochner, Gram, Decompose, FEll, ConjectureSweep, BoundsAudit, Converse };

std::string_view to_string(Command c);
/// Throws ConfigError for unknown names.
Command parse_command(std::string_view name);
std::vector<std::string_view> command_names();

enum class Format { Csv, Json };

enum class ExitCode : int { Pass = 0, Finding = 1, NonConvergence = 2, ConfigError = 3 };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raw settings: key -> textual value, as read from flags or a config file.
using Settings = std::map<std::string, std::string>;

struct RunConfig {
  Command command = Command::Eval;
  /// Canonical mini-language form; empty when the command takes no kernel.
  std::string kernel;
  int d = 2;

  double tol = 0.0;  // 0 selects the command's default
  int nmax = 100;
  std::uint64_t seed = 1;

  Format format = Format::Csv;
  /// Empty writes to the output stream passed to run(). Not part of the
  /// canonical configuration.
  std::string output;
  /// Worker count; results do not depend on it, so it is not canonical either.
  int threads = 1;

  // Command-specific parameters (see README for which command reads which).
  std::vector<double> t;
  int points = 0;
  double xi_max = 100.0;
  int xi_count = 400;
  std::string space = "sphere";
  int trials = 20;
  std::string mode = "half-angle";
  int n = 0;
  double theta = 1.0;
  int levels = 1;
  int ell = 1;
  double delta = 1.5;
  int n_min = 0;
  std::vector<double> thetas;
  double theta_max = 0.0;
  int theta_count = 0;
  std::string plot;
  std::string inequality = "all";
  double x = 5.0;
  std::vector<int> n_list;

  kernels::KernelSpec kernel_spec() const;
};

/// Validates settings against the command's key set; unknown or irrelevant
/// keys, malformed numbers and malformed kernels raise ConfigError.
/// `threads` defaults to SPHEREPD_THREADS when unset.
RunConfig config_from_settings(const Settings& s);

/// Keys relevant to the command with resolved values, threads and output
/// excluded. config_from_settings(canonical_settings(c)) reproduces c.
Settings canonical_settings(const RunConfig& c);

std::uint64_t fnv1a64(std::string_view bytes);
/// Hash of the canonical settings as "key=value\n" lines in key order.
std::uint64_t config_hash(const RunConfig& c);
std::string hex64(std::uint64_t h);

/// Flat "key=value" lines ('#' starts a comment) or a JSON object whose
/// nested objects are flattened and whose kernel may be structured.
Settings parse_config_text(std::string_view text);

/// Settings embedded in a previous report: "# config key=value" lines of a
/// CSV header, or the "config" member of a JSON report.
Settings settings_from_report(std::string_view text);

/// Runs the command. Reports go to config.output if set, otherwise to out;
/// diagnostics go to err. Never throws.
ExitCode run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace spherepd::cli
