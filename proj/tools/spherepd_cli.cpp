// spherepd: batch front end.
//
//   spherepd <command> [--key value ...] [--config FILE]
//   spherepd run --config FILE
//   spherepd replay REPORT
//
// Flags override values read from --config. Exit codes: 0 pass, 1 finding,
// 2 non-convergence, 3 configuration error.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "spherepd/cli.hpp"

namespace cli = spherepd::cli;

namespace {

constexpr int kConfigError = static_cast<int>(cli::ExitCode::ConfigError);

struct Keyed {
  std::string help;
  std::vector<std::string_view> commands;  // empty: every command
};

// Flag name (without dashes) -> help and the commands accepting it.
const std::map<std::string, Keyed> kFlags = {
    {"kernel", {"kernel mini-language, e.g. trunc-power:theta=1,delta=2",
                {"eval", "coeffs", "schoenberg", "bochner", "gram", "decompose", "converse"}}},
    {"d", {"dimension of the sphere or Euclidean space",
           {"coeffs", "schoenberg", "bochner", "gram", "decompose", "f-ell", "conjecture-sweep", "converse"}}},
    {"nmax", {"largest degree", {"coeffs", "schoenberg", "decompose", "conjecture-sweep"}}},
    {"tol", {"sign or residual tolerance (0: command default)", {"coeffs", "schoenberg", "bochner", "gram", "decompose"}}},
    {"t", {"comma-separated evaluation points", {"eval"}}},
    {"points", {"number of evaluation or sample points", {"eval", "gram"}}},
    {"xi_max", {"largest frequency", {"bochner"}}},
    {"xi_count", {"number of frequencies", {"bochner"}}},
    {"space", {"sphere or euclidean", {"gram"}}},
    {"trials", {"independent point sets", {"gram"}}},
    {"mode", {"half-angle or refinement", {"decompose"}}},
    {"n", {"degree", {"decompose"}}},
    {"theta", {"support radius", {"decompose"}}},
    {"levels", {"half-angle refinement levels", {"decompose"}}},
    {"ell", {"derivative order", {"f-ell"}}},
    {"delta", {"truncated-power exponent", {"conjecture-sweep"}}},
    {"n_min", {"smallest degree", {"conjecture-sweep"}}},
    {"thetas", {"comma-separated support radii", {"conjecture-sweep"}}},
    {"theta_max", {"largest radius of a uniform grid", {"conjecture-sweep"}}},
    {"theta_count", {"points of the uniform radius grid", {"conjecture-sweep"}}},
    {"plot", {"also write theta,min_value to this file", {"conjecture-sweep"}}},
    {"inequality", {"bound id, comma list, or all", {"bounds-audit"}}},
    {"x", {"limit argument", {"converse"}}},
    {"n_list", {"comma-separated degrees", {"converse"}}},
    {"format", {"csv or json", {}}},
    {"output", {"report path (default: stdout)", {}}},
    {"threads", {"worker threads (default: SPHEREPD_THREADS or 1)", {}}},
    {"seed", {"random seed", {}}},
};

const std::map<std::string_view, std::string> kAbout = {
    {"eval", "tabulate a kernel on [0, pi]"},
    {"coeffs", "Gegenbauer coefficients of a kernel on S^d"},
    {"schoenberg", "decide positive definiteness on S^d from the coefficients"},
    {"bochner", "decide positive definiteness on R^d from the Hankel transform"},
    {"gram", "randomized Gram-matrix check on S^d or R^d"},
    {"decompose", "half-angle coefficients or the refinement identity"},
    {"f-ell", "closed form of the iterated derivative profile"},
    {"conjecture-sweep", "coefficient signs of truncated powers over (n, theta)"},
    {"bounds-audit", "check the analytic bounds on a grid"},
    {"converse", "limit of rescaled coefficients for small support"},
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cli::ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive definiteness of isotropic kernels on spheres and Euclidean spaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kVersion));

  std::string config_path;
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, CLI::App*> subs;
  for (auto name : cli::command_names()) {
    const std::string cmd(name);
    auto* sub = app.add_subcommand(cmd, kAbout.at(name));
    sub->add_option("--config", config_path, "flat key=value or JSON config file");
    for (const auto& [flag, info] : kFlags) {
      if (!info.commands.empty() &&
          std::find(info.commands.begin(), info.commands.end(), name) == info.commands.end()) {
        continue;
      }
      sub->add_option("--" + flag, values[cmd][flag], info.help);
    }
    subs[cmd] = sub;
  }
  auto* run = app.add_subcommand("run", "run the configuration in a file");
  run->add_option("--config", config_path, "config file")->required();
  std::string run_output, run_threads;
  run->add_option("--output", run_output, "report path (default: stdout)");
  run->add_option("--threads", run_threads, "worker threads");
  std::string report_path;
  auto* replay = app.add_subcommand("replay", "rerun the configuration embedded in a report");
  replay->add_option("report", report_path, "CSV or JSON report")->required();
  replay->add_option("--output", run_output, "report path (default: stdout)");
  replay->add_option("--threads", run_threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    cli::Settings settings;
    if (replay->parsed()) {
      settings = cli::settings_from_report(read_file(report_path));
    } else if (!config_path.empty()) {
      settings = cli::parse_config_text(read_file(config_path));
    }
    if (run->parsed() || replay->parsed()) {
      if (!run_output.empty()) settings["output"] = run_output;
      if (!run_threads.empty()) settings["threads"] = run_threads;
    }
    for (const auto& [cmd, sub] : subs) {
      if (!sub->parsed()) continue;
      if (auto it = settings.find("command"); it != settings.end() && it->second != cmd) {
        throw cli::ConfigError("config file is for '" + it->second + "', not '" + cmd + "'");
      }
      settings["command"] = cmd;
      for (const auto& [flag, value] : values[cmd]) {
        if (sub->count("--" + flag) > 0) settings[flag] = value;
      }
    }
    const auto config = cli::config_from_settings(settings);
    return static_cast<int>(cli::run(config, std::cout, std::cerr));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}
