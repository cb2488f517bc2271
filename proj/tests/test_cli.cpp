#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "spherepd/cli.hpp"

using namespace spherepd::cli;

namespace {

struct Outcome {
  ExitCode code;
  std::string out;
  std::string err;
};

Outcome run_settings(const Settings& s) {
  std::ostringstream out, err;
  const auto code = run(config_from_settings(s), out, err);
  return {code, out.str(), err.str()};
}

// Data rows of a CSV report (header comments stripped).
std::vector<std::string> body(const std::string& report) {
  std::vector<std::string> rows;
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.starts_with("#")) rows.push_back(line);
  }
  return rows;
}

int shell(const std::string& args) {
  const std::string cmd = std::string(SPHEREPD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, FlatAndJsonFormsAgree) {
  const auto flat = parse_config_text(
      "# comment\ncommand = schoenberg\nkernel=trunc-power:theta=1,delta=2\nd=3\nnmax=40\n");
  const auto structured = parse_config_text(
      R"({"command": "schoenberg", "kernel": {"kind": "trunc-power", "theta": 1, "delta": 2},
          "d": 3, "numeric": {"nmax": 40}})");
  EXPECT_EQ(canonical_settings(config_from_settings(flat)), canonical_settings(config_from_settings(structured)));
  EXPECT_EQ(flat.at("kernel"), "trunc-power:theta=1,delta=2");
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(config_from_settings({{"command", "coeffs"}, {"kernel", "trunc-power:theta=1"}}), ConfigError);
  EXPECT_THROW(config_from_settings({{"command", "nope"}}), ConfigError);
  EXPECT_THROW(config_from_settings({{"command", "coeffs"}, {"kernel", "cos"}, {"nmax", "ten"}}), ConfigError);
  EXPECT_THROW(config_from_settings({{"command", "coeffs"}, {"kernel", "cos"}, {"theta", "1"}}), ConfigError);
  EXPECT_THROW(config_from_settings({{"command", "coeffs"}}), ConfigError);
  EXPECT_THROW(config_from_settings({{"command", "f-ell"}, {"d", "2"}}), ConfigError);
  EXPECT_THROW(config_from_settings({{"command", "bounds-audit"}, {"inequality", "bogus"}}), ConfigError);
  EXPECT_THROW(config_from_settings({{"command", "conjecture-sweep"}, {"d", "3"}}), ConfigError);
  EXPECT_THROW(parse_config_text("command schoenberg"), ConfigError);
  EXPECT_THROW(parse_config_text("{\"command\": "), ConfigError);
}

TEST(Config, CanonicalFormRoundTrips) {
  const auto c = config_from_settings({{"command", "gram"},
                                       {"kernel", "scaled:theta=0.5,inner=[trunc-power:theta=1,delta=2]"},
                                       {"d", "2"},
                                       {"points", "30"},
                                       {"trials", "2"},
                                       {"seed", "7"},
                                       {"threads", "3"},
                                       {"output", "ignored.csv"}});
  const auto canon = canonical_settings(c);
  EXPECT_FALSE(canon.contains("threads"));
  EXPECT_FALSE(canon.contains("output"));
  EXPECT_EQ(canon.at("tol"), "1e-08");
  EXPECT_EQ(canonical_settings(config_from_settings(canon)), canon);
  EXPECT_EQ(config_hash(config_from_settings(canon)), config_hash(c));
}

TEST(Hash, Fnv1a64ReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Run, SchoenbergTruncatedPowerIsPositiveDefinite) {
  const auto r = run_settings({{"command", "schoenberg"},
                               {"kernel", "trunc-power:theta=1,delta=2"},
                               {"d", "3"},
                               {"nmax", "300"}});
  EXPECT_EQ(r.code, ExitCode::Pass);
  EXPECT_NE(r.out.find("# status PD\n"), std::string::npos);
  EXPECT_EQ(body(r.out).size(), 302u);
}

TEST(Run, CosineCoefficients) {
  const auto r = run_settings({{"command", "coeffs"}, {"kernel", "cos"}, {"d", "2"}, {"nmax", "5"}});
  ASSERT_EQ(r.code, ExitCode::Pass);
  const auto rows = body(r.out);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], "n,a_n,error");
  for (int n = 0; n <= 5; ++n) {
    std::istringstream row(rows[n + 1]);
    std::string idx, value;
    std::getline(row, idx, ',');
    std::getline(row, value, ',');
    EXPECT_EQ(std::stoi(idx), n);
    EXPECT_NEAR(std::stod(value), n == 1 ? 2.0 / 3.0 : 0.0, 1e-10) << n;
  }
}

TEST(Run, FindingsAndConfigErrorsMapToExitCodes) {
  // P_2(cos t) - 1 on S^2: negative constant coefficient.
  const auto neg = run_settings(
      {{"command", "schoenberg"}, {"kernel", "gegenbauer-sum:lambda=0.5,coeffs=-1;0;1"}, {"d", "2"}, {"nmax", "6"}});
  EXPECT_EQ(neg.code, ExitCode::Finding);
  EXPECT_NE(neg.err.find("finding"), std::string::npos);

  const auto bad_sweep = run_settings({{"command", "conjecture-sweep"}, {"d", "4"}, {"thetas", "0.5"}});
  EXPECT_EQ(bad_sweep.code, ExitCode::ConfigError);

  std::ostringstream out, err;
  auto c = config_from_settings({{"command", "f-ell"}, {"d", "3"}, {"ell", "1"}});
  c.output = "/nonexistent-dir/report.csv";
  EXPECT_EQ(run(c, out, err), ExitCode::ConfigError);
}

TEST(Run, ReplayFromHeaderIsBitIdentical) {
  const Settings cases[] = {
      {{"command", "schoenberg"}, {"kernel", "trunc-power:theta=1.3,delta=2.5"}, {"d", "5"}, {"nmax", "60"}},
      {{"command", "gram"}, {"kernel", "trunc-power:theta=1,delta=2"}, {"d", "3"}, {"points", "40"},
       {"trials", "3"}, {"seed", "11"}},
      {{"command", "conjecture-sweep"}, {"d", "5"}, {"delta", "3"}, {"nmax", "30"}, {"theta_max", "3"},
       {"theta_count", "4"}},
      {{"command", "decompose"}, {"d", "7"}, {"nmax", "8"}},
      {{"command", "eval"}, {"kernel", "gaussian:scale=0.5,cutoff=2"}, {"points", "9"}},
      {{"command", "converse"}, {"kernel", "trunc-power:theta=1,delta=2"}, {"d", "3"}, {"n_list", "20,40"}},
  };
  for (const auto& s : cases) {
    const auto first = run_settings(s);
    ASSERT_NE(first.code, ExitCode::ConfigError) << first.err;
    const auto again = run_settings(settings_from_report(first.out));
    EXPECT_EQ(first.out, again.out) << s.at("command");

    auto js = s;
    js["format"] = "json";
    const auto json_first = run_settings(js);
    const auto json_again = run_settings(settings_from_report(json_first.out));
    EXPECT_EQ(json_first.out, json_again.out) << s.at("command");
  }
}

TEST(Run, ThreadCountDoesNotChangeOutput) {
  Settings s{{"command", "conjecture-sweep"}, {"d", "3"}, {"delta", "2"}, {"nmax", "60"}, {"thetas", "0.3,1,2,3"}};
  s["threads"] = "1";
  const auto one = run_settings(s);
  s["threads"] = "4";
  const auto four = run_settings(s);
  EXPECT_EQ(one.code, ExitCode::Pass);
  EXPECT_EQ(one.out, four.out);
}

TEST(Run, AuditOfSingleBound) {
  const auto r = run_settings({{"command", "bounds-audit"}, {"inequality", "legendre-envelope,small-argument"}});
  EXPECT_EQ(r.code, ExitCode::Pass);
  EXPECT_NE(r.out.find("# legendre-envelope 0 violations"), std::string::npos);
  EXPECT_NE(r.out.find("# small-argument 0 violations"), std::string::npos);
}

TEST(Binary, ExitCodes) {
  EXPECT_EQ(shell("schoenberg --kernel trunc-power:theta=1,delta=2 --d 3 --nmax 300"), 0);
  EXPECT_EQ(shell("coeffs --kernel cos --d 2 --nmax 5"), 0);
  EXPECT_EQ(shell("coeffs --kernel 'trunc-power:theta=1,delta' --d 3"), 3);
  EXPECT_EQ(shell("coeffs --kernel 'what:ever'"), 3);
  EXPECT_EQ(shell("coeffs --kernel cos --unknown-flag 1"), 3);
  EXPECT_EQ(shell("schoenberg --kernel 'gegenbauer-sum:lambda=0.5,coeffs=-1;0;1' --d 2 --nmax 6"), 1);
  EXPECT_EQ(shell("--help"), 0);
}

TEST(Binary, ConfigFileAndReplay) {
  const std::string dir = testing::TempDir();
  const std::string cfg = dir + "spherepd_cfg.txt";
  const std::string out1 = dir + "spherepd_out1.csv";
  const std::string out2 = dir + "spherepd_out2.csv";
  std::ofstream(cfg) << "command=coeffs\nkernel=trunc-power:theta=2,delta=1.5\nd=3\nnmax=20\n";
  ASSERT_EQ(shell("run --config " + cfg + " --output " + out1), 0);
  ASSERT_EQ(shell("replay " + out1 + " --output " + out2), 0);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  EXPECT_FALSE(slurp(out1).empty());
  EXPECT_EQ(slurp(out1), slurp(out2));
  EXPECT_EQ(shell("schoenberg --config " + cfg), 3);  // config names a different command
}
