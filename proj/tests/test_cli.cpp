#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(MWSPARSE_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int count_lines_starting(const std::string& text, const std::string& prefix) {
  int n = 0;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) n += line.rfind(prefix, 0) == 0;
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mwsparse_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VerifyLemma2) {
  const Result r = run("verify lemma2 --k 3 --n 1 --m 3..6");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(count_lines_starting(r.out, "ExactPass  lemma2"), 4) << r.out;
  EXPECT_NE(r.out.find("337/25"), std::string::npos);
}

TEST_F(Cli, ConfigurationErrors) {
  EXPECT_EQ(run("verify lemma2 --k 2").code, 2);
  EXPECT_EQ(run("verify nonsense").code, 2);
  EXPECT_EQ(run("norms --K ''").code, 2);
  EXPECT_EQ(run("norms --K 10,5").code, 2);
  EXPECT_EQ(run("norms --epsilon 1/2").code, 2);
  EXPECT_EQ(run("verify eq2 --m 5..3").code, 2);
  EXPECT_EQ(run("verify eq2 --format xml").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(Cli, UnwritableOutput) {
  EXPECT_EQ(run("verify lemma2 --out " + (dir_ / "missing" / "x.json").string()).code, 3);
  std::ofstream(dir_ / "file") << "x";
  EXPECT_EQ(run("report --out " + (dir_ / "file" / "sub").string()).code, 3);
}

TEST_F(Cli, VerifyWritesJsonLinesAndCsv) {
  const fs::path jl = dir_ / "eq2.jsonl";
  ASSERT_EQ(run("verify eq2 --out " + jl.string()).code, 0);
  std::istringstream is(slurp(jl));
  int records = 0;
  for (std::string line; std::getline(is, line);) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["claim"], "eq2");
    EXPECT_EQ(j["verdict"], "ExactPass");
    ++records;
  }
  EXPECT_EQ(records, 15);
  const fs::path csv = dir_ / "eq2.csv";
  ASSERT_EQ(run("verify eq2 --format csv --out " + csv.string()).code, 0);
  const std::string text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "claim,params,verdict,lhs,rhs,bracket_lo,bracket_hi");
  EXPECT_EQ(count_lines_starting(text, "eq2,"), 15);
}

TEST_F(Cli, NormsTable) {
  const Result r = run("norms --K 10,20,40");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("K,f_norm_partial_lo", 0), 0u);
  EXPECT_EQ(count_lines_starting(r.out, "10,"), 1);
  const fs::path out = dir_ / "norms.json";
  ASSERT_EQ(run("norms --K 10,20 --format json --out " + out.string()).code, 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(out))["rows"].size() == 2);
}

TEST_F(Cli, ConfigFile) {
  const fs::path cfg = dir_ / "run.toml";
  std::ofstream(cfg) << "k = 4\nm = \"3..4\"\n";
  const Result r = run("verify lemma2 --config " + cfg.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(count_lines_starting(r.out, "ExactPass  lemma2 {\"n\":1,\"k\":4"), 2) << r.out;
}

TEST_F(Cli, ReportIsDeterministicApartFromRunField) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  ASSERT_EQ(run("report --out " + a.string()).code, 0);
  ASSERT_EQ(run("report --out " + b.string()).code, 0);
  for (const char* name : {"norms.csv", "rayleigh.csv"}) EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  auto ja = nlohmann::json::parse(slurp(a / "report.json"));
  auto jb = nlohmann::json::parse(slurp(b / "report.json"));
  EXPECT_TRUE(ja.contains("run"));
  ja.erase("run");
  jb.erase("run");
  EXPECT_EQ(ja, jb);
  EXPECT_EQ(ja["tool"], "mwsparse");
  EXPECT_GE(ja["records"].size(), 30u);
  const fs::path c = dir_ / "c";
  ASSERT_EQ(run("report --format csv --out " + c.string()).code, 0);
  EXPECT_TRUE(fs::exists(c / "norms.csv"));
  EXPECT_FALSE(fs::exists(c / "report.json"));
}
