// SPDX-FileCopyrightText: Copyright (c) 2026 The ust3d Authors. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(UST3D_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  Result r;
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ust3d_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string file(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, BetaSmoke) {
  const auto r = run("beta --radii 8,16 --trials 50 --seed 3 --manifest " + file("m.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "n,mean,stderr,trials");
  const auto m = slurp(file("m.json"));
  EXPECT_NE(m.find("\"seed\": 3"), std::string::npos);
  EXPECT_NE(m.find("\"command\""), std::string::npos);
}

TEST_F(Cli, SameSeedSameBytes) {
  const auto a = run("sample -R 4 --seed 11");
  const auto b = run("sample -R 4 --seed 11 --jobs 2");
  const auto c = run("sample -R 4 --seed 12");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST_F(Cli, HeatKernelOnSingleEdge) {
  {
    std::ofstream t(file("edge.tree"));
    t << "ust3d-tree v1 2 0 -1 0\n1 0 0 0 0 0\n";
  }
  const auto odd = run("hk --exact --n 3 --tree " + file("edge.tree") + " --manifest " + file("m.json"));
  ASSERT_EQ(odd.code, 0) << odd.out;
  EXPECT_EQ(odd.out, "n,value,stderr\n3,0,0\n");
  const auto even = run("hk --exact --n 4 --tree " + file("edge.tree") + " --manifest " + file("m.json"));
  EXPECT_EQ(even.out, "n,value,stderr\n4,1,0\n");
}

TEST_F(Cli, SampleThenBall) {
  ASSERT_EQ(run("sample -R 6 --seed 2 --out " + file("t.tree")).code, 0);
  const auto r = run("ball --tree " + file("t.tree") + " --radii 1,2,3");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "r,volume,clipped");
  EXPECT_TRUE(fs::exists(file("t.tree.json")));
}

TEST_F(Cli, SpiralRows) {
  const auto r = run("spiral --N 2 --m 4");
  ASSERT_EQ(r.code, 0);
  std::size_t lines = 0;
  for (char ch : r.out) lines += ch == '\n';
  EXPECT_EQ(lines, 37u);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("beta --radii 8,16 --bogus").code, 1);
  EXPECT_EQ(run("beta --radii 16,8").code, 1);
  EXPECT_EQ(run("ball --tree " + file("missing.tree") + " --radii 1").code, 1);
  EXPECT_EQ(run("spiral --N 0").code, 1);
}
