// Copyright 2026 The hqr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hqr/hqr.hpp"

namespace hqr {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(HQR_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
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
           ("hqr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, GenIsDeterministic) {
  ASSERT_EQ(cli("gen uniform 500 --seed 7 -o " + path("a.txt")).status, 0);
  ASSERT_EQ(cli("gen uniform 500 --seed 7 -o " + path("b.txt")).status, 0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  std::ifstream in(path("a.txt"));
  EXPECT_EQ(read_beads(in).total_beads(), 500u);
}

TEST_F(Cli, GenShellOnUnitSphere) {
  ASSERT_EQ(cli("gen shell 100 -o " + path("s.txt")).status, 0);
  std::ifstream in(path("s.txt"));
  const MultiBodyModel m = read_beads(in);
  for (const auto& p : m.bodies[0].positions()) EXPECT_NEAR(p.norm(), 1.0, 1e-15);
}

TEST_F(Cli, GenRejectsUnknownKind) {
  EXPECT_EQ(cli("gen blob 10").status, 2);
  EXPECT_EQ(cli("gen uniform 0").status, 2);
}

TEST_F(Cli, ApplyMatchesLibraryAndRoundTrips) {
  ASSERT_EQ(cli("gen uniform 120 --seed 3 -o " + path("m.txt")).status, 0);
  const Eigen::VectorXd v = random_vector(360, 4);
  {
    std::ofstream out(path("v.txt"));
    write_vector(out, v);
  }
  const CliRun r = cli("apply " + path("m.txt") + " qv " + path("v.txt") + " --check -o " + path("w.txt"));
  ASSERT_EQ(r.status, 0) << r.out;
  const auto at = r.out.find("roundtrip max_abs_dev=");
  ASSERT_NE(at, std::string::npos);
  EXPECT_LE(std::stod(r.out.substr(at + 22)), 1e-12);

  std::ifstream bead_in(path("m.txt"));
  const MultiBodyOperator op(read_beads(bead_in));
  std::ifstream w_in(path("w.txt"));
  EXPECT_EQ(read_vector(w_in), op.apply(Op::Q, v));
}

TEST_F(Cli, QTildeOfTwoBeadsIsEmpty) {
  {
    std::ofstream out(path("two.txt"));
    out << "0 0 1\n0 0 -1\n";
    std::ofstream v(path("v.txt"));
    for (int i = 0; i < 6; ++i) v << i << '\n';
  }
  const CliRun r = cli("apply " + path("two.txt") + " qtilde_v " + path("v.txt") + " -o " + path("g.txt"));
  ASSERT_EQ(r.status, 0) << r.out;
  std::ifstream in(path("g.txt"));
  EXPECT_EQ(read_vector(in).size(), 0);
}

TEST_F(Cli, MultiBodyApplyIsBlockDiagonal) {
  MultiBodyModel multi;
  multi.bodies.emplace_back(generate_cloud(CloudKind::Uniform, 30, 1), 0);
  multi.bodies.emplace_back(generate_cloud(CloudKind::Grid, 12, 2), 1);
  {
    std::ofstream out(path("multi.txt"));
    write_beads(out, multi);
    std::ofstream v(path("v.txt"));
    write_vector(v, random_vector(126, 8));
  }
  ASSERT_EQ(cli("apply " + path("multi.txt") + " qtv " + path("v.txt") + " -o " + path("o.txt")).status, 0);
  std::ifstream in(path("o.txt"));
  const Eigen::VectorXd got = read_vector(in);
  const Eigen::VectorXd v = random_vector(126, 8);
  EXPECT_EQ(Eigen::VectorXd(got.head(90)), BodyOperator(multi.bodies[0]).apply(Op::QT, v.head(90)));
  EXPECT_EQ(Eigen::VectorXd(got.tail(36)), BodyOperator(multi.bodies[1]).apply(Op::QT, v.tail(36)));
}

TEST_F(Cli, ApplyLengthAndParseErrors) {
  ASSERT_EQ(cli("gen uniform 10 -o " + path("m.txt")).status, 0);
  {
    std::ofstream v(path("short.txt"));
    v << "1\n2\n";
    std::ofstream bad(path("bad.txt"));
    bad << "1 2 x\n";
  }
  EXPECT_EQ(cli("apply " + path("m.txt") + " qv " + path("short.txt")).status, 2);
  EXPECT_EQ(cli("apply " + path("bad.txt") + " qv " + path("short.txt")).status, 2);
  EXPECT_EQ(cli("apply " + path("m.txt") + " qq " + path("short.txt")).status, 2);
  EXPECT_EQ(cli("apply " + path("missing.txt") + " qv " + path("short.txt")).status, 2);
}

TEST_F(Cli, VerifyReports) {
  ASSERT_EQ(cli("gen uniform 500 --seed 1 -o " + path("u.txt")).status, 0);
  const CliRun r = cli("verify " + path("u.txt"));
  ASSERT_EQ(r.status, 0) << r.out;
  const auto line_at = r.out.find("\n500,");
  ASSERT_NE(line_at, std::string::npos);
  std::stringstream row(r.out.substr(line_at + 5, r.out.find('\n', line_at + 1) - line_at - 5));
  std::string cell;
  while (std::getline(row, cell, ',')) EXPECT_LE(std::stod(cell), 1e-12);
}

TEST_F(Cli, VerifyCollinearNotesComplement) {
  ASSERT_EQ(cli("gen line 50 -o " + path("l.txt")).status, 0);
  const CliRun r = cli("verify " + path("l.txt"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("rank(Z)=5 complement_dim=145"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("rank deficient"), std::string::npos);
}

TEST_F(Cli, VerifySingleBead) {
  {
    std::ofstream out(path("one.txt"));
    out << "1 2 3\n";
  }
  const CliRun r = cli("verify " + path("one.txt"));
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_NE(r.out.find("\n1,n/a,n/a,n/a,n/a,"), std::string::npos) << r.out;
}

TEST_F(Cli, DenseGuardTripsExitThree) {
  ASSERT_EQ(cli("gen uniform 100 -o " + path("u.txt")).status, 0);
  EXPECT_EQ(cli("dump-q " + path("u.txt") + " --dense --dense-guard 60").status, 3);
  EXPECT_EQ(cli("dump-q " + path("u.txt") + " -o " + path("q.txt")).status, 0);
  EXPECT_EQ(cli("dump-tree " + path("u.txt") + " -o " + path("t.txt")).status, 0);
}

TEST_F(Cli, BenchCsv) {
  const CliRun r = cli("bench --n 200,400 --repeats 1 --threads 2");
  ASSERT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out.rfind("n,explicit_s,", 0), 0u);
  EXPECT_NE(r.out.find("\nslope,"), std::string::npos);
}

}  // namespace
}  // namespace hqr
