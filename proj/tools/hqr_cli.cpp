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
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hqr/hqr.hpp"

namespace {

using namespace hqr;

constexpr int kExitArgs = 2;
constexpr int kExitGuard = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SizeGuard:
    case ErrorCode::SingularH:
      return kExitGuard;
    default:
      return kExitArgs;
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::BadArgs, "cannot open " + path);
  return in;
}

MultiBodyModel load_beads(const std::string& path) {
  auto in = open_in(path);
  return read_beads(in);
}

// Writes to `path`, or stdout when it is empty or "-".
template <class F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::BadArgs, "cannot write " + path);
  write(out);
}

std::optional<Op> parse_op(const std::string& name) {
  if (name == "qv") return Op::Q;
  if (name == "qtv") return Op::QT;
  if (name == "qtilde_v") return Op::QTilde;
  if (name == "qtilde_tv") return Op::QTildeT;
  return std::nullopt;
}

Op inverse_of(Op op) {
  switch (op) {
    case Op::Q: return Op::QT;
    case Op::QT: return Op::Q;
    case Op::QTilde: return Op::QTildeT;
    case Op::QTildeT: return Op::QTilde;
  }
  return Op::Q;
}

struct GenArgs {
  std::string kind;
  int n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_gen(const GenArgs& a) {
  const auto kind = parse_cloud_kind(a.kind);
  if (!kind) throw Error(ErrorCode::BadArgs, "unknown cloud kind '" + a.kind + "'");
  MultiBodyModel multi;
  multi.bodies.emplace_back(generate_cloud(*kind, a.n, a.seed), 0);
  with_output(a.out, [&](std::ostream& os) {
    os << "# " << a.kind << " n=" << a.n << " seed=" << a.seed << '\n';
    write_beads(os, multi);
  });
}

struct ApplyArgs {
  std::string beads;
  std::string op;
  std::string vec;
  std::string out;
  bool check = false;
};

void cmd_apply(const ApplyArgs& a) {
  const auto op = parse_op(a.op);
  if (!op) throw Error(ErrorCode::BadArgs, "unknown op '" + a.op + "'");
  const MultiBodyOperator ops(load_beads(a.beads));
  auto in = open_in(a.vec);
  const Eigen::VectorXd v = read_vector(in);
  const Eigen::VectorXd result = multibody_apply(ops, *op, v);
  with_output(a.out, [&](std::ostream& os) {
    if (*op == Op::Q) {
      write_spectral(os, result, static_cast<std::size_t>(ops.input_size(Op::Q) / 3));
    } else {
      write_vector(os, result);
    }
  });
  if (a.check) {
    const Eigen::VectorXd back = multibody_apply(ops, inverse_of(*op), result);
    // Q~ ops only round-trip one way: Q~ Q~^T g = g.
    double dev = 0.0;
    if (*op == Op::QTilde) {
      const Eigen::VectorXd again = multibody_apply(ops, Op::QTilde, back);
      dev = result.size() ? (again - result).cwiseAbs().maxCoeff() : 0.0;
    } else {
      dev = v.size() ? (back - v).cwiseAbs().maxCoeff() : 0.0;
    }
    std::fprintf(stderr, "roundtrip max_abs_dev=%.3e\n", dev);
  }
}

struct VerifyArgs {
  std::string beads;
  int guard = kDefaultDenseGuard;
  std::uint64_t seed = 1;
};

void cmd_verify(const VerifyArgs& a) {
  const MultiBodyOperator ops(load_beads(a.beads));
  std::vector<OrthogonalityRow> rows;
  for (std::size_t j = 0; j < ops.bodies().size(); ++j) {
    const auto& body = ops.bodies()[j];
    OrthogonalityRow row = orthogonality_row(body, a.seed, a.guard);
    const int dim = 3 * body.n();
    std::fprintf(stderr, "# body %zu: n=%d rank(Z)=%d complement_dim=%d q_tilde_rows=%d\n", j,
                 body.n(), row.z_rank, dim - row.z_rank, std::max(0, dim - 6));
    if (body.n() >= 3 && row.z_rank < 6) {
      std::fprintf(stderr, "# body %zu: Z is rank deficient; Q~ spans %d of the %d complement directions\n",
                   j, dim - 6, dim - row.z_rank);
    }
    rows.push_back(row);
  }
  write_report_csv(std::cout, rows);
}

struct BenchArgs {
  std::vector<int> n = {500, 1000, 2000, 4000, 8000, 16000};
  int repeats = 10;
  std::uint64_t seed = 1;
  std::string out;
};

void cmd_bench(const BenchArgs& a) {
  const auto recs = run_bench(a.n, a.repeats, a.seed);
  with_output(a.out, [&](std::ostream& os) { write_bench_csv(os, recs); });
}

struct DumpArgs {
  std::string beads;
  std::string out;
  bool dense = false;
  int guard = kDefaultDenseGuard;
};

void cmd_dump_q(const DumpArgs& a) {
  const MultiBodyOperator ops(load_beads(a.beads));
  with_output(a.out, [&](std::ostream& os) {
    for (std::size_t j = 0; j < ops.bodies().size(); ++j) {
      os << "# body " << j << '\n';
      const HierQ q = ops.bodies()[j].explicit_q();
      if (!a.dense) {
        write_hierq(os, q);
        continue;
      }
      const Eigen::MatrixXd d = materialize_dense(q, ColumnOrder::Original, a.guard);
      const auto old = os.precision(17);
      for (Eigen::Index r = 0; r < d.rows(); ++r) {
        for (Eigen::Index c = 0; c < d.cols(); ++c) os << (c ? " " : "") << d(r, c);
        os << '\n';
      }
      os.precision(old);
    }
  });
}

void cmd_dump_tree(const DumpArgs& a) {
  const MultiBodyOperator ops(load_beads(a.beads));
  with_output(a.out, [&](std::ostream& os) {
    for (std::size_t j = 0; j < ops.bodies().size(); ++j) {
      os << "# body " << j << '\n';
      write_tree_dump(os, ops.bodies()[j].tree());
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical orthogonal factorization of bead-model rigid bodies"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  GenArgs gen;
  auto* sub_gen = app.add_subcommand("gen", "generate a bead cloud");
  sub_gen->add_option("kind", gen.kind, "uniform | shell | line | grid")->required();
  sub_gen->add_option("n", gen.n, "number of beads")->required()->check(CLI::PositiveNumber);
  sub_gen->add_option("--seed", gen.seed, "random seed");
  sub_gen->add_option("-o,--out", gen.out, "output file (default stdout)");

  ApplyArgs apply;
  auto* sub_apply = app.add_subcommand("apply", "apply Q, Q^T, Q~ or Q~^T to a vector");
  sub_apply->add_option("beads", apply.beads, "bead file")->required();
  sub_apply->add_option("op", apply.op, "qv | qtv | qtilde_v | qtilde_tv")->required();
  sub_apply->add_option("vector", apply.vec, "input vector file")->required();
  sub_apply->add_option("-o,--out", apply.out, "output file (default stdout)");
  sub_apply->add_flag("--check", apply.check, "print the round-trip deviation to stderr");

  VerifyArgs verify;
  auto* sub_verify = app.add_subcommand("verify", "orthogonality report as CSV");
  sub_verify->add_option("beads", verify.beads, "bead file")->required();
  sub_verify->add_option("--dense-guard", verify.guard, "skip Gram checks when 3n exceeds this");
  sub_verify->add_option("--seed", verify.seed, "seed for the probe vectors");

  BenchArgs bench;
  auto* sub_bench = app.add_subcommand("bench", "scaling benchmark as CSV");
  sub_bench->add_option("--n", bench.n, "bead counts")->delimiter(',');
  sub_bench->add_option("--repeats", bench.repeats, "runs per size; minimum time is kept")
      ->check(CLI::PositiveNumber);
  sub_bench->add_option("--seed", bench.seed, "cloud seed");
  sub_bench->add_option("-o,--out", bench.out, "output file (default stdout)");

  DumpArgs dump_q;
  auto* sub_dump_q = app.add_subcommand("dump-q", "write the explicit Q");
  sub_dump_q->add_option("beads", dump_q.beads, "bead file")->required();
  sub_dump_q->add_flag("--dense", dump_q.dense, "write the dense 3n x 3n matrix");
  sub_dump_q->add_option("--dense-guard", dump_q.guard, "largest 3n allowed with --dense");
  sub_dump_q->add_option("-o,--out", dump_q.out, "output file (default stdout)");

  DumpArgs dump_tree;
  auto* sub_dump_tree = app.add_subcommand("dump-tree", "write the bead tree");
  sub_dump_tree->add_option("beads", dump_tree.beads, "bead file")->required();
  sub_dump_tree->add_option("-o,--out", dump_tree.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgs;
  }

  try {
    if (*sub_gen) cmd_gen(gen);
    if (*sub_apply) cmd_apply(apply);
    if (*sub_verify) cmd_verify(verify);
    if (*sub_bench) cmd_bench(bench);
    if (*sub_dump_q) cmd_dump_q(dump_q);
    if (*sub_dump_tree) cmd_dump_tree(dump_tree);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  }
  return 0;
}
