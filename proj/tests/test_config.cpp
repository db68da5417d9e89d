#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>

#include <unistd.h>

#include "config.hpp"
#include "container.hpp"
#include "error.hpp"
#include "pipeline.hpp"

using namespace hypoctl;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kInvalidArgument;
}

fs::path temp_dir() {
  fs::path d = fs::temp_directory_path() / ("hypoctl_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("config parses dotted keys and comments") {
  const RunConfig c = RunConfig::parse(
      "# comment\n"
      "grid.points_x = 31   # trailing\n"
      "riccati.delta=0.15\n"
      "control.shapes = logistic:2, constant:1\n"
      "simulate.snapshot_times = 0, 2.5, 10\n"
      "initial.kind = rotated\n");
  CHECK(c.x_axis.points == 31);
  CHECK(c.delta == 0.15);
  CHECK(c.shapes.size() == 2);
  CHECK(c.snapshot_times == std::vector<double>{0, 2.5, 10});
  CHECK(c.initial.kind == InitialKind::kRotated);
}

TEST_CASE("config rejects bad input") {
  CHECK(code_of([] { RunConfig::parse("nope = 1\n"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { RunConfig::parse("riccati.delta = 0.1\nriccati.delta = 0.2\n"); }) ==
        ErrorCode::kConfig);
  CHECK(code_of([] { RunConfig::parse("riccati.delta = 0\n"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { RunConfig::parse("integrator.rtol = -1\n"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { RunConfig::parse("grid.points_x = 40\n"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { RunConfig::parse("riccati.delta = abc\n"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { RunConfig::parse("just text\n"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { RunConfig::parse("initial.kind = custom\ninitial.file = /nonexistent/x\n"); }) ==
        ErrorCode::kConfig);
  CHECK(code_of([] { RunConfig::parse("control.shapes = tabulated:/nonexistent.csv\n"); }) ==
        ErrorCode::kIo);
}

TEST_CASE("config text round-trips") {
  RunConfig c;
  c.set("grid.x_min", "-4.5");
  c.set("riccati.step_tol", "3e-7");
  c.set("simulate.snapshot_times", "1,2");
  const RunConfig back = RunConfig::parse(c.to_text());
  CHECK(back.entries() == c.entries());
}

TEST_CASE("problem metadata tracks the gain-relevant keys only") {
  RunConfig a;
  RunConfig b;
  b.set("integrator.rtol", "1e-8");
  CHECK(a.problem_metadata() == b.problem_metadata());
  b.set("riccati.delta", "0.1");
  const auto diff = metadata_diff(a.problem_metadata(), b.problem_metadata());
  REQUIRE(diff.size() == 1);
  CHECK(diff[0] == "riccati.delta: stored=0.2, expected=0.1");
}

TEST_CASE("tabulated shapes and grid values load from files") {
  const fs::path dir = temp_dir();
  {
    std::ofstream(dir / "shape.csv") << "x,alpha,alpha_prime\n-5,0,0\n0,0.5,0.2\n5,1,0\n";
    std::ofstream(dir / "cfg.txt") << "control.shapes = tabulated:shape.csv\n";
  }
  const RunConfig c = RunConfig::load((dir / "cfg.txt").string());
  REQUIRE(c.shapes.size() == 1);
  CHECK(c.shapes[0].evaluate(0.0).slope == doctest::Approx(0.2));
  {
    std::ofstream(dir / "vals.txt") << "1, 2\n3 4\n";
  }
  const Vector v = read_grid_values((dir / "vals.txt").string());
  CHECK(v.size() == 4);
  CHECK(v(3) == 4.0);
  fs::remove_all(dir);
}

TEST_CASE("shortest round-trip formatting") {
  for (double v : {0.1, 1e-5, -3.0, 1.0 / 3.0, 6.02e23}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.2) == "0.2");
  CHECK(format_csv_double(0.1) == "0.10000000000000001");
}

TEST_CASE("container round-trip") {
  Container c;
  c.metadata["grid.points_x"] = "41";
  c.metadata["note"] = "a b;c";
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, std::numeric_limits<double>::denorm_min();
  c.add("m", m);
  c.add("empty", Matrix(0, 4));
  const std::string bytes = encode_container(c);
  CHECK(bytes.substr(0, 7) == "HYPOCTL");
  const Container back = decode_container(bytes);
  CHECK(back.metadata == c.metadata);
  CHECK(back.array("m") == m);
  CHECK(back.array("empty").cols() == 4);
  CHECK(encode_container(back) == bytes);
  CHECK_FALSE(back.has("other"));
}

TEST_CASE("corrupt containers are rejected") {
  Container c;
  c.add("m", Matrix::Ones(3, 3));
  const std::string bytes = encode_container(c);
  CHECK(code_of([&] { decode_container(bytes.substr(0, bytes.size() - 1)); }) == ErrorCode::kIo);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK(code_of([&] { decode_container(bad); }) == ErrorCode::kIo);
  CHECK(code_of([&] { decode_container(bytes + "x"); }) == ErrorCode::kIo);
  CHECK(code_of([&] { read_container("/nonexistent/file.hcb"); }) == ErrorCode::kIo);
}

TEST_CASE("stored gain round-trips through a file") {
  StoredGain g;
  g.metadata = RunConfig().problem_metadata();
  g.pi = Matrix::Identity(3, 3);
  g.gain = Matrix::Ones(2, 3);
  g.s_hat = Vector::Unit(4, 0);
  g.closed_loop = ComplexVector::Constant(3, {-0.3, 0.1});
  g.history = {{1, 2.0, 1e-3, -0.1}, {2, 1e-7, 1e-15, -0.05}};
  g.residual = 1e-15;
  g.init_dimension = 2;
  const fs::path dir = temp_dir();
  const std::string path = (dir / "g.hcb").string();
  write_container(path, g.to_container());
  const StoredGain back = StoredGain::from_container(read_container(path));
  CHECK(back.metadata == g.metadata);
  CHECK(back.pi == g.pi);
  CHECK(back.gain == g.gain);
  CHECK(back.closed_loop == g.closed_loop);
  CHECK(back.history.size() == 2);
  CHECK(back.history[1].update_norm == 1e-7);
  CHECK(back.init_dimension == 2);
  CHECK(back.history_csv() == g.history_csv());
  CHECK(g.history_csv().rfind("k,update_norm,residual,abscissa\n", 0) == 0);
  fs::remove_all(dir);
}
