#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/oracles.hpp"
#include "svshrink/errors.hpp"
#include "svshrink/matrix_io.hpp"

using namespace svshrink;

namespace {

Matrix parse(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix(in);
}

std::size_t parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("5x7 random matrix survives a file round trip") {
  std::mt19937_64 gen(1);
  const Matrix M = oracle::gaussian_matrix(5, 7, gen);
  const auto path = std::filesystem::path(oracle::scratch_dir("io")) / "m.csv";
  write_matrix(path, M);
  const Matrix back = read_matrix(path);
  REQUIRE(back.rows() == 5);
  REQUIRE(back.cols() == 7);
  CHECK((back - M).norm() / M.norm() <= 1e-15);
  CHECK(back == M);
}

TEST_CASE("ragged row names the offending line") {
  const std::string text = "1,2,3\n4,5,6\n7,8\n";
  CHECK_THROWS_AS(parse(text), ParseError);
  CHECK(parse_error_line(text) == 3);
  try {
    parse(text);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("empty input is a parse error") {
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("\n\n"), ParseError);
}

TEST_CASE("non-numeric tokens are rejected with their line") {
  CHECK_THROWS_AS(parse("1,2\n3,abc\n"), ParseError);
  CHECK(parse_error_line("1,2\n3,abc\n") == 2);
  CHECK(parse_error_line("1,,2\n") == 1);
  CHECK(parse_error_line("1,2x\n") == 1);
}

TEST_CASE("accepted syntax") {
  const Matrix M = parse("1, -2.5e3\r\n\n+3,4\n");
  REQUIRE(M.rows() == 2);
  REQUIRE(M.cols() == 2);
  CHECK(M(0, 1) == -2500.0);
  CHECK(M(1, 0) == 3.0);
}

TEST_CASE("missing files are contract errors") {
  CHECK_THROWS_AS(read_matrix("/nonexistent/dir/m.csv"), ContractError);
}

TEST_CASE("write/read is bit-exact for arbitrary doubles") {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<std::uint64_t> bits;
  std::uniform_int_distribution<int> dim(1, 12);
  for (int t = 0; t < 200; ++t) {
    Matrix M(dim(gen), dim(gen));
    for (Index i = 0; i < M.size(); ++i) {
      double v;
      do {
        const std::uint64_t b = bits(gen);
        std::memcpy(&v, &b, sizeof v);
      } while (!std::isfinite(v));
      M.data()[i] = v;
    }
    std::ostringstream out;
    format_matrix(out, M);
    std::istringstream in(out.str());
    const Matrix back = parse_matrix(in);
    REQUIRE(back.rows() == M.rows());
    REQUIRE(back.cols() == M.cols());
    REQUIRE(std::memcmp(back.data(), M.data(), sizeof(double) * M.size()) == 0);
  }
}

TEST_CASE("extreme values round trip") {
  Matrix M(1, 6);
  M << std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max(),
      std::numeric_limits<double>::lowest(), -0.0, 1e-300, 0.1;
  std::ostringstream out;
  format_matrix(out, M);
  std::istringstream in(out.str());
  const Matrix back = parse_matrix(in);
  CHECK(std::memcmp(back.data(), M.data(), sizeof(double) * M.size()) == 0);
  CHECK(format_double(0.1) == "0.10000000000000001");
}
