#pragma once

// Flat `key = value` configuration for the bench subcommand.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "svshrink/bench.hpp"

namespace svshrink::cli {

struct BenchConfig {
  Index n = 50;
  Index m = 50;
  std::vector<Index> ranks{1, 10, 25, 50};
  std::vector<double> snrs{0.5, 1.0, 2.0, 4.0};
  int trials = 10;
  std::vector<std::string> methods{"svlet"};
  double constant = 10.0;  // C for plain "svlet"
  int order = 2;           // K for plain "svlet"
  bool sensitivity = false;
  std::vector<double> c_values{1, 2, 5, 10, 15, 20};
  std::vector<int> k_values{1, 2, 3, 4, 5};
  bool timing = false;
  bool record_time = false;
  std::filesystem::path output_dir = "bench_out";
  Tolerances tol{};
  bool jitter = false;

  /// Builds the experiment grid; seed and threads come from the command line.
  ExperimentGrid grid(std::uint64_t seed, unsigned threads) const;
};

/// 50x50, every rank 1..50, SNR {0.5, 1, 1.5, 2, 4}, ten trials, all methods,
/// plus the C in [1, 20] x K in [1, 5] sensitivity sweep.
BenchConfig reference_preset();

/// Applies the `key = value` lines of `in` on top of `base`. Unknown keys and
/// malformed values throw ParseError with the line number.
BenchConfig parse_config(std::istream& in, BenchConfig base = {});
BenchConfig load_config(const std::filesystem::path& path, BenchConfig base = {});

// "1:5,8" -> {1, 2, 3, 4, 5, 8}
std::vector<Index> parse_index_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace svshrink::cli
