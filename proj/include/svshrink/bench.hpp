#pragma once

// Synthetic benchmarks: X = L R^T with Gaussian factors plus white noise at a
// requested SNR, NMSE sweeps over rank x SNR, the C/K sensitivity sweep,
// timing comparisons, and the finite-n check of SVLET against the optimal
// bulk shrinker.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svshrink/random.hpp"
#include "svshrink/spectral.hpp"
#include "svshrink/sure.hpp"

namespace svshrink {

struct GeneratedProblem {
  Matrix signal;
  DenoiseProblem problem;
};

/// SNR is ||X||_F^2 / (n m sigma^2); sigma is set from the realized X so the
/// requested value holds exactly for every draw.
GeneratedProblem generate_problem(Index n, Index m, Index rank, double snr, Rng& rng);

/// (1/P) sum_p ||Xhat_p - X_p||_F^2 / ||X_p||_F^2
double nmse(std::span<const Matrix> estimates, std::span<const Matrix> truths);

enum class MethodKind {
  Svlet,
  SvstSure,
  AtnSure,
  SvltSure,
  OptimalShrink,
  SvhtAsymptotic,
  SvstBulk,
  EymOracle,
};

struct MethodSpec {
  MethodKind kind = MethodKind::Svlet;
  double constant = 10.0;  // SVLET only
  int order = 2;           // SVLET only

  /// "svlet" (C=10, K=2), "svlet-C5-K3", "svst-sure", "atn-sure", "svlt-sure",
  /// "opt-shrink", "svht-4/sqrt3", "svst-bulk", "eym-oracle".
  static MethodSpec parse(std::string_view text);
  std::string label() const;

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

std::vector<MethodSpec> all_methods();

struct DenoiseOutcome {
  Vector shrunk;  // new spectrum paired with the observed singular vectors
  Matrix estimate;
  std::optional<SureReport> report;
};

/// Runs one method on precomputed factors. `true_rank` is only used by the
/// EYM oracle.
DenoiseOutcome denoise(const MethodSpec& method, const DenoiseProblem& problem,
                       const SvdFactors& factors, Index true_rank, const SureOptions& opts = {});

struct ExperimentGrid {
  Index n = 50;
  Index m = 50;
  std::vector<Index> ranks;
  std::vector<double> snrs;
  int trials = 10;
  std::uint64_t seed = 0;
  std::vector<MethodSpec> methods;
  unsigned threads = 1;
  bool record_time = false;  // wall time is never reproducible; off keeps tables byte-stable
  SureOptions sure{};

  void validate() const;
};

struct NmseRow {
  std::string method;
  Index n;
  Index m;
  Index r;
  double snr;
  int trials;
  double nmse;
  double nmse_stderr;
  double median_time_s;
  std::string status;
};

struct NmseTable {
  std::vector<NmseRow> rows;
  std::uint64_t seed = 0;
  Index n = 0;
  Index m = 0;
  int trials = 0;
  std::string version;

  const NmseRow* find(std::string_view method, Index r, double snr) const;
};

NmseTable run_sweep(const ExperimentGrid& grid);

/// Header (method,n,m,r,snr,trials,nmse,nmse_stderr,median_time_s,status)
/// preceded by '#' metadata lines; the timestamp line is the only one that
/// varies between identical runs.
void write_table_csv(std::ostream& out, const NmseTable& table, std::string_view timestamp);
std::string utc_timestamp();

struct SensitivityCell {
  double constant;
  int order;
  double mean_nmse;  // averaged over every (rank, snr) cell
};

struct SensitivityResult {
  NmseTable table;  // one SVLET method per (C, K)
  std::vector<SensitivityCell> summary;
  SensitivityCell best;

  const SensitivityCell* find(double constant, int order) const;
  /// Mean over C of the per-(C, K) averages, for one K.
  double mean_over_constants(int order) const;
};

/// Every (C, K) pair sees the same draws as run_sweep on `base` would.
SensitivityResult sensitivity_sweep(const ExperimentGrid& base, const std::vector<double>& c_values,
                                    const std::vector<int>& k_values);

struct TimingRow {
  std::string method;
  double median_s;
  double ratio_to_svlet;  // NaN when SVLET is not among the methods
};

inline constexpr int kTimingRepeats = 3;

/// Serial, end-to-end (SVD, tuning, reconstruction) per-method medians over
/// draws. Each draw is timed kTimingRepeats times and the fastest run kept.
std::vector<TimingRow> timing_report(const ExperimentGrid& grid);

struct AsymptoticCheckOptions {
  std::vector<Index> n_values{200, 1000};
  std::vector<double> spikes{2.0, 3.0, 4.0};
  double beta = 1.0;
  int seeds = 5;
  std::uint64_t seed = 0;
  int order = 0;       // 0 selects K = r*
  double scale = 0.0;  // 0 selects T = upper bulk edge (calibrated units)
};

struct AsymptoticRow {
  Index n;
  int replicate;
  Index r_star;
  Index planted;  // spikes above the phase transition x > beta^(1/4)
  bool flagged;   // no spike above the bulk edge
  // Over the leading min(r*, planted) values; detections beyond the planted
  // spikes are noise values past the edge, where eta* is near zero.
  double max_rel_deviation;
  std::vector<double> observed;  // y_i, i < r*
  std::vector<double> svlet;     // bulk-restricted SVLET eta(y_i)
  std::vector<double> optimal;   // optimal bulk shrinker eta*(y_i)
};

struct AsymptoticReport {
  std::vector<AsymptoticRow> rows;
  std::vector<double> mean_deviation;  // per n_values entry, over unflagged replicates
  bool non_increasing;
};

/// Spiked model X = sum_k x_k u_k v_k^T, W_ij ~ N(0, 1/m), m = round(n / beta).
AsymptoticReport verify_asymptotic_optimality(const AsymptoticCheckOptions& opts);

}  // namespace svshrink
