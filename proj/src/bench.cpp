#include "svshrink/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <functional>
#include <limits>
#include <ostream>
#include <thread>

#include "svshrink/errors.hpp"
#include "svshrink/matrix_io.hpp"
#include "svshrink/rmt.hpp"
#include "svshrink/shrinkage.hpp"

namespace svshrink {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct MeanStderr {
  double mean;
  double stderr_;
};

MeanStderr mean_stderr(const std::vector<double>& v) {
  const double p = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= p;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (p - 1.0) / p)};
}

double squared_error_ratio(const Matrix& estimate, const Matrix& truth) {
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) throw ContractError("NMSE needs a non-zero signal matrix");
  return (estimate - truth).squaredNorm() / denom;
}

// Keeps CSV cells comma- and newline-free.
std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

// Runs task(i) for i in [0, count) on up to `threads` workers. Exceptions
// propagate after all workers join.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) task(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

GeneratedProblem generate_problem(Index n, Index m, Index rank, double snr, Rng& rng) {
  if (n < 1 || m < 1) throw DimensionError("matrix dimensions must be positive");
  if (rank < 1 || rank > std::min(n, m)) throw RangeError("rank must lie in [1, min(n, m)]");
  if (!(snr > 0.0) || !std::isfinite(snr)) throw ContractError("snr must be > 0");
  const Matrix left = rng.gaussian(n, rank);
  const Matrix right = rng.gaussian(m, rank);
  Matrix signal = left * right.transpose();
  const double sigma = signal.norm() / std::sqrt(snr * static_cast<double>(n) * static_cast<double>(m));
  Matrix observed = signal + sigma * rng.gaussian(n, m);
  return {std::move(signal), DenoiseProblem(std::move(observed), sigma)};
}

double nmse(std::span<const Matrix> estimates, std::span<const Matrix> truths) {
  if (estimates.empty() || estimates.size() != truths.size()) {
    throw ContractError("NMSE needs equal-length, non-empty lists");
  }
  double total = 0.0;
  for (std::size_t p = 0; p < estimates.size(); ++p) {
    if (estimates[p].rows() != truths[p].rows() || estimates[p].cols() != truths[p].cols()) {
      throw DimensionError("NMSE shape mismatch at realization " + std::to_string(p));
    }
    total += squared_error_ratio(estimates[p], truths[p]);
  }
  return total / static_cast<double>(estimates.size());
}

MethodSpec MethodSpec::parse(std::string_view text) {
  if (text == "svlet") return {};
  if (text == "svst-sure") return {MethodKind::SvstSure};
  if (text == "atn-sure") return {MethodKind::AtnSure};
  if (text == "svlt-sure") return {MethodKind::SvltSure};
  if (text == "opt-shrink") return {MethodKind::OptimalShrink};
  if (text == "svht-4/sqrt3") return {MethodKind::SvhtAsymptotic};
  if (text == "svst-bulk") return {MethodKind::SvstBulk};
  if (text == "eym-oracle") return {MethodKind::EymOracle};
  if (text.starts_with("svlet-C")) {
    const auto k_pos = text.rfind("-K");
    if (k_pos != std::string_view::npos && k_pos > 7) {
      try {
        const std::string c_text(text.substr(7, k_pos - 7));
        const std::string k_text(text.substr(k_pos + 2));
        std::size_t used_c = 0, used_k = 0;
        const double c = std::stod(c_text, &used_c);
        const int k = std::stoi(k_text, &used_k);
        if (used_c == c_text.size() && used_k == k_text.size() && c > 0.0 && k >= 1) {
          return {MethodKind::Svlet, c, k};
        }
      } catch (const std::exception&) {
      }
    }
  }
  throw ContractError("unknown method '" + std::string(text) + "'");
}

std::string MethodSpec::label() const {
  switch (kind) {
    case MethodKind::Svlet:
      return "svlet-C" + format_double(constant) + "-K" + std::to_string(order);
    case MethodKind::SvstSure: return "svst-sure";
    case MethodKind::AtnSure: return "atn-sure";
    case MethodKind::SvltSure: return "svlt-sure";
    case MethodKind::OptimalShrink: return "opt-shrink";
    case MethodKind::SvhtAsymptotic: return "svht-4/sqrt3";
    case MethodKind::SvstBulk: return "svst-bulk";
    case MethodKind::EymOracle: return "eym-oracle";
  }
  return "?";
}

std::vector<MethodSpec> all_methods() {
  return {{MethodKind::Svlet},          {MethodKind::SvstSure},       {MethodKind::AtnSure},
          {MethodKind::SvltSure},       {MethodKind::OptimalShrink},  {MethodKind::SvhtAsymptotic},
          {MethodKind::SvstBulk},       {MethodKind::EymOracle}};
}

DenoiseOutcome denoise(const MethodSpec& method, const DenoiseProblem& problem,
                       const SvdFactors& factors, Index true_rank, const SureOptions& opts) {
  const MatrixShape shape = problem.shape();
  auto tuned = [&](TunableFamily family) {
    const SureEvaluator eval(factors.S, shape, problem.sigma(), opts);
    SureReport report = tune_grid(eval, family, GridSpec::defaults(family, factors.S));
    Vector shrunk = apply(report.rule, factors.S);
    return DenoiseOutcome{shrunk, reconstruct(factors, shrunk), std::move(report)};
  };
  auto asymptotic = [&](AsymptoticVariant variant) {
    Vector shrunk = asymptotic_spectrum(factors.S, shape, problem.sigma(), variant);
    return DenoiseOutcome{shrunk, reconstruct(factors, shrunk), std::nullopt};
  };

  switch (method.kind) {
    case MethodKind::Svlet: {
      SvletSolve solved = solve_svlet(problem, factors, method.order, method.constant, opts);
      Vector shrunk = apply(ShrinkageRule::svlet(solved.basis), factors.S);
      return {shrunk, reconstruct(factors, shrunk), std::move(solved.report)};
    }
    case MethodKind::SvstSure: return tuned(TunableFamily::Svst);
    case MethodKind::AtnSure: return tuned(TunableFamily::Atn);
    case MethodKind::SvltSure: return tuned(TunableFamily::Svlt);
    case MethodKind::OptimalShrink: return asymptotic(AsymptoticVariant::OptimalShrink);
    case MethodKind::SvhtAsymptotic: return asymptotic(AsymptoticVariant::HardThreshold);
    case MethodKind::SvstBulk: return asymptotic(AsymptoticVariant::SoftThresholdBulk);
    case MethodKind::EymOracle: {
      Vector shrunk = factors.S;
      shrunk.tail(shrunk.size() - std::min(true_rank, shrunk.size())).setZero();
      return {shrunk, eym_truncate(factors, true_rank), std::nullopt};
    }
  }
  throw ContractError("unknown method");
}

void ExperimentGrid::validate() const {
  (void)MatrixShape(n, m);
  if (trials < 1) throw ContractError("trials must be >= 1");
  if (ranks.empty()) throw ContractError("rank list is empty");
  if (snrs.empty()) throw ContractError("SNR list is empty");
  if (methods.empty()) throw ContractError("method list is empty");
  const Index L = std::min(n, m);
  for (Index r : ranks) {
    if (r < 1 || r > L) throw RangeError("rank " + std::to_string(r) + " outside [1, min(n, m)]");
  }
  for (double s : snrs) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ContractError("SNR values must be > 0");
  }
}

const NmseRow* NmseTable::find(std::string_view method, Index r, double snr) const {
  for (const auto& row : rows) {
    if (row.method == method && row.r == r && row.snr == snr) return &row;
  }
  return nullptr;
}

namespace {

struct CellResult {
  std::vector<std::vector<double>> ratios;  // [method][trial]
  std::vector<std::vector<double>> times;
  std::vector<std::string> errors;          // per method, empty if fine
};

// Evaluates `evaluate(problem, factors, truth)` -> per-method ratios for one
// (rank, snr) cell over all trials.
template <class PerTrial>
CellResult run_cell(const ExperimentGrid& grid, std::size_t cell, Index rank, double snr,
                    std::size_t method_count, PerTrial&& per_trial) {
  CellResult out{std::vector<std::vector<double>>(method_count),
                 std::vector<std::vector<double>>(method_count),
                 std::vector<std::string>(method_count)};
  for (int t = 0; t < grid.trials; ++t) {
    Rng rng = Rng::stream(grid.seed, cell, static_cast<std::uint64_t>(t));
    try {
      GeneratedProblem gen = generate_problem(grid.n, grid.m, rank, snr, rng);
      const auto start = Clock::now();
      const SvdFactors factors = svd(gen.problem.observed());
      const double svd_time = seconds_since(start);
      per_trial(gen, factors, svd_time, out);
    } catch (const std::exception& e) {
      for (auto& err : out.errors) {
        if (err.empty()) err = e.what();
      }
    }
  }
  return out;
}

NmseTable assemble(const ExperimentGrid& grid, const std::vector<std::string>& labels,
                   const std::vector<CellResult>& cells) {
  NmseTable table;
  table.seed = grid.seed;
  table.n = grid.n;
  table.m = grid.m;
  table.trials = grid.trials;
  table.version = SVSHRINK_VERSION;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    for (std::size_t ri = 0; ri < grid.ranks.size(); ++ri) {
      for (std::size_t si = 0; si < grid.snrs.size(); ++si) {
        const CellResult& c = cells[ri * grid.snrs.size() + si];
        NmseRow row{labels[k], grid.n, grid.m, grid.ranks[ri], grid.snrs[si], grid.trials,
                    kNaN,      kNaN,   kNaN,   "ok"};
        if (!c.errors[k].empty()) {
          row.status = "error: " + sanitize(c.errors[k]);
        } else {
          const auto ms = mean_stderr(c.ratios[k]);
          row.nmse = ms.mean;
          row.nmse_stderr = ms.stderr_;
          if (grid.record_time) row.median_time_s = median(c.times[k]);
        }
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

}  // namespace

NmseTable run_sweep(const ExperimentGrid& grid) {
  grid.validate();
  const std::size_t n_cells = grid.ranks.size() * grid.snrs.size();
  const std::size_t n_methods = grid.methods.size();
  std::vector<CellResult> cells(n_cells);

  parallel_for(n_cells, grid.threads, [&](std::size_t cell) {
    const Index rank = grid.ranks[cell / grid.snrs.size()];
    const double snr = grid.snrs[cell % grid.snrs.size()];
    cells[cell] = run_cell(grid, cell, rank, snr, n_methods,
                           [&](const GeneratedProblem& gen, const SvdFactors& factors,
                               double svd_time, CellResult& out) {
                             for (std::size_t k = 0; k < n_methods; ++k) {
                               if (!out.errors[k].empty()) continue;
                               try {
                                 const auto start = Clock::now();
                                 const DenoiseOutcome res = denoise(grid.methods[k], gen.problem,
                                                                    factors, rank, grid.sure);
                                 out.times[k].push_back(svd_time + seconds_since(start));
                                 out.ratios[k].push_back(squared_error_ratio(res.estimate, gen.signal));
                               } catch (const std::exception& e) {
                                 out.errors[k] = e.what();
                               }
                             }
                           });
  });

  std::vector<std::string> labels;
  for (const auto& m : grid.methods) labels.push_back(m.label());
  return assemble(grid, labels, cells);
}

void write_table_csv(std::ostream& out, const NmseTable& table, std::string_view timestamp) {
  out << "# seed=" << table.seed << '\n';
  out << "# dims=" << table.n << 'x' << table.m << '\n';
  out << "# trials=" << table.trials << '\n';
  out << "# version=" << table.version << '\n';
  out << "# timestamp=" << timestamp << '\n';
  out << "method,n,m,r,snr,trials,nmse,nmse_stderr,median_time_s,status\n";
  for (const auto& row : table.rows) {
    out << row.method << ',' << row.n << ',' << row.m << ',' << row.r << ','
        << format_double(row.snr) << ',' << row.trials << ',' << format_double(row.nmse) << ','
        << format_double(row.nmse_stderr) << ',' << format_double(row.median_time_s) << ','
        << row.status << '\n';
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const SensitivityCell* SensitivityResult::find(double constant, int order) const {
  for (const auto& c : summary) {
    if (c.constant == constant && c.order == order) return &c;
  }
  return nullptr;
}

double SensitivityResult::mean_over_constants(int order) const {
  double total = 0.0;
  int count = 0;
  for (const auto& c : summary) {
    if (c.order == order && std::isfinite(c.mean_nmse)) {
      total += c.mean_nmse;
      ++count;
    }
  }
  return count ? total / count : kNaN;
}

SensitivityResult sensitivity_sweep(const ExperimentGrid& base, const std::vector<double>& c_values,
                                    const std::vector<int>& k_values) {
  if (c_values.empty() || k_values.empty()) throw ContractError("C and K lists must be non-empty");
  ExperimentGrid grid = base;
  grid.methods.clear();
  for (double c : c_values) {
    for (int k : k_values) {
      if (!(c > 0.0) || k < 1) throw ContractError("C must be > 0 and K >= 1");
      grid.methods.push_back({MethodKind::Svlet, c, k});
    }
  }
  grid.validate();

  const std::size_t n_cells = grid.ranks.size() * grid.snrs.size();
  const std::size_t n_methods = grid.methods.size();
  std::vector<CellResult> cells(n_cells);
  parallel_for(n_cells, grid.threads, [&](std::size_t cell) {
    const Index rank = grid.ranks[cell / grid.snrs.size()];
    const double snr = grid.snrs[cell % grid.snrs.size()];
    cells[cell] = run_cell(
        grid, cell, rank, snr, n_methods,
        [&](const GeneratedProblem& gen, const SvdFactors& factors, double svd_time, CellResult& out) {
          // One evaluator per draw: the cross weights do not depend on (C, K).
          std::optional<SureEvaluator> eval;
          try {
            eval.emplace(factors.S, gen.problem.shape(), gen.problem.sigma(), grid.sure);
          } catch (const std::exception& e) {
            for (auto& err : out.errors) {
              if (err.empty()) err = e.what();
            }
            return;
          }
          for (std::size_t k = 0; k < n_methods; ++k) {
            if (!out.errors[k].empty()) continue;
            const MethodSpec& method = grid.methods[k];
            try {
              const auto start = Clock::now();
              const SvletSolve solved =
                  solve_svlet(*eval, method.order, method.constant * gen.problem.sigma(),
                              eval->spectrum().size(), method.constant);
              const Vector shrunk = apply(ShrinkageRule::svlet(solved.basis), factors.S);
              const Matrix estimate = reconstruct(factors, shrunk);
              out.times[k].push_back(svd_time + seconds_since(start));
              out.ratios[k].push_back(squared_error_ratio(estimate, gen.signal));
            } catch (const std::exception& e) {
              out.errors[k] = e.what();
            }
          }
        });
  });

  std::vector<std::string> labels;
  for (const auto& m : grid.methods) labels.push_back(m.label());
  SensitivityResult result{assemble(grid, labels, cells), {}, {0.0, 0, kNaN}};

  const std::size_t per_method = n_cells;
  for (std::size_t k = 0; k < n_methods; ++k) {
    double total = 0.0;
    bool ok = true;
    for (std::size_t c = 0; c < per_method; ++c) {
      const double v = result.table.rows[k * per_method + c].nmse;
      if (!std::isfinite(v)) ok = false;
      total += v;
    }
    const SensitivityCell cell{grid.methods[k].constant, grid.methods[k].order,
                               ok ? total / static_cast<double>(per_method) : kNaN};
    result.summary.push_back(cell);
    if (std::isfinite(cell.mean_nmse) &&
        (!std::isfinite(result.best.mean_nmse) || cell.mean_nmse < result.best.mean_nmse)) {
      result.best = cell;
    }
  }
  return result;
}

std::vector<TimingRow> timing_report(const ExperimentGrid& grid) {
  grid.validate();
  std::vector<std::vector<double>> times(grid.methods.size());
  const std::size_t count = grid.methods.size();
  std::size_t cell = 0;
  std::size_t draw = 0;
  for (Index rank : grid.ranks) {
    for (double snr : grid.snrs) {
      for (int t = 0; t < grid.trials; ++t) {
        Rng rng = Rng::stream(grid.seed, cell, static_cast<std::uint64_t>(t));
        const GeneratedProblem gen = generate_problem(grid.n, grid.m, rank, snr, rng);
        // Rotating the start position gives every method each slot in the
        // per-draw order equally often.
        for (std::size_t j = 0; j < count; ++j) {
          const std::size_t k = (j + draw) % count;
          double fastest = kInf;
          try {
            for (int rep = 0; rep < kTimingRepeats; ++rep) {
              const auto start = Clock::now();
              const SvdFactors factors = svd(gen.problem.observed());
              const DenoiseOutcome res = denoise(grid.methods[k], gen.problem, factors, rank, grid.sure);
              (void)res;
              fastest = std::min(fastest, seconds_since(start));
            }
          } catch (const NumericalError&) {
            continue;
          }
          times[k].push_back(fastest);
        }
        ++draw;
      }
      ++cell;
    }
  }

  std::vector<TimingRow> rows;
  double svlet_time = kNaN;
  for (std::size_t k = 0; k < grid.methods.size(); ++k) {
    rows.push_back({grid.methods[k].label(), median(times[k]), kNaN});
    if (grid.methods[k].kind == MethodKind::Svlet && !std::isfinite(svlet_time)) {
      svlet_time = rows.back().median_s;
    }
  }
  for (auto& row : rows) row.ratio_to_svlet = row.median_s / svlet_time;
  return rows;
}

AsymptoticReport verify_asymptotic_optimality(const AsymptoticCheckOptions& opts) {
  if (opts.n_values.empty() || opts.spikes.empty() || opts.seeds < 1) {
    throw ContractError("asymptotic check needs n values, spikes and at least one seed");
  }
  const AspectRatio ar(opts.beta);
  AsymptoticReport report{{}, {}, true};

  for (std::size_t ni = 0; ni < opts.n_values.size(); ++ni) {
    const Index n = opts.n_values[ni];
    const Index m = static_cast<Index>(std::llround(static_cast<double>(n) / opts.beta));
    const Index r = static_cast<Index>(opts.spikes.size());
    if (r > std::min(n, m)) throw RangeError("more spikes than min(n, m)");
    const double sigma = 1.0 / std::sqrt(static_cast<double>(m));
    double total = 0.0;
    int counted = 0;
    for (int s = 0; s < opts.seeds; ++s) {
      Rng rng = Rng::stream(opts.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s));
      const Matrix left = Eigen::HouseholderQR<Matrix>(rng.gaussian(n, r)).householderQ() *
                          Matrix::Identity(n, r);
      const Matrix right = Eigen::HouseholderQR<Matrix>(rng.gaussian(m, r)).householderQ() *
                           Matrix::Identity(m, r);
      Vector x(r);
      for (Index k = 0; k < r; ++k) x[k] = opts.spikes[k];
      const Matrix observed = left * x.asDiagonal() * right.transpose() + sigma * rng.gaussian(n, m);
      const MatrixShape shape(n, m);
      const Vector y = singular_values(observed);

      AsymptoticRow row{n, s, 0, 0, false, kNaN, {}, {}, {}};
      for (Index k = 0; k < r; ++k) {
        if (x[k] > std::pow(opts.beta, 0.25)) ++row.planted;
      }
      row.r_star = estimate_rank(y, shape, sigma, Calibration::MaxDimension).rank;
      if (row.r_star == 0) {
        row.flagged = true;
        report.rows.push_back(std::move(row));
        continue;
      }
      const SureEvaluator eval(y, shape, sigma);
      const int order = opts.order > 0 ? opts.order : static_cast<int>(row.r_star);
      const double scale = opts.scale > 0.0 ? opts.scale : ar.upper_edge();
      const SvletSolve solved = solve_svlet(eval, order, scale, row.r_star);
      double worst = 0.0;
      for (Index i = 0; i < row.r_star; ++i) {
        const double yi = eval.spectrum()[i];
        const double fitted = solved.basis.raw(yi);
        const double target = optimal_bulk_shrink(yi, ar);
        row.observed.push_back(yi);
        row.svlet.push_back(fitted);
        row.optimal.push_back(target);
        if (i < row.planted) worst = std::max(worst, std::abs(fitted - target) / target);
      }
      row.max_rel_deviation = worst;
      total += worst;
      ++counted;
      report.rows.push_back(std::move(row));
    }
    report.mean_deviation.push_back(counted ? total / counted : kNaN);
  }
  for (std::size_t i = 1; i < report.mean_deviation.size(); ++i) {
    if (!(report.mean_deviation[i] <= report.mean_deviation[i - 1])) report.non_increasing = false;
  }
  return report;
}

}  // namespace svshrink
