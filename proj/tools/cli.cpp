#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "svshrink/bench.hpp"
#include "svshrink/errors.hpp"
#include "svshrink/matrix_io.hpp"
#include "svshrink/rmt.hpp"
#include "svshrink/rmt_validation.hpp"
#include "svshrink/shrinkage.hpp"
#include "svshrink/spectral.hpp"
#include "svshrink/sure.hpp"

namespace svshrink::cli {

namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json report_json(const SureReport& r) {
  Json j;
  j["sure"] = nullable(r.sure);
  j["residual"] = r.residual;
  j["divergence"] = r.divergence;
  return j;
}

Json rule_params(const ShrinkageRule& rule) {
  Json j = Json::object();
  for (const auto& [name, value] : rule.parameters()) j[name] = value;
  return j;
}

Json svlet_params(const SvletSolve& s) {
  Json j;
  j["C"] = nullable(s.basis.constant().value_or(NAN));
  j["K"] = s.basis.order();
  j["T"] = s.basis.scale();
  j["a"] = std::vector<double>(s.coeffs.data(), s.coeffs.data() + s.coeffs.size());
  j["condition"] = s.condition_estimate;
  j["ridge_used"] = s.ridge_used;
  return j;
}

struct DenoiseArgs {
  std::string input;
  std::string output;
  double sigma = 0.0;
  std::string method;
  double constant = 10.0;
  int order = 2;
  std::optional<double> lambda, mu, tau, gamma, p1, p2, p3;
  std::optional<Index> rank;
  bool jitter = false;
  unsigned threads = 1;
};

struct TuneArgs {
  std::string input;
  double sigma = 0.0;
  std::string family;
  double constant = 10.0;
  int order = 2;
  bool jitter = false;
  unsigned threads = 1;
};

struct BenchArgs {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string output_dir;
};

struct RmtArgs {
  Index n = 400;
  double beta = 1.0;
  int trials = 10;
  std::optional<std::uint64_t> seed;
};

SureOptions sure_options(bool jitter, unsigned threads) {
  if (threads < 1) throw ContractError("threads must be >= 1");
  SureOptions o;
  o.jitter = jitter;
  o.threads = threads;
  return o;
}

DenoiseProblem load_problem(const std::string& path, double sigma) {
  if (!(sigma > 0.0)) throw ContractError("sigma must be > 0");
  return DenoiseProblem(read_matrix(path), sigma);
}

template <class T>
bool all_set(const std::optional<T>& a) {
  return a.has_value();
}
template <class T, class... Rest>
bool all_set(const std::optional<T>& a, const Rest&... rest) {
  return a.has_value() && all_set(rest...);
}
template <class T, class... Rest>
bool any_set(const std::optional<T>& a, const Rest&... rest) {
  if constexpr (sizeof...(rest) == 0) {
    return a.has_value();
  } else {
    return a.has_value() || any_set(rest...);
  }
}

int cmd_denoise(const DenoiseArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  const DenoiseProblem problem = load_problem(a.input, a.sigma);
  const SureOptions opts = sure_options(a.jitter, a.threads);
  const SvdFactors f = svd(problem.observed());

  Json params = Json::object();
  std::optional<double> sure_value;
  Matrix estimate;

  const auto shrink_with = [&](const ShrinkageRule& rule) {
    estimate = reconstruct(f, apply(rule, f.S));
  };
  const auto tuned = [&](TunableFamily family) {
    const SureReport r = tune_grid(problem, f, family, GridSpec::defaults(family, f.S), opts);
    params = rule_params(r.rule);
    params["tuned"] = true;
    sure_value = r.sure;
    shrink_with(r.rule);
  };
  const auto fixed = [&](const ShrinkageRule& rule) {
    const SureReport r = sure(problem, f, rule, opts);
    params = rule_params(rule);
    sure_value = r.sure;
    shrink_with(rule);
  };

  if (a.method == "svlet") {
    const SvletSolve s = solve_svlet(problem, f, a.order, a.constant, opts);
    params = svlet_params(s);
    sure_value = s.report->sure;
    shrink_with(ShrinkageRule::svlet(s.basis));
  } else if (a.method == "svst") {
    if (a.lambda) fixed(ShrinkageRule::svst(*a.lambda));
    else tuned(TunableFamily::Svst);
  } else if (a.method == "atn") {
    if (all_set(a.tau, a.gamma)) fixed(ShrinkageRule::atn(*a.tau, *a.gamma));
    else if (any_set(a.tau, a.gamma)) throw ContractError("atn needs both --tau and --gamma");
    else tuned(TunableFamily::Atn);
  } else if (a.method == "svlt") {
    if (all_set(a.p1, a.p2, a.p3)) fixed(ShrinkageRule::svlt(*a.p1, *a.p2, *a.p3));
    else if (any_set(a.p1, a.p2, a.p3)) throw ContractError("svlt needs --p1, --p2 and --p3");
    else tuned(TunableFamily::Svlt);
  } else if (a.method == "svht") {
    // Discontinuous: no SURE.
    const double mu =
        a.mu ? *a.mu
             : 4.0 / std::sqrt(3.0) *
                   calibration_scale(problem.shape(), problem.sigma(), Calibration::RowCount);
    if (a.mu) {
      shrink_with(ShrinkageRule::svht(mu));
    } else {
      estimate = asymptotic_denoise(problem, f, AsymptoticVariant::HardThreshold);
    }
    params["mu"] = mu;
  } else if (a.method == "opt-shrink") {
    estimate = asymptotic_denoise(problem, f, AsymptoticVariant::OptimalShrink);
    params["beta"] = AspectRatio::of(problem.shape()).beta();
    params["scale"] = calibration_scale(problem.shape(), problem.sigma(), Calibration::RowCount);
  } else if (a.method == "eym") {
    const Index r =
        a.rank ? *a.rank : estimate_rank(f.S, problem.shape(), problem.sigma()).rank;
    estimate = eym_truncate(f, r);
    params["rank"] = r;
    params["estimated"] = !a.rank.has_value();
  } else {
    throw ContractError("unknown method '" + a.method + "'");
  }

  write_matrix(a.output, estimate);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

  Json summary;
  summary["method"] = a.method;
  summary["params"] = params;
  summary["sure"] = sure_value ? nullable(*sure_value) : Json(nullptr);
  summary["seconds"] = seconds;
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_tune(const TuneArgs& a, std::ostream& out) {
  const DenoiseProblem problem = load_problem(a.input, a.sigma);
  const SureOptions opts = sure_options(a.jitter, a.threads);
  const SvdFactors f = svd(problem.observed());

  if (a.family == "svlet") {
    const SvletSolve s = solve_svlet(problem, f, a.order, a.constant, opts);
    Json head;
    head["family"] = "svlet";
    head.update(svlet_params(s));
    head.update(report_json(*s.report));
    out << "# " << head.dump() << '\n';
    out << "k,a\n";
    for (Index k = 0; k < s.coeffs.size(); ++k) {
      out << (k + 1) << ',' << format_double(s.coeffs[k]) << '\n';
    }
    return kExitOk;
  }

  TunableFamily family = TunableFamily::Svst;
  if (a.family == "atn") family = TunableFamily::Atn;
  else if (a.family == "svlt") family = TunableFamily::Svlt;
  else if (a.family != "svst") throw ContractError("unknown family '" + a.family + "'");

  const SureReport r = tune_grid(problem, f, family, GridSpec::defaults(family, f.S), opts);
  Json head;
  head["family"] = a.family;
  head["params"] = rule_params(r.rule);
  head.update(report_json(r));
  head["grid_points"] = r.trace.size();
  out << "# " << head.dump() << '\n';

  for (const auto& c : r.trace_columns) out << c << ',';
  out << "sure\n";
  const std::size_t width = r.trace_columns.size();
  for (const auto& p : r.trace) {
    for (std::size_t c = 0; c < width; ++c) out << format_double(p.params[c]) << ',';
    out << format_double(p.sure) << '\n';
  }
  return kExitOk;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ContractError("cannot write " + path.string());
  f << contents;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (!a.seed) throw ContractError("--seed is required");
  if (a.threads < 1) throw ContractError("threads must be >= 1");

  BenchConfig config;
  if (!a.preset.empty()) {
    if (a.preset != "paper") throw ContractError("unknown preset '" + a.preset + "'");
    config = reference_preset();
  }
  if (!a.config.empty()) config = load_config(a.config, config);
  if (!a.output_dir.empty()) config.output_dir = a.output_dir;
  if (config.methods.empty()) throw ContractError("config lists no methods");

  const ExperimentGrid grid = config.grid(*a.seed, a.threads);
  std::filesystem::create_directories(config.output_dir);
  const std::string stamp = utc_timestamp();

  {
    std::ostringstream csv;
    write_table_csv(csv, run_sweep(grid), stamp);
    write_file(config.output_dir / "sweep.csv", csv.str());
    out << "wrote " << (config.output_dir / "sweep.csv").string() << '\n';
  }

  if (config.sensitivity) {
    const SensitivityResult s = sensitivity_sweep(grid, config.c_values, config.k_values);
    std::ostringstream table;
    write_table_csv(table, s.table, stamp);
    write_file(config.output_dir / "sensitivity.csv", table.str());

    std::ostringstream summary;
    summary << "C,K,mean_nmse\n";
    for (const auto& c : s.summary) {
      summary << format_double(c.constant) << ',' << c.order << ',' << format_double(c.mean_nmse)
              << '\n';
    }
    write_file(config.output_dir / "sensitivity_summary.csv", summary.str());
    out << "wrote " << (config.output_dir / "sensitivity.csv").string() << '\n';
    out << "wrote " << (config.output_dir / "sensitivity_summary.csv").string() << '\n';
    out << "best C=" << format_double(s.best.constant) << " K=" << s.best.order
        << " mean_nmse=" << format_double(s.best.mean_nmse) << '\n';
  }

  if (config.timing) {
    std::ostringstream csv;
    csv << "# timestamp=" << stamp << '\n';
    csv << "method,median_s,ratio_to_svlet\n";
    for (const auto& row : timing_report(grid)) {
      csv << row.method << ',' << format_double(row.median_s) << ','
          << format_double(row.ratio_to_svlet) << '\n';
    }
    write_file(config.output_dir / "timing.csv", csv.str());
    out << "wrote " << (config.output_dir / "timing.csv").string() << '\n';
  }
  return kExitOk;
}

int cmd_rmt_check(const RmtArgs& a, std::ostream& out) {
  if (!a.seed) throw ContractError("--seed is required");
  RmtCheckOptions o;
  o.n = a.n;
  o.beta = a.beta;
  o.trials = a.trials;
  o.seed = *a.seed;
  const auto checks = run_rmt_checks(o);
  int failed = 0;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " observed=" << format_double(c.observed)
        << " expected=" << format_double(c.expected) << " deviation=" << format_double(c.deviation)
        << " tolerance=" << format_double(c.tolerance) << '\n';
    if (!c.passed) ++failed;
  }
  out << (checks.size() - failed) << '/' << checks.size() << " laws passed\n";
  return failed == 0 ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Singular value shrinkage denoising and benchmarks", "svshrink"};
  app.set_version_flag("--version", SVSHRINK_VERSION);
  app.require_subcommand(1);

  DenoiseArgs d;
  auto* denoise = app.add_subcommand("denoise", "Denoise a CSV matrix and write the estimate");
  denoise->add_option("input", d.input, "Observed matrix (CSV)")->required();
  denoise->add_option("--sigma", d.sigma, "Noise standard deviation")->required();
  denoise->add_option("--method", d.method, "Estimator")
      ->required()
      ->check(CLI::IsMember({"svlet", "svst", "atn", "svlt", "svht", "opt-shrink", "eym"}));
  denoise->add_option("--output,-o", d.output, "Where to write the estimate")->required();
  denoise->add_option("--C", d.constant, "SVLET scale constant, T = C sigma")->capture_default_str();
  denoise->add_option("--K", d.order, "SVLET basis size")->capture_default_str();
  denoise->add_option("--lambda", d.lambda, "SVST threshold (tuned by SURE when absent)");
  denoise->add_option("--mu", d.mu, "SVHT threshold (4/sqrt(3) rule when absent)");
  denoise->add_option("--tau", d.tau, "ATN threshold");
  denoise->add_option("--gamma", d.gamma, "ATN exponent");
  denoise->add_option("--p1", d.p1, "SVLT slope");
  denoise->add_option("--p2", d.p2, "SVLT centre index");
  denoise->add_option("--p3", d.p3, "SVLT threshold");
  denoise->add_option("--rank", d.rank, "EYM rank (bulk-edge estimate when absent)");
  denoise->add_flag("--jitter", d.jitter, "Perturb tied singular values instead of failing");
  denoise->add_option("--threads", d.threads, "Grid-search threads")->capture_default_str();

  TuneArgs t;
  auto* tune = app.add_subcommand("tune", "Minimize SURE for one family and print the trace");
  tune->add_option("input", t.input, "Observed matrix (CSV)")->required();
  tune->add_option("--sigma", t.sigma, "Noise standard deviation")->required();
  tune->add_option("--family", t.family, "svst, atn, svlt or svlet")
      ->required()
      ->check(CLI::IsMember({"svst", "atn", "svlt", "svlet"}));
  tune->add_option("--C", t.constant, "SVLET scale constant")->capture_default_str();
  tune->add_option("--K", t.order, "SVLET basis size")->capture_default_str();
  tune->add_flag("--jitter", t.jitter, "Perturb tied singular values instead of failing");
  tune->add_option("--threads", t.threads, "Grid-search threads")->capture_default_str();

  BenchArgs b;
  auto* bench = app.add_subcommand("bench", "Run NMSE, sensitivity and timing benchmarks");
  bench->add_option("--config", b.config, "key = value configuration file");
  bench->add_option("--preset", b.preset, "Start from a named preset (paper)");
  bench->add_option("--seed", b.seed, "RNG seed (required)");
  bench->add_option("--threads", b.threads, "Worker threads")->capture_default_str();
  bench->add_option("--output-dir", b.output_dir, "Overrides output_dir from the config");

  RmtArgs r;
  auto* rmt = app.add_subcommand("rmt-check", "Monte Carlo checks of the random matrix laws");
  rmt->add_option("--n", r.n, "Rows")->capture_default_str();
  rmt->add_option("--beta", r.beta, "Aspect ratio n/m in (0, 1]")->capture_default_str();
  rmt->add_option("--trials", r.trials, "Noise draws")->capture_default_str();
  rmt->add_option("--seed", r.seed, "RNG seed (required)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << SVSHRINK_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*denoise) return cmd_denoise(d, out);
    if (*tune) return cmd_tune(t, out);
    if (*bench) return cmd_bench(b, out);
    if (*rmt) return cmd_rmt_check(r, out);
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace svshrink::cli
