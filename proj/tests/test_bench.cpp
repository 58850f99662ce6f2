#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/checks.hpp"
#include "svshrink/bench.hpp"
#include "svshrink/errors.hpp"
#include "svshrink/random.hpp"
#include "svshrink/rmt.hpp"
#include "svshrink/spectral.hpp"

using namespace svshrink;

namespace {

ExperimentGrid small_grid(std::vector<std::string> methods) {
  ExperimentGrid g;
  g.n = 20;
  g.m = 16;
  g.ranks = {1, 4};
  g.snrs = {0.5, 2.0};
  g.trials = 3;
  g.seed = 77;
  for (const auto& m : methods) g.methods.push_back(MethodSpec::parse(m));
  return g;
}

std::string csv(const NmseTable& t) {
  std::ostringstream out;
  write_table_csv(out, t, "fixed");
  return out.str();
}

}  // namespace

TEST_CASE("generated problems") {
  SUBCASE("full rank when r = L") {
    Rng rng(1);
    const GeneratedProblem g = generate_problem(12, 9, 9, 1.0, rng);
    const Vector x = singular_values(g.signal);
    CHECK(x[8] > 1e-8 * x[0]);
  }
  SUBCASE("sigma follows the realized SNR and draws are reproducible") {
    Rng a(5), b(5);
    const GeneratedProblem p = generate_problem(30, 20, 3, 4.0, a);
    const GeneratedProblem q = generate_problem(30, 20, 3, 4.0, b);
    CHECK(p.problem.sigma() == p.signal.norm() / std::sqrt(4.0 * 30.0 * 20.0));
    CHECK(p.problem.sigma() == q.problem.sigma());
    CHECK(p.signal == q.signal);
    CHECK(p.problem.observed() == q.problem.observed());
    const double snr = p.signal.squaredNorm() / (600.0 * p.problem.sigma() * p.problem.sigma());
    CHECK(snr == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("signal energy has mean n m r") {
    Rng rng(7);
    double total = 0.0;
    for (int t = 0; t < 200; ++t) total += generate_problem(50, 50, 5, 1.0, rng).signal.squaredNorm();
    CHECK(std::abs(total / 200.0 - 12500.0) <= 0.05 * 12500.0);
  }
  SUBCASE("contract errors") {
    Rng rng(1);
    CHECK_THROWS_AS(generate_problem(5, 5, 0, 1.0, rng), RangeError);
    CHECK_THROWS_AS(generate_problem(5, 5, 6, 1.0, rng), RangeError);
    CHECK_THROWS_AS(generate_problem(5, 5, 2, 0.0, rng), ContractError);
  }
}

TEST_CASE("nmse") {
  Rng rng(2);
  const std::vector<Matrix> truth = {rng.gaussian(4, 3), rng.gaussian(4, 3)};
  CHECK(nmse(truth, truth) == 0.0);
  const std::vector<Matrix> zeros = {Matrix::Zero(4, 3), Matrix::Zero(4, 3)};
  CHECK(nmse(zeros, truth) == 1.0);
  // Ratios 0.2 and 0.4 by scaling the truth.
  const std::vector<Matrix> est = {truth[0] * (1.0 - std::sqrt(0.2)),
                                   truth[1] * (1.0 + std::sqrt(0.4))};
  CHECK(nmse(est, truth) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(nmse(std::vector<Matrix>{}, std::vector<Matrix>{}), ContractError);
  CHECK_THROWS_AS(nmse(std::vector<Matrix>{truth[0]}, truth), ContractError);
  const std::vector<Matrix> wrong = {Matrix::Zero(3, 3), Matrix::Zero(4, 3)};
  CHECK_THROWS_AS(nmse(wrong, truth), DimensionError);
}

TEST_CASE("method specifiers") {
  for (const auto& method : all_methods()) CHECK(MethodSpec::parse(method.label()) == method);
  const MethodSpec s = MethodSpec::parse("svlet-C5-K3");
  CHECK(s.constant == 5.0);
  CHECK(s.order == 3);
  CHECK(MethodSpec::parse("svlet").label() == "svlet-C10-K2");
  CHECK(MethodSpec::parse("svlet-C2.5-K1").label() == "svlet-C2.5-K1");
  for (const char* bad : {"", "svlet-C-K2", "svlet-C0-K2", "svlet-C5-K0", "svlet-C5-K2x", "foo"}) {
    CHECK_THROWS_AS(MethodSpec::parse(bad), ContractError);
  }
  CHECK(all_methods().size() == 8);
}

TEST_CASE("grid validation") {
  ExperimentGrid g = small_grid({"svlet"});
  CHECK_NOTHROW(g.validate());
  g.trials = 0;
  CHECK_THROWS_AS(g.validate(), ContractError);
  g = small_grid({"svlet"});
  g.ranks = {17};
  CHECK_THROWS_AS(g.validate(), RangeError);
  g = small_grid({});
  CHECK_THROWS_AS(g.validate(), ContractError);
  g = small_grid({"svlet"});
  g.snrs = {-1.0};
  CHECK_THROWS_AS(g.validate(), ContractError);
}

TEST_CASE("EYM at the true rank recovers a near-noiseless signal") {
  ExperimentGrid g;
  g.n = 30;
  g.m = 30;
  g.ranks = {1, 5, 15, 30};
  g.snrs = {1e6};
  g.trials = 3;
  g.seed = 3;
  g.methods = {MethodSpec::parse("eym-oracle")};
  const NmseTable t = run_sweep(g);
  REQUIRE(t.rows.size() == 4);
  for (const auto& row : t.rows) {
    CHECK(row.status == "ok");
    CHECK(row.nmse <= 1e-6);
  }
}

TEST_CASE("EYM at the true rank beats every wrong rank in the noiseless limit") {
  Rng rng(4);
  for (Index r : {2, 5, 9}) {
    const GeneratedProblem g = generate_problem(20, 20, r, 1e6, rng);
    const SvdFactors f = svd(g.problem.observed());
    const double best = (eym_truncate(f, r) - g.signal).squaredNorm();
    for (Index k = 0; k <= 20; ++k) {
      if (k != r) CHECK(best <= (eym_truncate(f, k) - g.signal).squaredNorm());
    }
  }
}

TEST_CASE("sweeps are deterministic and independent of thread count") {
  ExperimentGrid g = small_grid({"svlet", "svst-sure", "opt-shrink", "svht-4/sqrt3", "svst-bulk"});
  const std::string one = csv(run_sweep(g));
  CHECK(one == csv(run_sweep(g)));
  g.threads = 4;
  CHECK(one == csv(run_sweep(g)));
  g.seed = 78;
  CHECK(one != csv(run_sweep(g)));
}

TEST_CASE("table layout") {
  ExperimentGrid g = small_grid({"svlet", "eym-oracle"});
  const NmseTable t = run_sweep(g);
  CHECK(t.rows.size() == 2 * 2 * 2);
  for (const auto& row : t.rows) {
    CHECK(row.nmse >= 0.0);
    CHECK(std::isnan(row.median_time_s));
  }
  const std::string text = csv(t);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# seed=77");
  std::getline(in, line);
  CHECK(line == "# dims=20x16");
  std::getline(in, line);
  CHECK(line == "# trials=3");
  std::getline(in, line);
  CHECK(line.rfind("# version=", 0) == 0);
  std::getline(in, line);
  CHECK(line == "# timestamp=fixed");
  std::getline(in, line);
  CHECK(line == "method,n,m,r,snr,trials,nmse,nmse_stderr,median_time_s,status");
  std::getline(in, line);
  CHECK(line.rfind("svlet-C10-K2,20,16,1,0.5,3,", 0) == 0);
  CHECK(line.find(",nan,ok") != std::string::npos);
  CHECK(t.find("eym-oracle", 4, 2.0) != nullptr);
  CHECK(t.find("eym-oracle", 3, 2.0) == nullptr);

  g.record_time = true;
  for (const auto& row : run_sweep(g).rows) CHECK(row.median_time_s > 0.0);

  const std::string stamp = utc_timestamp();
  CHECK(stamp.size() == 20);
  CHECK(stamp.back() == 'Z');
}

TEST_CASE("failing cells become error rows") {
  ExperimentGrid g = small_grid({"svlet-C10-K40", "svst-sure"});
  g.sure.tol.ridge_scale = 0.0;
  const NmseTable t = run_sweep(g);
  int errors = 0;
  for (const auto& row : t.rows) {
    if (row.method == "svlet-C10-K40") {
      CHECK(row.status.rfind("error: ", 0) == 0);
      CHECK(row.status.find(',') == std::string::npos);
      CHECK(std::isnan(row.nmse));
      ++errors;
    } else {
      CHECK(row.status == "ok");
    }
  }
  CHECK(errors == 4);
}

TEST_CASE("SURE-tuned methods report consistent SURE") {
  Rng rng(9);
  const GeneratedProblem g = generate_problem(25, 25, 3, 1.0, rng);
  const SvdFactors f = svd(g.problem.observed());
  for (const auto& method : all_methods()) {
    const DenoiseOutcome out = denoise(method, g.problem, f, 3);
    CHECK(out.estimate.rows() == 25);
    CHECK(out.shrunk.minCoeff() >= 0.0);
    CHECK((reconstruct(f, out.shrunk) - out.estimate).norm() <= 1e-10 * g.problem.observed().norm());
    const bool sure_based = method.kind == MethodKind::Svlet || method.kind == MethodKind::SvstSure ||
                            method.kind == MethodKind::AtnSure || method.kind == MethodKind::SvltSure;
    CHECK(out.report.has_value() == sure_based);
    if (out.report) oracle::check_identity(*out.report);
  }
}

TEST_CASE("sensitivity sweep") {
  ExperimentGrid g = small_grid({"svlet"});
  SUBCASE("a single (C, K) reproduces the plain sweep") {
    const SensitivityResult s = sensitivity_sweep(g, {10.0}, {2});
    const NmseTable t = run_sweep(g);
    REQUIRE(s.table.rows.size() == t.rows.size());
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      CHECK(s.table.rows[k].method == t.rows[k].method);
      CHECK(s.table.rows[k].nmse == t.rows[k].nmse);
    }
    CHECK(s.best.constant == 10.0);
    CHECK(s.best.order == 2);
  }
  SUBCASE("summary averages each (C, K) over cells and picks the minimum") {
    const SensitivityResult s = sensitivity_sweep(g, {2.0, 10.0}, {1, 2, 3});
    REQUIRE(s.summary.size() == 6);
    double lowest = INFINITY;
    for (const auto& c : s.summary) {
      double total = 0.0;
      for (const auto& row : s.table.rows) {
        if (row.method == MethodSpec{MethodKind::Svlet, c.constant, c.order}.label()) total += row.nmse;
      }
      CHECK(c.mean_nmse == doctest::Approx(total / 4.0).epsilon(1e-14));
      lowest = std::min(lowest, c.mean_nmse);
    }
    CHECK(s.best.mean_nmse == lowest);
    CHECK(s.find(10.0, 3) != nullptr);
    CHECK(s.find(11.0, 3) == nullptr);
    CHECK(s.mean_over_constants(2) ==
          doctest::Approx(0.5 * (s.find(2.0, 2)->mean_nmse + s.find(10.0, 2)->mean_nmse)));
    g.threads = 3;
    const SensitivityResult p = sensitivity_sweep(g, {2.0, 10.0}, {1, 2, 3});
    CHECK(csv(p.table) == csv(s.table));
  }
  SUBCASE("contract errors") {
    CHECK_THROWS_AS(sensitivity_sweep(g, {}, {2}), ContractError);
    CHECK_THROWS_AS(sensitivity_sweep(g, {10.0}, {0}), ContractError);
  }
}

TEST_CASE("timing report") {
  ExperimentGrid g = small_grid({"svlet", "svst-sure"});
  g.trials = 5;
  const auto rows = timing_report(g);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "svlet-C10-K2");
  CHECK(rows[0].ratio_to_svlet == 1.0);
  CHECK(rows[1].ratio_to_svlet == doctest::Approx(rows[1].median_s / rows[0].median_s));
  CHECK(rows[0].median_s > 0.0);

  ExperimentGrid no_svlet = small_grid({"svst-sure"});
  CHECK(std::isnan(timing_report(no_svlet)[0].ratio_to_svlet));
}

TEST_CASE("repeat timing runs are stable") {
  ExperimentGrid g;
  g.n = 50;
  g.m = 50;
  g.ranks = {5, 25};
  g.snrs = {1.0};
  g.trials = 15;
  g.seed = 1;
  g.methods = {MethodSpec::parse("svlet"), MethodSpec::parse("svst-sure")};
  const auto a = timing_report(g);
  const auto b = timing_report(g);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double hi = std::max(a[k].median_s, b[k].median_s);
    const double lo = std::min(a[k].median_s, b[k].median_s);
    CHECK(hi - lo <= 0.5 * hi);
  }
}

TEST_CASE("asymptotic optimality check") {
  SUBCASE("small problem produces a well-formed report") {
    AsymptoticCheckOptions o;
    o.n_values = {100, 200};
    o.seeds = 2;
    o.seed = 4;
    const AsymptoticReport r = verify_asymptotic_optimality(o);
    CHECK(r.rows.size() == 4);
    CHECK(r.mean_deviation.size() == 2);
    for (const auto& row : r.rows) {
      CHECK_FALSE(row.flagged);
      CHECK(row.r_star == 3);
      CHECK(row.planted == 3);
      CHECK(row.observed.size() == 3);
      for (std::size_t i = 0; i < row.optimal.size(); ++i) {
        CHECK(row.optimal[i] == doctest::Approx(optimal_bulk_shrink(row.observed[i], AspectRatio(1.0))));
      }
    }
  }
  SUBCASE("a spike below the transition is excluded") {
    AsymptoticCheckOptions o;
    o.n_values = {200};
    o.spikes = {0.5, 3.0};
    o.seeds = 2;
    const AsymptoticReport r = verify_asymptotic_optimality(o);
    for (const auto& row : r.rows) {
      CHECK(row.r_star == 1);
      CHECK(row.planted == 1);
      CHECK(optimal_bulk_shrink(spike_location(0.5, AspectRatio(1.0)), AspectRatio(1.0)) == 0.0);
    }
  }
  SUBCASE("replicates without a detected spike are flagged") {
    AsymptoticCheckOptions o;
    o.n_values = {100};
    o.spikes = {0.3};
    o.seeds = 6;
    const AsymptoticReport r = verify_asymptotic_optimality(o);
    int flagged = 0;
    for (const auto& row : r.rows) {
      CHECK(row.flagged == (row.r_star == 0));
      if (row.flagged) {
        ++flagged;
        CHECK(row.observed.empty());
      }
    }
    CHECK(flagged >= 1);
  }
}
