#include "svshrink/sure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "svshrink/errors.hpp"

namespace svshrink {

Vector prepare_spectrum(const Vector& spectrum, const SureOptions& opts) {
  require_descending(spectrum);
  const Index L = spectrum.size();
  if (L == 0) throw DimensionError("empty spectrum");
  Vector y = spectrum;
  if (opts.jitter) {
    const double step = kJitterScale * y[0];
    for (Index i = 0; i < L; ++i) y[i] += step * static_cast<double>(L - i);
  }
  const double floor = opts.tol.gap * y[0] * y[0];
  for (Index i = 0; i < L; ++i) {
    if (!(y[i] > 0.0)) {
      throw DegenerateSpectrumError("singular value " + std::to_string(i) + " is zero", i, i);
    }
    // Descending order makes adjacent pairs the closest in y^2.
    if (i + 1 < L && !(y[i] * y[i] - y[i + 1] * y[i + 1] > floor)) {
      throw DegenerateSpectrumError("singular values " + std::to_string(i) + " and " +
                                        std::to_string(i + 1) + " are not separated",
                                    i, i + 1);
    }
  }
  return y;
}

Vector cross_weights(const Vector& y) {
  const Index L = y.size();
  Vector w = Vector::Zero(L);
  for (Index i = 0; i < L; ++i) {
    const double yi2 = y[i] * y[i];
    double s = 0.0;
    for (Index j = 0; j < L; ++j) {
      if (j != i) s += 1.0 / (yi2 - y[j] * y[j]);
    }
    w[i] = y[i] * s;
  }
  return w;
}

double SureReport::identity_error() const {
  const double nm_s2 = shape.size() * sigma * sigma;
  const double rebuilt = -nm_s2 + residual + 2.0 * sigma * sigma * divergence;
  const double scale = std::max({std::abs(sure), nm_s2, std::numeric_limits<double>::min()});
  return std::abs(sure - rebuilt) / scale;
}

SureEvaluator::SureEvaluator(const Vector& spectrum, const MatrixShape& shape, double sigma,
                             const SureOptions& opts)
    : spectrum_(prepare_spectrum(spectrum, opts)), shape_(shape), sigma_(sigma), opts_(opts) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractError("sigma must be > 0");
  if (spectrum_.size() != shape.min_dim()) {
    throw DimensionError("spectrum length " + std::to_string(spectrum_.size()) +
                         " does not match min(n, m) = " + std::to_string(shape.min_dim()));
  }
  weights_ = cross_weights(spectrum_);
}

double SureEvaluator::divergence(const ShrinkageRule& rule) const {
  const Index L = spectrum_.size();
  const double gap = static_cast<double>(shape_.abs_diff());
  double d_eta = 0.0, ratio = 0.0, cross = 0.0;
  for (Index i = 0; i < L; ++i) {
    const double y = spectrum_[i];
    const double eta = rule.raw_value(y, i);
    d_eta += rule.raw_derivative(y, i);
    ratio += eta / y;
    cross += eta * weights_[i];
  }
  return d_eta + gap * ratio + 2.0 * cross;
}

SureReport SureEvaluator::evaluate(const ShrinkageRule& rule) const {
  const Index L = spectrum_.size();
  if (const auto* s = std::get_if<rules::Svlt>(&rule.variant())) {
    if (s->p2 > static_cast<double>(L)) {
      throw ContractError("SVLT index centre p2 exceeds the spectrum length");
    }
  }
  const double gap = static_cast<double>(shape_.abs_diff());
  double residual = 0.0, clamped = 0.0, d_eta = 0.0, ratio = 0.0, cross = 0.0;
  for (Index i = 0; i < L; ++i) {
    const double y = spectrum_[i];
    const double eta = rule.raw_value(y, i);
    const double kept = eta > 0.0 ? eta : 0.0;
    residual += (y - eta) * (y - eta);
    clamped += (y - kept) * (y - kept);
    d_eta += rule.raw_derivative(y, i);
    ratio += eta / y;
    cross += eta * weights_[i];
  }
  const double div = d_eta + gap * ratio + 2.0 * cross;
  const double s2 = sigma_ * sigma_;
  const double value = -shape_.size() * s2 + residual + 2.0 * s2 * div;

  SureReport report{rule, shape_, sigma_, value, residual, div, clamped, {}, {}};
  if (std::isfinite(value) && report.identity_error() > kSureIdentityTolerance) {
    throw std::logic_error("SURE report violates its reconstruction identity");
  }
  return report;
}

double divergence(const Vector& spectrum, const ShrinkageRule& rule, const MatrixShape& shape,
                  const SureOptions& opts) {
  // sigma does not enter the divergence; any positive value will do.
  return SureEvaluator(spectrum, shape, 1.0, opts).divergence(rule);
}

SureReport sure(const DenoiseProblem& problem, const SvdFactors& factors,
                const ShrinkageRule& rule, const SureOptions& opts) {
  if (factors.shape() != problem.shape()) {
    throw DimensionError("factors do not match the problem shape");
  }
  return SureEvaluator(factors.S, problem.shape(), problem.sigma(), opts).evaluate(rule);
}

SvletSolve solve_svlet(const SureEvaluator& eval, int order, double scale, Index active,
                       std::optional<double> constant) {
  if (order < 1) throw ContractError("SVLET order K must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ContractError("SVLET scale must be > 0");
  const Vector& y = eval.spectrum();
  const Index L = y.size();
  if (active < 1 || active > L) {
    throw RangeError("active count " + std::to_string(active) + " outside [1, " +
                     std::to_string(L) + "]");
  }
  const double s2 = eval.sigma() * eval.sigma();
  const double gap = static_cast<double>(eval.shape().abs_diff());
  const Vector& w = eval.weights();

  Matrix phi(active, order);
  Matrix dphi(active, order);
  Vector target(active);
  for (Index i = 0; i < active; ++i) {
    target[i] = y[i] - gap * s2 / y[i] - 2.0 * s2 * w[i];
    for (int k = 0; k < order; ++k) {
      phi(i, k) = dog_basis(k, y[i], scale);
      dphi(i, k) = dog_basis_derivative(k, y[i], scale);
    }
  }
  const Matrix gram = phi.transpose() * phi;
  const Vector rhs = phi.transpose() * target - s2 * dphi.colwise().sum().transpose();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  const double condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();

  const SureOptions& opts = eval.options();
  double ridge = 0.0;
  Matrix system = gram;
  if (!(condition <= opts.tol.ridge_condition)) {
    ridge = opts.tol.ridge_scale * gram.trace() / static_cast<double>(order);
    system.diagonal().array() += ridge;
  }
  const auto hint = " (K = " + std::to_string(order) + "; try a smaller K)";
  if (!system.allFinite() || !rhs.allFinite() || !(system.diagonal().minCoeff() > 0.0)) {
    throw SolverError("SVLET Gram matrix is singular" + hint);
  }
  Eigen::LDLT<Matrix> ldlt(system);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw SolverError("SVLET Gram matrix is not positive definite" + hint);
  }
  Vector coeffs = ldlt.solve(rhs);
  const double residual = (system * coeffs - rhs).norm();
  if (!coeffs.allFinite() || residual > kSolveResidualTolerance * rhs.norm()) {
    throw SolverError("SVLET linear solve is inaccurate" + hint);
  }

  SvletBasis basis = constant ? SvletBasis::from_constant(order, *constant, eval.sigma(), coeffs)
                              : SvletBasis::from_scale(order, scale, coeffs);
  SvletSolve out{gram, rhs, std::move(coeffs), condition, ridge, basis, std::nullopt};
  if (active == L) out.report = eval.evaluate(ShrinkageRule::svlet(std::move(basis)));
  return out;
}

SvletSolve solve_svlet(const DenoiseProblem& problem, const SvdFactors& factors, int order,
                       double constant, const SureOptions& opts) {
  if (factors.shape() != problem.shape()) {
    throw DimensionError("factors do not match the problem shape");
  }
  if (!(constant > 0.0) || !std::isfinite(constant)) {
    throw ContractError("SVLET constant C must be > 0");
  }
  const SureEvaluator eval(factors.S, problem.shape(), problem.sigma(), opts);
  return solve_svlet(eval, order, constant * problem.sigma(), eval.spectrum().size(), constant);
}

std::string_view family_name(TunableFamily f) {
  switch (f) {
    case TunableFamily::Svst: return "svst";
    case TunableFamily::Atn: return "atn";
    case TunableFamily::Svlt: return "svlt";
  }
  return "?";
}

namespace {

std::vector<double> equispaced(double upper, int count) {
  std::vector<double> v(count);
  for (int j = 0; j < count; ++j) v[j] = upper * static_cast<double>(j + 1) / count;
  return v;
}

std::vector<std::string> columns(TunableFamily f) {
  switch (f) {
    case TunableFamily::Svst: return {"lambda"};
    case TunableFamily::Atn: return {"tau", "gamma"};
    case TunableFamily::Svlt: return {"p1", "p2", "p3"};
  }
  return {};
}

std::array<double, 3> grid_point(TunableFamily family, const GridSpec& g, std::size_t idx) {
  switch (family) {
    case TunableFamily::Svst:
      return {g.first[idx], 0.0, 0.0};
    case TunableFamily::Atn: {
      const std::size_t n2 = g.second.size();
      return {g.first[idx / n2], g.second[idx % n2], 0.0};
    }
    case TunableFamily::Svlt: {
      const std::size_t n3 = g.third.size();
      const std::size_t n23 = g.second.size() * n3;
      return {g.first[idx / n23], g.second[(idx % n23) / n3], g.third[idx % n3]};
    }
  }
  return {};
}

}  // namespace

GridSpec GridSpec::defaults(TunableFamily family, const Vector& spectrum) {
  if (spectrum.size() == 0) throw DimensionError("empty spectrum");
  const double upper = 0.5 * spectrum[0];
  switch (family) {
    case TunableFamily::Svst:
      return {equispaced(upper, 100), {}, {}};
    case TunableFamily::Atn: {
      std::vector<double> gammas(20);
      for (int g = 0; g < 20; ++g) gammas[g] = g + 1.0;
      return {equispaced(upper, 100), gammas, {}};
    }
    case TunableFamily::Svlt: {
      std::vector<double> centres(spectrum.size());
      for (Index i = 0; i < spectrum.size(); ++i) centres[i] = static_cast<double>(i + 1);
      return {{kSvltDefaultSlope}, centres, equispaced(upper, 50)};
    }
  }
  return {};
}

std::size_t GridSpec::size(TunableFamily family) const {
  switch (family) {
    case TunableFamily::Svst: return first.size();
    case TunableFamily::Atn: return first.size() * second.size();
    case TunableFamily::Svlt: return first.size() * second.size() * third.size();
  }
  return 0;
}

ShrinkageRule grid_rule(TunableFamily family, const std::array<double, 3>& p) {
  switch (family) {
    case TunableFamily::Svst: return ShrinkageRule::svst(p[0]);
    case TunableFamily::Atn: return ShrinkageRule::atn(p[0], p[1]);
    case TunableFamily::Svlt: return ShrinkageRule::svlt(p[0], p[1], p[2]);
  }
  throw ContractError("unknown family");
}

SureReport tune_grid(const SureEvaluator& eval, TunableFamily family, const GridSpec& grid) {
  const std::size_t total = grid.size(family);
  if (total == 0) throw ContractError("empty tuning grid");
  for (const auto* axis : {&grid.first, &grid.second, &grid.third}) {
    if (!std::is_sorted(axis->begin(), axis->end())) {
      throw ContractError("tuning grid axes must be ascending");
    }
  }

  std::vector<TracePoint> trace(total);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const auto p = grid_point(family, grid, idx);
      trace[idx] = {p, eval.evaluate(grid_rule(family, p)).sure};
    }
  };

  const std::size_t workers =
      std::clamp<std::size_t>(eval.options().threads, 1, std::max<std::size_t>(1, total / 64));
  if (workers == 1) {
    work(0, total);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(total * t / workers, total * (t + 1) / workers);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Enumeration order is lexicographic, so the first strict minimum wins ties.
  std::size_t best = 0;
  for (std::size_t idx = 1; idx < total; ++idx) {
    if (trace[idx].sure < trace[best].sure) best = idx;
  }
  SureReport report = eval.evaluate(grid_rule(family, trace[best].params));
  report.trace_columns = columns(family);
  report.trace = std::move(trace);
  return report;
}

SureReport tune_grid(const DenoiseProblem& problem, const SvdFactors& factors,
                     TunableFamily family, const GridSpec& grid, const SureOptions& opts) {
  if (factors.shape() != problem.shape()) {
    throw DimensionError("factors do not match the problem shape");
  }
  return tune_grid(SureEvaluator(factors.S, problem.shape(), problem.sigma(), opts), family, grid);
}

}  // namespace svshrink
