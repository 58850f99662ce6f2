#include "svshrink/shrinkage.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "svshrink/errors.hpp"
#include "svshrink/rmt.hpp"

namespace svshrink {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

bool finite(double v) { return std::isfinite(v); }

// 1 / (1 + exp(z)) without overflow for large |z|.
double logistic_complement(double z) {
  if (z > 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double svlt_weight(const rules::Svlt& r, Index i) {
  return logistic_complement(r.p1 * (static_cast<double>(i + 1) - r.p2));
}

}  // namespace

double dog_basis(int k, double y, double scale) {
  if (k == 0) return y;
  return y * std::exp(-static_cast<double>(k) * y * y / (2.0 * scale * scale));
}

double dog_basis_derivative(int k, double y, double scale) {
  if (k == 0) return 1.0;
  const double q = static_cast<double>(k) * y * y / (scale * scale);
  return (1.0 - q) * std::exp(-0.5 * q);
}

SvletBasis::SvletBasis(int order, double scale, std::optional<double> constant, Vector coeffs)
    : order_(order), scale_(scale), constant_(constant), coeffs_(std::move(coeffs)) {
  require(order >= 1, "SVLET order K must be >= 1");
  require(scale > 0.0 && finite(scale), "SVLET scale T must be finite and > 0");
  require(coeffs_.size() == order, "SVLET needs exactly K coefficients");
  require(coeffs_.allFinite(), "SVLET coefficients must be finite");
}

SvletBasis SvletBasis::from_constant(int order, double constant, double sigma, Vector coeffs) {
  require(constant > 0.0 && finite(constant), "SVLET constant C must be finite and > 0");
  require(sigma > 0.0 && finite(sigma), "sigma must be > 0");
  return SvletBasis(order, constant * sigma, constant, std::move(coeffs));
}

SvletBasis SvletBasis::from_scale(int order, double scale, Vector coeffs) {
  return SvletBasis(order, scale, std::nullopt, std::move(coeffs));
}

double SvletBasis::raw(double y) const {
  double s = 0.0;
  for (int k = 0; k < order_; ++k) s += coeffs_[k] * dog_basis(k, y, scale_);
  return s;
}

double SvletBasis::raw_derivative(double y) const {
  double s = 0.0;
  for (int k = 0; k < order_; ++k) s += coeffs_[k] * dog_basis_derivative(k, y, scale_);
  return s;
}

ShrinkageRule ShrinkageRule::identity() { return ShrinkageRule(rules::Identity{}); }
ShrinkageRule ShrinkageRule::zero() { return ShrinkageRule(rules::Zero{}); }

ShrinkageRule ShrinkageRule::svht(double mu) {
  require(mu > 0.0 && finite(mu), "SVHT threshold mu must be finite and > 0");
  return ShrinkageRule(rules::Svht{mu});
}

ShrinkageRule ShrinkageRule::svst(double lambda) {
  require(lambda >= 0.0 && finite(lambda), "SVST threshold lambda must be finite and >= 0");
  return ShrinkageRule(rules::Svst{lambda});
}

ShrinkageRule ShrinkageRule::atn(double tau, double gamma) {
  require(tau > 0.0 && finite(tau), "ATN threshold tau must be finite and > 0");
  require(gamma >= 1.0 && gamma <= kMaxAtnExponent, "ATN exponent gamma must lie in [1, 64]");
  return ShrinkageRule(rules::Atn{tau, gamma});
}

ShrinkageRule ShrinkageRule::svlt(double p1, double p2, double p3) {
  require(p1 >= 0.0 && finite(p1), "SVLT slope p1 must be finite and >= 0");
  require(p2 >= 1.0 && finite(p2), "SVLT index centre p2 must be >= 1");
  require(p3 >= 0.0 && finite(p3), "SVLT offset p3 must be finite and >= 0");
  return ShrinkageRule(rules::Svlt{p1, p2, p3});
}

ShrinkageRule ShrinkageRule::svlet(SvletBasis basis) {
  return ShrinkageRule(rules::Svlet{std::move(basis)});
}

ShrinkageRule ShrinkageRule::rmt_optimal(double beta) {
  require(beta > 0.0 && beta <= 1.0, "aspect ratio beta must lie in (0, 1]");
  return ShrinkageRule(rules::RmtOptimal{beta});
}

std::string_view ShrinkageRule::name() const {
  return std::visit(overloaded{
                        [](const rules::Identity&) { return std::string_view("identity"); },
                        [](const rules::Zero&) { return std::string_view("zero"); },
                        [](const rules::Svht&) { return std::string_view("svht"); },
                        [](const rules::Svst&) { return std::string_view("svst"); },
                        [](const rules::Atn&) { return std::string_view("atn"); },
                        [](const rules::Svlt&) { return std::string_view("svlt"); },
                        [](const rules::Svlet&) { return std::string_view("svlet"); },
                        [](const rules::RmtOptimal&) { return std::string_view("rmt-optimal"); },
                    },
                    rule_);
}

std::vector<std::pair<std::string, double>> ShrinkageRule::parameters() const {
  using Params = std::vector<std::pair<std::string, double>>;
  return std::visit(overloaded{
                        [](const rules::Identity&) { return Params{}; },
                        [](const rules::Zero&) { return Params{}; },
                        [](const rules::Svht& r) { return Params{{"mu", r.mu}}; },
                        [](const rules::Svst& r) { return Params{{"lambda", r.lambda}}; },
                        [](const rules::Atn& r) { return Params{{"tau", r.tau}, {"gamma", r.gamma}}; },
                        [](const rules::Svlt& r) {
                          return Params{{"p1", r.p1}, {"p2", r.p2}, {"p3", r.p3}};
                        },
                        [](const rules::Svlet& r) {
                          Params p{{"T", r.basis.scale()}};
                          if (r.basis.constant()) p.emplace_back("C", *r.basis.constant());
                          for (int k = 0; k < r.basis.order(); ++k) {
                            p.emplace_back("a" + std::to_string(k + 1), r.basis.coeffs()[k]);
                          }
                          return p;
                        },
                        [](const rules::RmtOptimal& r) { return Params{{"beta", r.beta}}; },
                    },
                    rule_);
}

double ShrinkageRule::raw_value(double y, Index i) const {
  return std::visit(
      overloaded{
          [y](const rules::Identity&) { return y; },
          [](const rules::Zero&) { return 0.0; },
          [y](const rules::Svht& r) { return y > r.mu ? y : 0.0; },
          [y](const rules::Svst& r) { return y > r.lambda ? y - r.lambda : 0.0; },
          [y](const rules::Atn& r) {
            // y (1 - tau^g / y^g) written as y - tau (tau/y)^(g-1) so g = 1 is exactly SVST.
            if (!(y > r.tau)) return 0.0;
            return y - r.tau * std::pow(r.tau / y, r.gamma - 1.0);
          },
          [y, i](const rules::Svlt& r) {
            const double v = y * svlt_weight(r, i) - r.p3;
            return v > 0.0 ? v : 0.0;
          },
          [y](const rules::Svlet& r) { return r.basis.raw(y); },
          [y](const rules::RmtOptimal& r) { return optimal_bulk_shrink(y, AspectRatio(r.beta)); },
      },
      rule_);
}

double ShrinkageRule::value(double y, Index i) const {
  const double v = raw_value(y, i);
  return v > 0.0 ? v : 0.0;
}

double ShrinkageRule::raw_derivative(double y, Index i) const {
  return std::visit(
      overloaded{
          [](const rules::Identity&) { return 1.0; },
          [](const rules::Zero&) { return 0.0; },
          [y](const rules::Svht& r) { return y >= r.mu ? 1.0 : 0.0; },
          [y](const rules::Svst& r) { return y >= r.lambda ? 1.0 : 0.0; },
          [y](const rules::Atn& r) {
            if (y < r.tau) return 0.0;
            return 1.0 + (r.gamma - 1.0) * std::pow(r.tau / y, r.gamma);
          },
          [y, i](const rules::Svlt& r) {
            const double w = svlt_weight(r, i);
            return y * w >= r.p3 ? w : 0.0;
          },
          [y](const rules::Svlet& r) { return r.basis.raw_derivative(y); },
          [y](const rules::RmtOptimal& r) {
            return optimal_bulk_shrink_derivative(y, AspectRatio(r.beta));
          },
      },
      rule_);
}

double ShrinkageRule::derivative(double y, Index i) const {
  if (!(y > 0.0)) throw ContractError("derivative requires y > 0");
  if (const auto* s = std::get_if<rules::Svlet>(&rule_)) {
    return s->basis.raw(y) < 0.0 ? 0.0 : s->basis.raw_derivative(y);
  }
  return raw_derivative(y, i);
}

void require_descending(const Vector& spectrum) {
  for (Index i = 0; i < spectrum.size(); ++i) {
    if (!(spectrum[i] >= 0.0) || !std::isfinite(spectrum[i])) {
      throw ContractError("spectrum entry " + std::to_string(i) + " is negative or not finite");
    }
    if (i > 0 && spectrum[i] > spectrum[i - 1]) {
      throw ContractError("spectrum is not descending at index " + std::to_string(i));
    }
  }
}

namespace {

void require_index_range(const ShrinkageRule& rule, Index L) {
  if (const auto* s = std::get_if<rules::Svlt>(&rule.variant())) {
    if (s->p2 > static_cast<double>(L)) {
      throw ContractError("SVLT index centre p2 exceeds the spectrum length");
    }
  }
}

}  // namespace

Vector apply(const ShrinkageRule& rule, const Vector& spectrum) {
  require_descending(spectrum);
  require_index_range(rule, spectrum.size());
  Vector out(spectrum.size());
  for (Index i = 0; i < spectrum.size(); ++i) out[i] = rule.value(spectrum[i], i);
  return out;
}

Vector apply_raw(const ShrinkageRule& rule, const Vector& spectrum) {
  require_descending(spectrum);
  require_index_range(rule, spectrum.size());
  Vector out(spectrum.size());
  for (Index i = 0; i < spectrum.size(); ++i) out[i] = rule.raw_value(spectrum[i], i);
  return out;
}

double derivative(const ShrinkageRule& rule, double y, Index i) { return rule.derivative(y, i); }

}  // namespace svshrink
