#include "config.hpp"

#include <fstream>
#include <sstream>

#include "svshrink/errors.hpp"

namespace svshrink::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

long long to_integer(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument(s);
}

}  // namespace

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  for (const auto& part : split(text, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      out.push_back(static_cast<Index>(to_integer(part)));
    } else {
      const long long lo = to_integer(trim(part.substr(0, colon)));
      const long long hi = to_integer(trim(part.substr(colon + 1)));
      if (hi < lo) throw std::invalid_argument(part);
      for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<Index>(v));
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(to_double(part));
  return out;
}

ExperimentGrid BenchConfig::grid(std::uint64_t seed, unsigned threads) const {
  ExperimentGrid g;
  g.n = n;
  g.m = m;
  g.ranks = ranks;
  g.snrs = snrs;
  g.trials = trials;
  g.seed = seed;
  for (const auto& name : methods) {
    MethodSpec method = MethodSpec::parse(name);
    if (name == "svlet") {
      method.constant = constant;
      method.order = order;
    }
    g.methods.push_back(method);
  }
  g.threads = threads;
  g.record_time = record_time;
  g.sure.tol = tol;
  g.sure.jitter = jitter;
  g.validate();
  return g;
}

BenchConfig reference_preset() {
  BenchConfig c;
  c.n = 50;
  c.m = 50;
  c.ranks = parse_index_list("1:50");
  c.snrs = {0.5, 1.0, 1.5, 2.0, 4.0};
  c.trials = 10;
  c.methods.clear();
  for (const auto& method : all_methods()) {
    c.methods.push_back(method.kind == MethodKind::Svlet ? "svlet" : method.label());
  }
  c.sensitivity = true;
  c.c_values.clear();
  for (int v = 1; v <= 20; ++v) c.c_values.push_back(v);
  c.k_values = {1, 2, 3, 4, 5};
  c.output_dir = "reference_out";
  return c;
}

BenchConfig parse_config(std::istream& in, BenchConfig c) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n") c.n = static_cast<Index>(to_integer(value));
      else if (key == "m") c.m = static_cast<Index>(to_integer(value));
      else if (key == "ranks") c.ranks = parse_index_list(value);
      else if (key == "snrs") c.snrs = parse_double_list(value);
      else if (key == "trials") c.trials = static_cast<int>(to_integer(value));
      else if (key == "methods") c.methods = split(value, ',');
      else if (key == "C") c.constant = to_double(value);
      else if (key == "K") c.order = static_cast<int>(to_integer(value));
      else if (key == "sensitivity") c.sensitivity = to_bool(value);
      else if (key == "c_values") c.c_values = parse_double_list(value);
      else if (key == "k_values") {
        c.k_values.clear();
        for (Index k : parse_index_list(value)) c.k_values.push_back(static_cast<int>(k));
      }
      else if (key == "timing") c.timing = to_bool(value);
      else if (key == "record_time") c.record_time = to_bool(value);
      else if (key == "output_dir") c.output_dir = value;
      else if (key == "gap_tol") c.tol.gap = to_double(value);
      else if (key == "ridge_condition") c.tol.ridge_condition = to_double(value);
      else if (key == "ridge_scale") c.tol.ridge_scale = to_double(value);
      else if (key == "reconstruction_tol") c.tol.reconstruction = to_double(value);
      else if (key == "io_tol") c.tol.io_roundtrip = to_double(value);
      else if (key == "jitter") c.jitter = to_bool(value);
      else throw ParseError("unknown key '" + key + "'", line_no);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("bad value '" + value + "' for key '" + key + "'", line_no);
    }
  }

  if (!(c.constant > 0.0)) throw ContractError("C must be > 0");
  if (c.order < 1) throw ContractError("K must be >= 1");
  if (!(c.tol.gap >= 0.0) || !(c.tol.ridge_condition > 0.0) || !(c.tol.ridge_scale >= 0.0)) {
    throw ContractError("tolerance overrides must be non-negative");
  }
  for (double v : c.c_values) {
    if (!(v > 0.0)) throw ContractError("c_values must be > 0");
  }
  for (int k : c.k_values) {
    if (k < 1) throw ContractError("k_values must be >= 1");
  }
  return c;
}

BenchConfig load_config(const std::filesystem::path& path, BenchConfig base) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot open config " + path.string());
  return parse_config(in, std::move(base));
}

}  // namespace svshrink::cli
