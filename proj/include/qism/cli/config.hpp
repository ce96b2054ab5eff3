#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qism/chain.hpp"
#include "qism/decomposition.hpp"
#include "qism/errors.hpp"
#include "qism/rmatrix.hpp"
#include "qism/scalar.hpp"

namespace qism::cli {

using json = nlohmann::json;

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> suites{"rmatrix", "rtt", "commutation", "vacuum", "transfer-commute"};
  return suites;
}

/// A validated run configuration. Every random draw made by a command is a
/// function of `seed` and the record being produced, nothing else.
struct RunConfig {
  std::string model = "xxx";
  std::size_t n = 0;
  std::optional<Scalar> homogeneous;  // shared inhomogeneity, if given that way
  std::vector<Scalar> xi;             // always N entries after parsing
  Mode mode = Mode::Exact;
  Complex eta{0.0, 0.0};
  Tolerance tolerance;
  double match_tolerance = 1e-9;
  double certificate_tolerance = 1e-10;
  std::uint64_t seed = 0;
  std::vector<std::string> suites = known_suites();
  std::vector<std::size_t> excitations{1};
  std::optional<std::vector<Split>> splits;  // nullopt: every contiguous split with K >= 2
  std::size_t samples = 3;
  std::size_t guesses = 32;
  std::optional<Scalar> mu;
  bool require_homogeneous = false;
  bool timing = false;
  std::optional<std::string> output;

  bool exact() const { return mode == Mode::Exact; }

  std::vector<Split> resolved_splits() const {
    if (splits) return *splits;
    std::vector<Split> out;
    for (std::size_t k = 2; k <= n; ++k)
      for (Split& s : all_splits(n, k)) out.push_back(std::move(s));
    return out;
  }

  template <Field F>
  Kernel<F> kernel() const {
    if constexpr (is_exact_v<F>) {
      return Kernel<F>::rational();
    } else {
      if (model == "xxz") return Kernel<F>::trigonometric(eta);
      return Kernel<F>::rational();
    }
  }

  template <Field F>
  ChainSpec<F> chain() const {
    std::vector<F> values;
    for (const Scalar& s : xi) values.push_back(as_field<F>(s));
    return ChainSpec<F>(kernel<F>(), std::move(values));
  }

  template <Field F>
  static F as_field(const Scalar& s) {
    if constexpr (is_exact_v<F>) return s.rational();
    else return s.to_complex();
  }

  json echo() const;
};

namespace detail {

[[noreturn]] inline void invalid(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

inline json scalar_json(const Scalar& s) {
  if (s.is_exact()) return rational_to_string(s.rational());
  return json::array({s.complex().real(), s.complex().imag()});
}

/// Integers and "p/q" strings in either mode; plain floats and [re, im] pairs
/// only in float mode.
inline Scalar parse_scalar(const json& v, Mode mode, const std::string& field) {
  if (v.is_number_integer()) {
    const long x = v.get<long>();
    return mode == Mode::Exact ? Scalar(Rational(x)) : Scalar(Complex(static_cast<double>(x), 0.0));
  }
  if (v.is_string()) {
    Rational q;
    try {
      q = parse_rational(v.get<std::string>());
    } catch (const Error& e) {
      invalid(field + ": " + e.what());
    }
    return mode == Mode::Exact ? Scalar(q) : Scalar(to_complex(q));
  }
  if (mode == Mode::Exact) invalid(field + ": exact mode takes integers or \"p/q\" strings");
  if (v.is_number()) return Scalar(Complex(v.get<double>(), 0.0));
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Scalar(Complex(v[0].get<double>(), v[1].get<double>()));
  invalid(field + ": expected a number, a \"p/q\" string or an [re, im] pair");
}

inline std::size_t parse_count(const json& v, const std::string& field, std::size_t lo, std::size_t hi) {
  if (!v.is_number_integer()) invalid(field + ": expected an integer");
  const long long x = v.get<long long>();
  if (x < static_cast<long long>(lo) || x > static_cast<long long>(hi))
    invalid(field + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<std::size_t>(x);
}

inline double parse_positive(const json& v, const std::string& field) {
  if (!v.is_number()) invalid(field + ": expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) invalid(field + ": must be positive and finite");
  return x;
}

inline bool parse_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) invalid(field + ": expected true or false");
  return v.get<bool>();
}

}  // namespace detail

inline constexpr std::size_t kMaxConfigSites = 16;

/// Schema check and normalization. Unknown keys are rejected so that typos do
/// not silently fall back to defaults.
inline RunConfig parse_config(const json& doc) {
  using detail::invalid;
  if (!doc.is_object()) invalid("configuration must be a JSON object");

  static const std::set<std::string> allowed{
      "model",   "N",       "xi",      "homogeneous", "eta",     "mode",    "tolerance",
      "seed",    "suites",  "M",       "splits",      "samples", "guesses", "mu",
      "timing",  "output",  "match_tolerance",        "certificate_tolerance",
      "require_homogeneous"};
  for (const auto& [key, _] : doc.items())
    if (!allowed.contains(key)) invalid("unknown key '" + key + "'");

  RunConfig c;
  if (doc.contains("model")) {
    if (!doc["model"].is_string()) invalid("model: expected \"xxx\" or \"xxz\"");
    c.model = doc["model"].get<std::string>();
    if (c.model != "xxx" && c.model != "xxz") invalid("model: expected \"xxx\" or \"xxz\"");
  }

  c.mode = c.model == "xxz" ? Mode::Float : Mode::Exact;
  if (doc.contains("mode")) {
    const json& m = doc["mode"];
    if (m == "exact") c.mode = Mode::Exact;
    else if (m == "float") c.mode = Mode::Float;
    else invalid("mode: expected \"exact\" or \"float\"");
  }
  if (c.model == "xxz" && c.mode == Mode::Exact) invalid("mode: the xxz model needs float mode");

  if (!doc.contains("N")) invalid("N: required");
  c.n = detail::parse_count(doc["N"], "N", 1, kMaxConfigSites);

  if (doc.contains("xi") && doc.contains("homogeneous")) invalid("give either xi or homogeneous, not both");
  if (doc.contains("xi")) {
    const json& xs = doc["xi"];
    if (!xs.is_array()) invalid("xi: expected a list");
    if (xs.size() != c.n)
      invalid("xi: has " + std::to_string(xs.size()) + " entries but N=" + std::to_string(c.n));
    for (std::size_t i = 0; i < xs.size(); ++i)
      c.xi.push_back(detail::parse_scalar(xs[i], c.mode, "xi[" + std::to_string(i) + "]"));
  } else {
    c.homogeneous = doc.contains("homogeneous") ? detail::parse_scalar(doc["homogeneous"], c.mode, "homogeneous")
                                                : (c.exact() ? Scalar(Rational(0)) : Scalar(Complex{}));
    c.xi.assign(c.n, *c.homogeneous);
  }

  if (doc.contains("eta")) {
    if (c.model != "xxz") invalid("eta: only meaningful for the xxz model");
    c.eta = detail::parse_scalar(doc["eta"], Mode::Float, "eta").complex();
  } else if (c.model == "xxz") {
    invalid("eta: required for the xxz model");
  }
  if (c.model == "xxz" && std::abs(std::sinh(c.eta)) < kPoleThreshold) invalid("eta: sinh(eta) vanishes");

  if (doc.contains("tolerance")) {
    const json& t = doc["tolerance"];
    if (!t.is_object()) invalid("tolerance: expected {\"absolute\": x, \"relative\": y}");
    double a = c.tolerance.absolute;
    double r = c.tolerance.relative;
    for (const auto& [key, v] : t.items()) {
      if (key == "absolute") a = detail::parse_positive(v, "tolerance.absolute");
      else if (key == "relative") r = detail::parse_positive(v, "tolerance.relative");
      else invalid("tolerance: unknown key '" + key + "'");
    }
    c.tolerance = Tolerance(a, r);
  }
  if (doc.contains("match_tolerance")) c.match_tolerance = detail::parse_positive(doc["match_tolerance"], "match_tolerance");
  if (doc.contains("certificate_tolerance"))
    c.certificate_tolerance = detail::parse_positive(doc["certificate_tolerance"], "certificate_tolerance");

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) invalid("seed: expected a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }

  if (doc.contains("suites")) {
    const json& s = doc["suites"];
    if (!s.is_array() || s.empty()) invalid("suites: expected a non-empty list");
    c.suites.clear();
    for (const json& name : s) {
      if (!name.is_string()) invalid("suites: entries must be strings");
      const std::string str = name.get<std::string>();
      if (std::find(known_suites().begin(), known_suites().end(), str) == known_suites().end())
        invalid("suites: unknown suite '" + str + "'");
      if (std::find(c.suites.begin(), c.suites.end(), str) == c.suites.end()) c.suites.push_back(str);
    }
  }

  if (doc.contains("M")) {
    const json& m = doc["M"];
    const json list = m.is_array() ? m : json::array({m});
    if (list.empty()) invalid("M: expected an integer or a non-empty list");
    c.excitations.clear();
    for (const json& v : list) {
      if (!v.is_number_integer() || v.get<long long>() < 0) invalid("M: entries must be non-negative integers");
      if (v.get<long long>() > static_cast<long long>(c.n))
        invalid("M=" + std::to_string(v.get<long long>()) + " exceeds N=" + std::to_string(c.n));
      c.excitations.push_back(v.get<std::size_t>());
    }
  }

  if (doc.contains("splits")) {
    const json& s = doc["splits"];
    if (s == "all") {
      c.splits.reset();
    } else if (s.is_array()) {
      std::vector<Split> splits;
      for (const json& cuts : s) {
        if (!cuts.is_array()) invalid("splits: each split is a list of cut positions");
        Split sp;
        for (const json& x : cuts) sp.cuts.push_back(detail::parse_count(x, "splits", 1, c.n));
        try {
          sp.validate(c.n);
        } catch (const Error& e) {
          invalid(std::string("splits: ") + e.what());
        }
        splits.push_back(std::move(sp));
      }
      c.splits = std::move(splits);
    } else {
      invalid("splits: expected \"all\" or a list of cut lists");
    }
  }

  if (doc.contains("samples")) c.samples = detail::parse_count(doc["samples"], "samples", 1, 1000);
  if (doc.contains("guesses")) c.guesses = detail::parse_count(doc["guesses"], "guesses", 1, 10000);
  if (doc.contains("mu")) c.mu = detail::parse_scalar(doc["mu"], c.mode, "mu");
  if (doc.contains("timing")) c.timing = detail::parse_bool(doc["timing"], "timing");
  if (doc.contains("require_homogeneous"))
    c.require_homogeneous = detail::parse_bool(doc["require_homogeneous"], "require_homogeneous");
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) invalid("output: expected a path");
    c.output = doc["output"].get<std::string>();
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    detail::invalid(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::invalid("cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

/// Normalized configuration with defaults filled in. Reparsing it reproduces
/// the same run; the output path is not part of it.
inline json RunConfig::echo() const {
  json j;
  j["model"] = model;
  j["N"] = n;
  if (homogeneous) j["homogeneous"] = detail::scalar_json(*homogeneous);
  else {
    j["xi"] = json::array();
    for (const Scalar& s : xi) j["xi"].push_back(detail::scalar_json(s));
  }
  j["mode"] = exact() ? "exact" : "float";
  if (model == "xxz") j["eta"] = json::array({eta.real(), eta.imag()});
  j["tolerance"] = {{"absolute", tolerance.absolute}, {"relative", tolerance.relative}};
  j["match_tolerance"] = match_tolerance;
  j["certificate_tolerance"] = certificate_tolerance;
  j["seed"] = seed;
  j["suites"] = suites;
  j["M"] = excitations;
  if (splits) {
    j["splits"] = json::array();
    for (const Split& s : *splits) j["splits"].push_back(s.cuts);
  } else {
    j["splits"] = "all";
  }
  j["samples"] = samples;
  j["guesses"] = guesses;
  if (mu) j["mu"] = detail::scalar_json(*mu);
  j["timing"] = timing;
  j["require_homogeneous"] = require_homogeneous;
  return j;
}

}  // namespace qism::cli
