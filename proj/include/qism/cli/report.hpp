#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qism/scalar.hpp"

namespace qism::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolkitVersion = "0.1.0";

enum class Status { Pass, Fail, Error, Info };

constexpr const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Error: return "error";
    case Status::Info: return "info";
  }
  return "?";
}

inline json to_json(const Rational& q) { return rational_to_string(q); }
inline json to_json(double x) { return x; }
inline json to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

template <class Range>
json list_json(const Range& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(to_json(v));
  return out;
}

struct CheckRecord {
  std::string name;
  json inputs = json::object();
  json residual;   // "p/q" in exact mode, a number in float mode, null if not applicable
  json threshold;  // what `residual` was compared against
  Status status = Status::Info;
  std::string message;
  json details = json::object();
  double wall_ms = 0.0;
};

/// Pass iff the residual is literally zero (exact) or within `tol` (float).
inline Status judge(const Rational& residual, double) { return sgn(residual) == 0 ? Status::Pass : Status::Fail; }
inline Status judge(double residual, double tol) { return residual <= tol ? Status::Pass : Status::Fail; }

inline json threshold_json(const Rational&, double) { return "0/1"; }
inline json threshold_json(double, double tol) { return tol; }

struct Report {
  std::string command;
  json config;
  std::vector<CheckRecord> records;
  bool timing = false;

  std::size_t count(Status s) const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [&](const CheckRecord& r) { return r.status == s; }));
  }

  bool ok() const { return count(Status::Fail) == 0 && count(Status::Error) == 0; }

  /// 0 when every record passed or is informational, 1 otherwise.
  int exit_code() const { return ok() ? 0 : 1; }

  void sort() {
    std::stable_sort(records.begin(), records.end(),
                     [](const CheckRecord& a, const CheckRecord& b) { return a.name < b.name; });
  }

  /// Keys sorted (nlohmann::json is map-backed); wall times appear only when
  /// timing was requested, so untimed reports are byte-reproducible.
  json to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["toolkit_version"] = kToolkitVersion;
    j["command"] = command;
    j["config"] = config;
    j["records"] = json::array();
    std::vector<const CheckRecord*> order;
    for (const CheckRecord& r : records) order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->name < b->name; });
    for (const CheckRecord* r : order) {
      json e;
      e["name"] = r->name;
      e["inputs"] = r->inputs;
      e["residual"] = r->residual;
      e["threshold"] = r->threshold;
      e["status"] = to_string(r->status);
      if (!r->message.empty()) e["message"] = r->message;
      if (!r->details.empty()) e["details"] = r->details;
      if (timing) e["wall_ms"] = r->wall_ms;
      j["records"].push_back(std::move(e));
    }
    j["summary"] = {{"total", records.size()},
                    {"pass", count(Status::Pass)},
                    {"fail", count(Status::Fail)},
                    {"error", count(Status::Error)},
                    {"info", count(Status::Info)},
                    {"status", ok() ? "pass" : "fail"}};
    return j;
  }

  std::string dump_json() const { return to_json().dump(2) + "\n"; }

  /// Aligned plain-text rendering of the same records.
  std::string table() const {
    const json j = to_json();
    std::vector<std::array<std::string, 4>> rows{{"STATUS", "CHECK", "RESIDUAL", "NOTE"}};
    for (const json& r : j["records"]) {
      std::string residual = r["residual"].is_null() ? "-"
                             : r["residual"].is_string() ? r["residual"].get<std::string>()
                                                          : format_double(r["residual"].get<double>());
      rows.push_back({r["status"].get<std::string>(), r["name"].get<std::string>(), residual,
                      r.value("message", std::string{})});
    }
    std::array<std::size_t, 3> width{};
    for (const auto& row : rows)
      for (std::size_t c = 0; c < 3; ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream out;
    for (const auto& row : rows) {
      std::string line;
      for (std::size_t c = 0; c < 3; ++c) line += row[c] + std::string(width[c] - row[c].size() + 2, ' ');
      line += row[3];
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out << line << "\n";
    }
    const json& s = j["summary"];
    out << "\n" << command << ": " << s["pass"] << " pass, " << s["fail"] << " fail, " << s["error"] << " error, "
        << s["info"] << " info -> " << s["status"].get<std::string>() << "\n";
    return out.str();
  }

 private:
  static std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
  }
};

}  // namespace qism::cli
