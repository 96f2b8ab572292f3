#pragma once

// Check reports and their JSON / CSV encodings. Rationals are written both as
// exact "p/q" strings and as decimal approximations.

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mwsparse/bracket.hpp"

namespace mwsparse {

using Json = nlohmann::ordered_json;

enum class Verdict { ExactPass, BracketPass, Fail, ReportOnly };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::ExactPass: return "ExactPass";
    case Verdict::BracketPass: return "BracketPass";
    case Verdict::Fail: return "Fail";
    case Verdict::ReportOnly: return "ReportOnly";
  }
  return "?";
}

inline bool passed(Verdict v) { return v != Verdict::Fail; }

/// One compared pair inside a check.
struct Detail {
  std::string name;
  Verdict verdict = Verdict::ExactPass;
  std::string relation;  ///< "==", "<=", ">=", "<" ...
  std::optional<Bracket> lhs;
  std::optional<Bracket> rhs;
  std::string where;     ///< cube or point the comparison was made at
};

struct CheckReport {
  std::string claim;
  Json params = Json::object();
  Verdict verdict = Verdict::ReportOnly;
  std::optional<Bracket> lhs;
  std::optional<Bracket> rhs;
  std::optional<Bracket> bracket;  ///< headline enclosure (ratios, norms)
  std::vector<Detail> details;
  std::optional<Detail> counterwitness;
  std::vector<std::string> notes;
  double runtime_ms = 0;
  Json extra = Json::object();     ///< check-specific tables

  void add(Detail d) { details.push_back(std::move(d)); }

  /// Verdict from details: any Fail wins, then BracketPass, then ExactPass;
  /// all-ReportOnly stays ReportOnly. The first Fail becomes the counterwitness.
  void settle() {
    bool any_bracket = false, any_exact = false;
    for (const auto& d : details) {
      if (d.verdict == Verdict::Fail) {
        verdict = Verdict::Fail;
        if (!counterwitness) counterwitness = d;
        return;
      }
      any_bracket |= d.verdict == Verdict::BracketPass;
      any_exact |= d.verdict == Verdict::ExactPass;
    }
    verdict = any_bracket ? Verdict::BracketPass : any_exact ? Verdict::ExactPass : Verdict::ReportOnly;
  }
};

// Comparison helpers -----------------------------------------------------------

inline Detail exact_compare(std::string name, const ExactRational& a, std::string relation, const ExactRational& b,
                            std::string where = {}) {
  bool ok = false;
  if (relation == "==") ok = a == b;
  else if (relation == "<=") ok = a <= b;
  else if (relation == ">=") ok = a >= b;
  else if (relation == "<") ok = a < b;
  else if (relation == ">") ok = a > b;
  else throw std::invalid_argument("unknown relation " + relation);
  return Detail{std::move(name), ok ? Verdict::ExactPass : Verdict::Fail, std::move(relation), Bracket(a), Bracket(b),
                std::move(where)};
}

/// a <= b (or a < b with strict) certified from enclosures. Undecided at the
/// working precision counts as Fail: nothing is claimed that is not certified.
inline Detail bracket_le(std::string name, const Bracket& a, const Bracket& b, bool strict = false,
                         std::string where = {}) {
  bool ok = false;
  if (a.hi()) ok = strict ? *a.hi() < b.lo() : *a.hi() <= b.lo();
  const bool exact = a.is_exact() && b.is_exact();
  return Detail{std::move(name), ok ? (exact ? Verdict::ExactPass : Verdict::BracketPass) : Verdict::Fail,
                strict ? "<" : "<=", a, b, std::move(where)};
}

inline Detail report_only(std::string name, std::optional<Bracket> lhs, std::string relation = {},
                          std::optional<Bracket> rhs = std::nullopt, std::string where = {}) {
  return Detail{std::move(name), Verdict::ReportOnly, std::move(relation), std::move(lhs), std::move(rhs),
                std::move(where)};
}

// JSON -------------------------------------------------------------------------

inline Json rational_json(const ExactRational& q) { return Json(q.get_str()); }

inline Json bound_json(const std::optional<ExactRational>& q) {
  return q ? Json(q->get_str()) : Json("+inf");
}

inline double bound_double(const std::optional<ExactRational>& q) {
  return q ? q->get_d() : std::numeric_limits<double>::infinity();
}

/// Exact value "p/q" when the bracket is a point, "[lo, hi]" otherwise.
inline Json value_json(const std::optional<Bracket>& b) {
  if (!b) return nullptr;
  if (b->is_exact()) return b->lo().get_str();
  return b->str();
}

inline Json approx_json(const std::optional<Bracket>& b) {
  if (!b) return nullptr;
  if (!b->bounded()) return "inf";
  return b->mid_double();
}

inline Json to_json(const Detail& d) {
  Json j;
  j["name"] = d.name;
  j["verdict"] = to_string(d.verdict);
  j["relation"] = d.relation;
  j["lhs"] = value_json(d.lhs);
  j["lhs_approx"] = approx_json(d.lhs);
  j["rhs"] = value_json(d.rhs);
  j["rhs_approx"] = approx_json(d.rhs);
  if (!d.where.empty()) j["where"] = d.where;
  return j;
}

inline Json to_json(const CheckReport& r, bool with_details = true, bool with_timing = true) {
  Json j;
  j["claim"] = r.claim;
  j["params"] = r.params;
  j["verdict"] = to_string(r.verdict);
  j["lhs"] = value_json(r.lhs);
  j["lhs_approx"] = approx_json(r.lhs);
  j["rhs"] = value_json(r.rhs);
  j["rhs_approx"] = approx_json(r.rhs);
  const std::optional<Bracket> headline = r.bracket ? r.bracket : r.lhs;
  if (headline) {
    j["bracket_lo"] = rational_json(headline->lo());
    j["bracket_hi"] = bound_json(headline->hi());
    j["bracket_lo_approx"] = headline->lo_double();
    const double hi = headline->hi_double();
    j["bracket_hi_approx"] = std::isinf(hi) ? Json("inf") : Json(hi);
  } else {
    j["bracket_lo"] = nullptr;
    j["bracket_hi"] = nullptr;
  }
  if (r.counterwitness) j["counterwitness"] = to_json(*r.counterwitness);
  if (with_details) {
    j["details"] = Json::array();
    for (const auto& d : r.details) j["details"].push_back(to_json(d));
  }
  if (!r.extra.empty()) j["data"] = r.extra;
  if (!r.notes.empty()) j["notes"] = r.notes;
  if (with_timing) j["runtime_ms"] = r.runtime_ms;
  return j;
}

/// One-line human summary.
inline std::string summary_line(const CheckReport& r) {
  std::ostringstream os;
  os << to_string(r.verdict) << "  " << r.claim << " " << r.params.dump();
  if (r.lhs) os << "  lhs=" << value_json(r.lhs).get<std::string>();
  if (r.rhs) os << "  rhs=" << value_json(r.rhs).get<std::string>();
  if (r.counterwitness) os << "  witness: " << r.counterwitness->name << " at " << r.counterwitness->where;
  return os.str();
}

/// Times fn() and stores the elapsed milliseconds in the returned report.
template <class Fn>
CheckReport timed(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  CheckReport r = fn();
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace mwsparse
