#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tcdesign/constructors.hpp"
#include "tcdesign/criteria.hpp"
#include "tcdesign/design.hpp"
#include "tcdesign/oracle.hpp"

namespace tcdesign {

using json = nlohmann::json;

using AnyDesign = std::variant<ExactDesign, ApproxDesign<Rational>, ApproxDesign<double>>;

inline json to_json(const ExactDesign& design) {
  json alloc = json::array();
  for (int i = 0; i <= design.v(); ++i) {
    json row = json::array();
    for (int k = 0; k < design.d(); ++k) row.push_back(design(i, k));
    alloc.push_back(std::move(row));
  }
  return json{{"kind", "exact"},
              {"v", design.v()},
              {"d", design.d()},
              {"m", design.block_sizes()},
              {"allocation", std::move(alloc)}};
}

inline json to_json(const ApproxDesign<Rational>& design) {
  json alloc = json::array();
  for (int i = 0; i <= design.v(); ++i) {
    json row = json::array();
    for (int k = 0; k < design.d(); ++k) row.push_back(to_string(design(i, k)));
    alloc.push_back(std::move(row));
  }
  return json{{"kind", "approximate"},
              {"v", design.v()},
              {"d", design.d()},
              {"allocation", std::move(alloc)}};
}

inline json to_json(const ApproxDesign<double>& design) {
  json alloc = json::array();
  for (int i = 0; i <= design.v(); ++i) {
    json row = json::array();
    for (int k = 0; k < design.d(); ++k) row.push_back(design(i, k));
    alloc.push_back(std::move(row));
  }
  return json{{"kind", "approximate"},
              {"v", design.v()},
              {"d", design.d()},
              {"allocation", std::move(alloc)}};
}

inline json to_json(const AnyDesign& design) {
  return std::visit([](const auto& d) { return to_json(d); }, design);
}

// Accepts the shared design schema. Approximate allocations given as
// "p/q" strings (or integers) parse into exact rationals; any
// non-integer number switches the design to floating point.
inline AnyDesign design_from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("design document must be a JSON object");
  for (const char* key : {"kind", "v", "d", "allocation"})
    if (!doc.contains(key))
      throw std::invalid_argument(std::string("design document missing field '") + key + "'");
  const std::string kind = doc.at("kind").get<std::string>();
  const int v = doc.at("v").get<int>();
  const int d = doc.at("d").get<int>();
  const json& alloc = doc.at("allocation");
  if (!alloc.is_array() || static_cast<int>(alloc.size()) != v + 1)
    throw std::invalid_argument("allocation must have v+1 rows");
  for (const json& row : alloc)
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      throw std::invalid_argument("every allocation row must have d entries");

  if (kind == "exact") {
    if (!doc.contains("m")) throw std::invalid_argument("exact design document missing field 'm'");
    std::vector<Count> m = doc.at("m").get<std::vector<Count>>();
    Matrix<Count> table(v + 1, d);
    for (int i = 0; i <= v; ++i)
      for (int k = 0; k < d; ++k) {
        const json& cell = alloc[i][k];
        if (!cell.is_number_integer())
          throw std::invalid_argument("exact allocation entries must be integers");
        table(i, k) = cell.get<Count>();
      }
    return ExactDesign(std::move(m), std::move(table));
  }
  if (kind != "approximate") throw std::invalid_argument("kind must be 'exact' or 'approximate'");

  bool real_mode = false;
  for (int i = 0; i <= v && !real_mode; ++i)
    for (int k = 0; k < d; ++k)
      if (alloc[i][k].is_number_float()) {
        real_mode = true;
        break;
      }
  if (real_mode) {
    Matrix<double> table(v + 1, d);
    for (int i = 0; i <= v; ++i)
      for (int k = 0; k < d; ++k) {
        const json& cell = alloc[i][k];
        if (cell.is_number())
          table(i, k) = cell.get<double>();
        else if (cell.is_string())
          table(i, k) = to_double(parse_rational(cell.get<std::string>()));
        else
          throw std::invalid_argument("allocation entries must be numbers or 'p/q' strings");
      }
    return ApproxDesign<double>(std::move(table));
  }
  Matrix<Rational> table(v + 1, d);
  for (int i = 0; i <= v; ++i)
    for (int k = 0; k < d; ++k) {
      const json& cell = alloc[i][k];
      if (cell.is_string())
        table(i, k) = parse_rational(cell.get<std::string>());
      else if (cell.is_number_integer())
        table(i, k) = make_rational(cell.get<long>());
      else
        throw std::invalid_argument("allocation entries must be numbers or 'p/q' strings");
    }
  return ApproxDesign<Rational>(std::move(table));
}

namespace detail {

template <typename D, typename Format>
std::string design_csv(const D& design, Format&& format) {
  std::ostringstream out;
  out << "treatment";
  for (int k = 1; k <= design.d(); ++k) out << ",block_" << k;
  out << "\n";
  for (int i = 0; i <= design.v(); ++i) {
    out << i;
    for (int k = 0; k < design.d(); ++k) out << "," << format(design(i, k));
    out << "\n";
  }
  return out.str();
}

inline std::string format_double(double x) {
  json j = x;
  return j.dump();
}

}  // namespace detail

inline std::string to_csv(const ExactDesign& design) {
  return detail::design_csv(design, [](Count x) { return std::to_string(x); });
}
inline std::string to_csv(const ApproxDesign<Rational>& design) {
  return detail::design_csv(design, [](const Rational& x) { return to_string(x); });
}
inline std::string to_csv(const ApproxDesign<double>& design) {
  return detail::design_csv(design, [](double x) { return detail::format_double(x); });
}
inline std::string to_csv(const AnyDesign& design) {
  return std::visit([](const auto& d) { return to_csv(d); }, design);
}

inline json to_json(const CriterionValue& value) {
  json out{{"criterion", criterion_name(value.criterion)}, {"feasible", value.feasible}};
  if (value.feasible)
    out["value"] = value.value;
  else
    out["value"] = nullptr;
  if (value.exact) out["value_exact"] = to_string(*value.exact);
  return out;
}

inline json to_json(const ConditionReport& report) {
  json conditions = json::object();
  for (const auto& check : report.checks) conditions[check.name] = check.passed;
  json out{{"family", family_name(report.family)},
           {"satisfied", report.satisfied},
           {"conditions", std::move(conditions)},
           {"violations", report.violations()}};
  if (report.thm5_R) out["R"] = *report.thm5_R;
  return out;
}

inline json to_json(const EnumerationSpace& space) {
  json per_column = json::array();
  for (const auto& c : space.per_column) per_column.push_back(c.get_str());
  return json{{"v", space.v},
              {"d", space.d},
              {"m", space.m},
              {"per_column", std::move(per_column)},
              {"total", space.total.get_str()}};
}

// wall time is reported separately by callers that need byte-stable
// output (the CLI prints it on the diagnostic stream).
inline json to_json(const Certificate& cert, bool include_timing = true) {
  json out{{"claim", claim_name(cert.claim)},
           {"instance", json{{"v", cert.v}, {"d", cert.d}, {"m", cert.m}}},
           {"optimum", cert.optimum ? json(to_string(*cert.optimum)) : json(nullptr)},
           {"optimizer_count", cert.optimizer_count},
           {"first_optimizer",
            cert.first_optimizer ? to_json(*cert.first_optimizer) : json(nullptr)},
           {"holds", cert.holds},
           {"vacuous", cert.vacuous}};
  if (include_timing) out["wall_time_seconds"] = cert.wall_time_seconds;
  if (!cert.extra.empty()) out["extra"] = cert.extra;
  if (!cert.note.empty()) out["note"] = cert.note;
  return out;
}

inline json to_json(const Optimum& opt) {
  return json{{"criterion", criterion_name(opt.criterion)},
              {"instance", json{{"v", opt.v}, {"d", opt.d}, {"m", opt.m}}},
              {"optimum", opt.value ? json(to_string(*opt.value)) : json(nullptr)},
              {"optimum_value", opt.value_double},
              {"optimizer_count", opt.optimizer_count},
              {"feasible_count", opt.feasible_count},
              {"design_count", opt.design_count},
              {"first_optimizer",
               opt.optimizers.empty() ? json(nullptr) : to_json(opt.optimizers.front())},
              {"note", opt.note}};
}

}  // namespace tcdesign
