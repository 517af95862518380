#pragma once

// Tabular experiment reports and their deterministic CSV / JSON encodings.
//
// CSV: optional "# key=value" metadata lines (sorted by key), then the header,
// then one line per row with every number printed as %.17g. An empty report
// without metadata is exactly the header line.
// JSON: {"columns": [...], "kind": ..., "metadata": {...}, "rows": [[...]]}
// with keys sorted; NaN encodes as null.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wasslearn/error.hpp"

namespace wasslearn::harness {

using nlohmann::json;

struct Report {
  std::string kind;
  json metadata = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> violations;  ///< audit failures; not serialized
  std::vector<std::string> warnings;

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size()) throw DomainError("report row width does not match the header");
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw DomainError("report has no column '" + name + "'");
  }

  double at(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }
};

inline bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

/// Equality of the serialized content (violations and warnings excluded).
inline bool operator==(const Report& a, const Report& b) {
  if (a.kind != b.kind || a.metadata != b.metadata || a.columns != b.columns) return false;
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].size() != b.rows[i].size()) return false;
    for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
      if (!same_value(a.rows[i][j], b.rows[i][j])) return false;
    }
  }
  return true;
}

/// Columns of a tail report, in output order.
inline const std::vector<std::string>& tail_columns() {
  static const std::vector<std::string> cols{"n",          "eps",           "trials",  "exceedances",
                                             "empirical_freq", "theoretical_bound", "bound_valid"};
  return cols;
}

struct TailRow {
  double n = 0;
  double eps = 0;
  std::size_t trials = 0;
  std::size_t exceedances = 0;
  double bound = 0;
  bool valid = false;
};

inline void add_tail_row(Report& r, const TailRow& t) {
  if (t.exceedances > t.trials) throw DomainError("tail row: exceedances exceed trials");
  const double freq = static_cast<double>(t.exceedances) / static_cast<double>(t.trials);
  r.add_row({t.n, t.eps, static_cast<double>(t.trials), static_cast<double>(t.exceedances), freq, t.bound,
             t.valid ? 1.0 : 0.0});
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string metadata_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_number(v.get<double>());
  return v.dump();
}

inline std::string to_csv(const Report& r) {
  std::ostringstream out;
  if (!r.kind.empty()) out << "# kind=" << r.kind << '\n';
  for (auto it = r.metadata.begin(); it != r.metadata.end(); ++it) {
    out << "# " << it.key() << '=' << metadata_value(it.value()) << '\n';
  }
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << r.columns[i];
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  return out.str();
}

inline json to_json(const Report& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr = json::array();
    for (double v : row) {
      if (std::isfinite(v)) jr.push_back(v);
      else if (std::isnan(v)) jr.push_back(nullptr);
      else jr.push_back(v > 0 ? "inf" : "-inf");
    }
    rows.push_back(std::move(jr));
  }
  return json{{"kind", r.kind}, {"metadata", r.metadata}, {"columns", r.columns}, {"rows", rows}};
}

inline std::string to_json_text(const Report& r) { return to_json(r).dump(2) + "\n"; }

inline Report report_from_json(const json& j) {
  Report r;
  try {
    r.kind = j.at("kind").get<std::string>();
    r.metadata = j.at("metadata");
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& jr : j.at("rows")) {
      std::vector<double> row;
      for (const auto& v : jr) {
        if (v.is_null()) row.push_back(NAN);
        else if (v.is_string()) row.push_back(v.get<std::string>() == "inf" ? INFINITY : -INFINITY);
        else row.push_back(v.get<double>());
      }
      r.add_row(std::move(row));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report document: ") + e.what());
  }
  return r;
}

inline std::string serialize(const Report& r, const std::string& format) {
  if (format == "csv") return to_csv(r);
  if (format == "json") return to_json_text(r);
  throw ConfigError("unknown report format '" + format + "'");
}

/// Writes the report; I/O failures raise IoError naming the path.
inline void write_report(const Report& r, const std::string& path, const std::string& format) {
  const std::string text = serialize(r, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline Report read_json_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return report_from_json(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace wasslearn::harness
