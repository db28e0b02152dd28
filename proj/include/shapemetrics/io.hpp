#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapemetrics/metric.hpp"

// File formats:
//   curve:  {"points": [[x, y], ...]}            (closed implicitly)
//   field:  {"values": [v, ...]}
//   path:   {"times": [...], "curves": [[[x, y], ...], ...]}
// Writers emit 9 significant digits and byte-identical output for identical
// inputs; writes go through a temp file plus rename.

namespace shapemetrics::io {

inline std::string format_double(double v, int significant = 9) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", significant, v);
  return buf;
}

inline void write_text_atomic(const std::string& path,
                              const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

// ---------------------------------------------------------------------------
// Readers

inline DiscreteCurve curve_from_json(const nlohmann::json& j,
                                     const std::string& where) {
  if (!j.is_object() || !j.contains("points") || !j["points"].is_array())
    throw std::runtime_error(where + ": expected {\"points\": [[x, y], ...]}");
  std::vector<Point2> pts;
  pts.reserve(j["points"].size());
  for (const auto& q : j["points"]) {
    if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number())
      throw std::runtime_error(where + ": each point must be [x, y]");
    pts.push_back({q[0].get<double>(), q[1].get<double>()});
  }
  try {
    return DiscreteCurve(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
}

inline DiscreteCurve read_curve(const std::string& path) {
  return curve_from_json(load_json(path), path);
}

inline ScalarField read_field(const std::string& path) {
  const nlohmann::json j = load_json(path);
  if (!j.is_object() || !j.contains("values") || !j["values"].is_array())
    throw std::runtime_error(path + ": expected {\"values\": [v, ...]}");
  std::vector<double> v;
  v.reserve(j["values"].size());
  for (const auto& q : j["values"]) {
    if (!q.is_number()) throw std::runtime_error(path + ": values must be numbers");
    v.push_back(q.get<double>());
  }
  return ScalarField(std::move(v));
}

inline CurvePath read_path(const std::string& path) {
  const nlohmann::json j = load_json(path);
  if (!j.is_object() || !j.contains("times") || !j.contains("curves") ||
      !j["times"].is_array() || !j["curves"].is_array())
    throw std::runtime_error(path + ": expected {\"times\": [...], \"curves\": [...]}");
  std::vector<double> times;
  for (const auto& q : j["times"]) {
    if (!q.is_number()) throw std::runtime_error(path + ": times must be numbers");
    times.push_back(q.get<double>());
  }
  std::vector<DiscreteCurve> curves;
  curves.reserve(j["curves"].size());
  for (const auto& jc : j["curves"]) {
    nlohmann::json wrap;
    wrap["points"] = jc;
    curves.push_back(curve_from_json(wrap, path));
  }
  try {
    return CurvePath(std::move(times), std::move(curves));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Writers

inline void append_points(std::ostringstream& os,
                          const std::vector<Point2>& pts) {
  os << "[";
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j) os << ",";
    os << "[" << format_double(pts[j].x) << "," << format_double(pts[j].y) << "]";
  }
  os << "]";
}

inline std::string curve_to_json(const DiscreteCurve& c) {
  std::ostringstream os;
  os << "{\"points\":";
  append_points(os, c.points);
  os << "}\n";
  return os.str();
}

inline void write_curve(const DiscreteCurve& c, const std::string& path) {
  write_text_atomic(path, curve_to_json(c));
}

inline std::string field_to_json(const ScalarField& f) {
  std::ostringstream os;
  os << "{\"values\":[";
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (j) os << ",";
    os << format_double(f[j]);
  }
  os << "]}\n";
  return os.str();
}

inline void write_field(const ScalarField& f, const std::string& path) {
  write_text_atomic(path, field_to_json(f));
}

inline std::string path_to_json(const CurvePath& p) {
  std::ostringstream os;
  os << "{\"times\":[";
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    if (i) os << ",";
    os << format_double(p.times[i]);
  }
  os << "],\"curves\":[";
  for (std::size_t i = 0; i < p.curves.size(); ++i) {
    if (i) os << ",";
    append_points(os, p.curves[i].points);
  }
  os << "]}\n";
  return os.str();
}

inline void write_path(const CurvePath& p, const std::string& path) {
  write_text_atomic(path, path_to_json(p));
}

// CSV writer: header row plus rows of 9-significant-digit numbers.
inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) os << ",";
    os << header[c];
  }
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ",";
      os << format_double(row[c]);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace shapemetrics::io
