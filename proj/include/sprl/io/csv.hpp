#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sprl/core/errors.hpp"
#include "sprl/eval/metrics.hpp"

namespace sprl {

/// One line of a metrics table. Empty `fraction`, `mode` or `seed` means
/// the column does not apply to the run.
struct MetricRow {
  std::string property;
  std::optional<double> fraction;
  std::string mode;
  std::optional<std::uint64_t> seed;
  int epoch = 0;
  std::string split;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

inline constexpr const char* kMetricHeader = "property,fraction,mode,seed,epoch,split,metric,value";

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace detail {

inline void check_field(const std::string& s) {
  if (s.find_first_of(",\n\r\"") != std::string::npos)
    throw ContractError("CSV field '" + s + "' contains a separator");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + s + "'", line);
  }
  if (used != s.size()) throw ParseError("not a number: '" + s + "'", line);
  return v;
}

}  // namespace detail

inline void write_metric_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << kMetricHeader << '\n';
  for (const auto& r : rows) {
    detail::check_field(r.property);
    detail::check_field(r.mode);
    detail::check_field(r.split);
    detail::check_field(r.metric);
    out << r.property << ',' << (r.fraction ? format_double(*r.fraction) : "") << ',' << r.mode << ','
        << (r.seed ? std::to_string(*r.seed) : "") << ',' << r.epoch << ',' << r.split << ',' << r.metric << ','
        << format_double(r.value) << '\n';
  }
}

inline void write_metric_csv(const std::string& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_metric_csv(out, rows);
  if (!out) throw DataError("failed writing " + path);
}

inline std::vector<MetricRow> read_metric_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricHeader) throw ParseError("missing metrics header", 1);
  std::vector<MetricRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 8) throw ParseError("expected 8 fields, got " + std::to_string(f.size()), lineno);
    MetricRow r;
    r.property = f[0];
    if (!f[1].empty()) r.fraction = detail::parse_double(f[1], lineno);
    r.mode = f[2];
    if (!f[3].empty()) {
      try {
        r.seed = std::stoull(f[3]);
      } catch (const std::exception&) {
        throw ParseError("bad seed '" + f[3] + "'", lineno);
      }
    }
    r.epoch = static_cast<int>(detail::parse_double(f[4], lineno));
    r.split = f[5];
    r.metric = f[6];
    r.value = detail::parse_double(f[7], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<MetricRow> read_metric_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_metric_csv(in);
}

/// Rows for a report: precision/recall/f1 (and pearson in scalar mode) per
/// property, then the aggregates under property "ALL".
inline std::vector<MetricRow> report_rows(const MetricsReport& r, std::optional<std::uint64_t> seed = {},
                                          const std::string& mode = "") {
  std::vector<MetricRow> rows;
  auto add = [&](const std::string& prop, const std::string& metric, double v) {
    rows.push_back({prop, std::nullopt, mode, seed, r.epoch, r.split, metric, v});
  };
  for (const auto& [prop, m] : r.properties) {
    add(prop, "precision", m.prf.precision);
    add(prop, "recall", m.prf.recall);
    add(prop, "f1", m.prf.f1);
    if (m.correlation) add(prop, m.correlation->undefined ? "pearson[undefined]" : "pearson", m.correlation->r);
  }
  add("ALL", "micro_f1", r.micro_f1);
  add("ALL", "macro_f1", r.macro_f1);
  if (r.scalar) add("ALL", "macro_pearson", r.macro_pearson);
  return rows;
}

/// One line of a per-instance predictions file. `probability` is set for
/// binary models only; `prediction` and the binary view of `gold` use the
/// > 0 decision score (binary) or the > 3 cut (scalar).
struct PredictionRow {
  std::string instance_id;
  std::string property;
  double score = 0.0;
  std::optional<double> probability;
  bool prediction = false;
  double gold = 0.0;  // binary: 0 or 1

  friend bool operator==(const PredictionRow&, const PredictionRow&) = default;
};

inline constexpr const char* kPredictionHeader = "instance_id,property,score,probability,prediction,gold";

inline void write_predictions_csv(std::ostream& out, const std::vector<PredictionRow>& rows) {
  out << kPredictionHeader << '\n';
  for (const auto& r : rows) {
    detail::check_field(r.instance_id);
    detail::check_field(r.property);
    out << r.instance_id << ',' << r.property << ',' << format_double(r.score) << ','
        << (r.probability ? format_double(*r.probability) : "") << ',' << (r.prediction ? 1 : 0) << ','
        << format_double(r.gold) << '\n';
  }
}

inline void write_predictions_csv(const std::string& path, const std::vector<PredictionRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  write_predictions_csv(out, rows);
  if (!out) throw DataError("failed writing " + path);
}

inline std::vector<PredictionRow> read_predictions_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kPredictionHeader) throw ParseError("missing predictions header", 1);
  std::vector<PredictionRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 6) throw ParseError("expected 6 fields, got " + std::to_string(f.size()), lineno);
    PredictionRow r;
    r.instance_id = f[0];
    r.property = f[1];
    r.score = detail::parse_double(f[2], lineno);
    if (!f[3].empty()) r.probability = detail::parse_double(f[3], lineno);
    if (f[4] != "0" && f[4] != "1") throw ParseError("prediction must be 0 or 1, got '" + f[4] + "'", lineno);
    r.prediction = f[4] == "1";
    r.gold = detail::parse_double(f[5], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<PredictionRow> read_predictions_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_predictions_csv(in);
}

}  // namespace sprl
