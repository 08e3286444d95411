#include "splash/cli/panel_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace splash::cli {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits one line; double quotes may wrap a field, "" escapes a quote.
std::vector<std::string> split_fields(const std::string& line, std::size_t row) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"' && trim(cur).empty()) {
      quoted = true;
      was_quoted = true;
      cur.clear();
    } else if (ch == ',') {
      out.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ParseError("unterminated quote in row " + std::to_string(row), row, out.size() + 1);
  out.push_back(was_quoted ? cur : trim(cur));
  return out;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan";
}

double parse_cell(const std::string& s, std::size_t row, std::size_t col) {
  if (is_missing_token(s)) return kMissing;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         ": cannot read '" + s + "' as a number",
                     row, col);
  return v;
}

void interpolate_unit(std::span<double> x, const std::string& label) {
  std::vector<std::size_t> seen;
  for (std::size_t t = 0; t < x.size(); ++t)
    if (!std::isnan(x[t])) seen.push_back(t);
  if (seen.empty()) throw SplashError("unit '" + label + "' has no observed values to interpolate from");
  for (std::size_t t = 0; t < seen.front(); ++t) x[t] = x[seen.front()];
  for (std::size_t t = seen.back() + 1; t < x.size(); ++t) x[t] = x[seen.back()];
  for (std::size_t k = 0; k + 1 < seen.size(); ++k) {
    const std::size_t a = seen[k], b = seen[k + 1];
    for (std::size_t t = a + 1; t < b; ++t) {
      const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
      x[t] = (1.0 - w) * x[a] + w * x[b];
    }
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw SplashError("format_double: conversion failed");
  return std::string(buf, ptr);
}

Panel parse_panel_csv(std::istream& in, const PanelReadOptions& opts) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> labels;
  while (labels.empty() && std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    labels = split_fields(line, row);
  }
  if (labels.empty()) throw ParseError("panel file is empty", 1, 1);
  for (std::size_t j = 0; j < labels.size(); ++j)
    if (labels[j].empty())
      throw ParseError("header row: column " + std::to_string(j + 1) + " has no unit label", row,
                       j + 1);
  const std::size_t n = labels.size();

  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> file_rows;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, row);
    if (fields.size() != n)
      throw ParseError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                           " fields, the header has " + std::to_string(n),
                       row, std::min(fields.size(), n) + 1);
    std::vector<double> vals(n);
    for (std::size_t j = 0; j < n; ++j) vals[j] = parse_cell(fields[j], row, j + 1);
    rows.push_back(std::move(vals));
    file_rows.push_back(row);
  }
  if (rows.empty()) throw ParseError("panel has a header but no observations", row + 1, 1);

  const std::size_t t = rows.size();
  Mat values(n, t);
  std::vector<MissingCell> missing;
  for (std::size_t s = 0; s < t; ++s)
    for (std::size_t i = 0; i < n; ++i) {
      values(i, s) = rows[s][i];
      if (std::isnan(rows[s][i])) missing.push_back({file_rows[s], i + 1});
    }
  if (!missing.empty()) {
    if (!opts.interpolate) {
      std::ostringstream msg;
      msg << missing.size() << " missing value(s) at (row, column):";
      const std::size_t shown = std::min<std::size_t>(missing.size(), 20);
      for (std::size_t k = 0; k < shown; ++k)
        msg << " (" << missing[k].row << ", " << missing[k].col << ")";
      if (shown < missing.size()) msg << " ...";
      msg << "; pass --interpolate to fill them";
      throw MissingValuesError(msg.str(), std::move(missing));
    }
    for (std::size_t i = 0; i < n; ++i) interpolate_unit(values.row(i), labels[i]);
  }
  return Panel(std::move(values), std::move(labels));
}

Panel read_panel_csv(const std::filesystem::path& file, const PanelReadOptions& opts) {
  std::ifstream in(file);
  if (!in) throw SplashError("cannot open panel file '" + file.string() + "'");
  return parse_panel_csv(in, opts);
}

void write_panel_csv(std::ostream& out, const Panel& p) {
  const auto labels = p.unit_labels.empty() ? default_labels(p.n_units()) : p.unit_labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool quote = labels[i].find_first_of(",\"") != std::string::npos;
    std::string l = labels[i];
    if (quote) {
      std::string esc;
      for (char ch : l) esc += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      l = '"' + esc + '"';
    }
    out << (i ? "," : "") << l;
  }
  out << '\n';
  for (std::size_t t = 0; t < p.n_time(); ++t) {
    for (std::size_t i = 0; i < p.n_units(); ++i)
      out << (i ? "," : "") << format_double(p.values(i, t));
    out << '\n';
  }
}

void write_panel_csv(const std::filesystem::path& file, const Panel& p) {
  std::ofstream out(file);
  if (!out) throw SplashError("cannot write '" + file.string() + "'");
  write_panel_csv(out, p);
}

}  // namespace splash::cli
