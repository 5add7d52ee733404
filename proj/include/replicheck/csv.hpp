#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "replicheck/domain.hpp"
#include "replicheck/errors.hpp"

namespace replicheck {

struct ColumnMapping {
  std::string outcome_col;
  std::string treatment_col;
  std::string batch_col;
  std::optional<std::string> exclude_col;
  std::optional<std::string> reference_level;

  void validate() const {
    if (outcome_col.empty() || treatment_col.empty() || batch_col.empty())
      throw ConfigError("outcome, treatment and batch column names are required");
    if (outcome_col == treatment_col || outcome_col == batch_col ||
        treatment_col == batch_col)
      throw ConfigError("outcome, treatment and batch columns must be distinct");
  }
};

namespace detail {

// RFC 4180 records: comma-separated, double-quoted fields may contain
// commas, quotes ("") and line breaks. CRLF and LF line endings accepted.
class CsvReader {
 public:
  explicit CsvReader(std::string text) : text_(std::move(text)) {
    if (text_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
  }

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (pos_ >= text_.size()) return false;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            field += '"';
            pos_ += 2;
            continue;
          }
          quoted = false;
          ++pos_;
          continue;
        }
        field += c;
        ++pos_;
        continue;
      }
      if (c == '"' && !field_started) {
        quoted = true;
        field_started = true;
        ++pos_;
        continue;
      }
      if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
        ++pos_;
        continue;
      }
      if (c == '\r' || c == '\n') {
        ++pos_;
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        fields.push_back(std::move(field));
        return true;
      }
      field += c;
      field_started = true;
      ++pos_;
    }
    if (quoted) throw ParseError("unterminated quoted field at end of file");
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::string text_;
  std::size_t pos_ = 0;
};

inline bool is_blank_record(const std::vector<std::string>& fields) {
  return fields.size() == 1 && trim(fields[0]).empty();
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  const auto t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace detail

inline bool is_exclusion_marker(std::string_view value) {
  const auto v = detail::lower(detail::trim(value));
  return v == "1" || v == "true" || v == "yes";
}

// Rows are numbered by data record (header excluded) in error messages.
inline Dataset parse_csv_text(std::string text, const ColumnMapping& mapping,
                              std::string name = "csv") {
  mapping.validate();
  detail::CsvReader reader(std::move(text));
  std::vector<std::string> header;
  do {
    if (!reader.next(header)) throw ParseError(name + ": empty file");
  } while (detail::is_blank_record(header));
  for (auto& h : header) h = detail::trim(h);

  auto column = [&](const std::string& wanted) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), wanted);
    if (it == header.end())
      throw ParseError(name + ": missing column '" + wanted + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto outcome_idx = column(mapping.outcome_col);
  const auto treatment_idx = column(mapping.treatment_col);
  const auto batch_idx = column(mapping.batch_col);
  std::optional<std::size_t> exclude_idx;
  if (mapping.exclude_col) exclude_idx = column(*mapping.exclude_col);

  std::vector<Observation> rows;
  std::vector<std::string> fields;
  int row = 0;
  while (reader.next(fields)) {
    if (detail::is_blank_record(fields)) continue;
    ++row;
    if (fields.size() != header.size())
      throw ParseError(name + ": row " + std::to_string(row) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    const auto value = detail::parse_number(fields[outcome_idx]);
    if (!value)
      throw ParseError(name + ": row " + std::to_string(row) +
                       ": outcome '" + fields[outcome_idx] + "' is not a number");
    Observation obs{*value, detail::trim(fields[treatment_idx]),
                    detail::trim(fields[batch_idx]), false};
    if (obs.treatment.empty() || obs.batch.empty())
      throw ParseError(name + ": row " + std::to_string(row) +
                       ": empty treatment or batch label");
    if (exclude_idx) obs.excluded = is_exclusion_marker(fields[*exclude_idx]);
    rows.push_back(std::move(obs));
  }
  if (rows.empty()) throw ParseError(name + ": no data rows");
  return Dataset(std::move(name), std::move(rows));
}

inline Dataset parse_csv(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv_text(buffer.str(), mapping, path);
}

// Writes the dataset in the same layout parse_csv reads.
inline std::string to_csv(const Dataset& dataset,
                          std::string_view outcome_col = "outcome",
                          std::string_view treatment_col = "treatment",
                          std::string_view batch_col = "batch") {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  };
  std::string out;
  out += std::string(outcome_col) + "," + std::string(treatment_col) + "," +
         std::string(batch_col) + ",excluded\n";
  char buf[40];
  for (const auto& o : dataset.observations()) {
    const auto res = std::to_chars(buf, buf + sizeof buf, o.outcome);
    out.append(buf, res.ptr);
    out += "," + quote(o.treatment) + "," + quote(o.batch) + "," +
           (o.excluded ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace replicheck
