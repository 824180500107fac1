#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "aoi/errors.hpp"

namespace aoi::csv {

struct Row {
  std::vector<std::string> fields;
  int line = 0;  // 1-based line number in the file
};

// Splits one CSV line. Double quotes wrap fields that contain commas; a
// doubled quote inside a quoted field is an escaped quote.
inline std::vector<std::string> split_line(const std::string& line, const std::string& where, int lineno) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (quoted) throw input_error(where + ":" + std::to_string(lineno) + ": unterminated quote");
  out.push_back(field);
  return out;
}

// Reads all non-empty rows; lines starting with '#' are comments.
inline std::vector<Row> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open file: " + path);
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    rows.push_back(Row{split_line(line, path, lineno), lineno});
  }
  return rows;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& where, int lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw input_error(where + ":" + std::to_string(lineno) + ": not a number: '" + s + "'");
  }
}

inline long long parse_int(const std::string& s, const std::string& where, int lineno) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw input_error(where + ":" + std::to_string(lineno) + ": not an integer: '" + s + "'");
  }
}

// Writes rows to a file, or to a caller-supplied stream (e.g. stdout).
class Writer {
 public:
  explicit Writer(const std::string& path) : file_(path), out_(&file_) {
    if (!file_) throw input_error("cannot open file for writing: " + path);
  }
  explicit Writer(std::ostream& os) : out_(&os) {}

  void comment(const std::string& text) { *out_ << "# " << text << "\n"; }
  void raw_line(const std::string& text) { *out_ << text << "\n"; }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) *out_ << ',';
      *out_ << fields[i];
    }
    *out_ << "\n";
  }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

}  // namespace aoi::csv
