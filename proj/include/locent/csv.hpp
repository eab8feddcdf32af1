// csv.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "locent/error.hpp"

namespace locent {

// Fixed scientific notation, 9 significant digits.
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", x);
  return buf;
}

inline double parse_real(std::string_view s) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw Error(errc::parse_error, "'" + tmp + "' is not a number");
  }
  return v;
}

inline std::uint64_t parse_unsigned(std::string_view s) {
  const std::string tmp(s);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(tmp.c_str(), &end, 10);
  if (tmp.empty() || tmp[0] == '-' || end != tmp.c_str() + tmp.size()) {
    throw Error(errc::parse_error, "'" + tmp + "' is not a nonnegative integer");
  }
  return v;
}

// Minimal CSV: no quoting, so fields must not contain commas or newlines.
// Lines starting with '#' are comments; the first comment line carries
// the schema tag.
struct CsvTable {
  std::string schema;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(errc::parse_error, "missing column '" + std::string(name) + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline void write_csv(std::ostream& out, const CsvTable& t) {
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].find_first_of(",\n") != std::string::npos) {
        throw Error(errc::invalid_argument, "CSV field contains a separator: " + fields[i]);
      }
      if (i) out << ',';
      out << fields[i];
    }
    out << '\n';
  };
  if (!t.schema.empty()) out << "# " << t.schema << '\n';
  emit(t.header);
  for (const auto& r : t.rows) emit(r);
}

inline void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream out(path);
  if (!out) throw Error(errc::io_error, "cannot write " + path);
  write_csv(out, t);
  if (!out) throw Error(errc::io_error, "write failed for " + path);
}

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (t.schema.empty() && !have_header) {
        const auto start = line.find_first_not_of("# ");
        t.schema = start == std::string::npos ? "" : line.substr(start);
      }
      continue;
    }
    auto fields = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size()) {
        throw Error(errc::parse_error, "CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                                           std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) throw Error(errc::parse_error, "CSV has no header");
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io_error, "cannot open " + path);
  return read_csv(in);
}

}  // namespace locent
