#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "propwave/errors.hpp"

namespace propwave {

// RFC 4180 writer: CRLF records, quoting only where required, floating point
// at 17 significant digits so round trips are exact.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvWriter(const std::string& path)
      : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open CSV output " + path);
  }

  static std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  void header(const std::vector<std::string>& names) { write_record(names); }

  void row(const std::vector<Cell>& cells) {
    std::vector<std::string> fields;
    fields.reserve(cells.size());
    for (const auto& c : cells) {
      if (std::holds_alternative<double>(c))
        fields.push_back(format_double(std::get<double>(c)));
      else if (std::holds_alternative<long long>(c))
        fields.push_back(std::to_string(std::get<long long>(c)));
      else
        fields.push_back(std::get<std::string>(c));
    }
    write_record(fields);
  }

 private:
  void write_record(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << "\r\n";
  }

  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  }

  std::ofstream out_;
};

}  // namespace propwave
