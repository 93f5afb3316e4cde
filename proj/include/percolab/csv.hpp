#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace percolab::csv {

// RFC-4180-style quoting: fields containing comma, quote or newline are
// wrapped in double quotes with embedded quotes doubled.
inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path);
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << "\r\n";
  }

 private:
  std::ofstream out_;
};

inline std::string num(double x) {
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  return ss.str();
}

template <typename T, std::enable_if_t<std::is_integral_v<T>, int> = 0>
std::string num(T x) {
  return std::to_string(x);
}

}  // namespace percolab::csv
