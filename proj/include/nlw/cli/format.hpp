#pragma once

// Byte-stable text output: 17 significant digits in lowercase scientific
// notation, and a JSON writer that uses the same number format.

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace nlw::cli {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace detail {

inline void write_json(const nlohmann::ordered_json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + nlohmann::json(it.key()).dump() + ": ";
        write_json(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ", ";
        first = false;
        write_json(v, out, indent + 1);
      }
      out += "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += std::isfinite(j.get<double>()) ? format_number(j.get<double>()) : "null";
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace detail

inline std::string to_text(const nlohmann::ordered_json& j) {
  std::string out;
  detail::write_json(j, out, 0);
  out += "\n";
  return out;
}

}  // namespace nlw::cli
