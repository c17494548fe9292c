#include "clumpq/report.hpp"

#include <cstdio>

namespace clumpq {

namespace {

std::string quote(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void Report::meta_str(const std::string& key, const std::string& value) {
  meta.emplace_back(key, quote(value));
}

void Report::meta_num(const std::string& key, double value) {
  meta.emplace_back(key, format_double(value));
}

void Report::meta_int(const std::string& key, long long value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", value);
  meta.emplace_back(key, buf);
}

void Report::add(const std::string& key, double value,
                 const std::string& provenance) {
  results.push_back({key, value, provenance});
}

void Report::warn(const std::string& message) { warnings.push_back(message); }

std::string to_json(const Report& report) {
  std::string out = "{\n  \"meta\": {\n";
  out += "    \"command\": " + quote(report.command);
  for (const auto& [key, token] : report.meta) {
    out += ",\n    " + quote(key) + ": " + token;
  }
  out += "\n  },\n  \"results\": [";
  bool first = true;
  for (const ResultEntry& entry : report.results) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    {\"key\": " + quote(entry.key) +
           ", \"value\": " + format_double(entry.value) +
           ", \"provenance\": " + quote(entry.provenance) + "}";
  }
  out += first ? "],\n" : "\n  ],\n";
  out += "  \"warnings\": [";
  first = true;
  for (const std::string& w : report.warnings) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    " + quote(w);
  }
  out += first ? "],\n" : "\n  ],\n";
  out += std::string("  \"ok\": ") + (report.ok ? "true" : "false") + "\n}\n";
  return out;
}

std::string to_csv(const Report& report) {
  std::string out = "section,key,value,provenance\n";
  out += "meta,command," + csv_field(report.command) + ",\n";
  for (const auto& [key, token] : report.meta) {
    // Meta tokens are JSON; strings shed their quotes for the flat table.
    std::string value = token;
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    out += "meta," + csv_field(key) + "," + csv_field(value) + ",\n";
  }
  for (const ResultEntry& entry : report.results) {
    out += "result," + csv_field(entry.key) + "," + format_double(entry.value) +
           "," + csv_field(entry.provenance) + "\n";
  }
  for (const std::string& w : report.warnings) {
    out += "warning,," + csv_field(w) + ",\n";
  }
  out += std::string("status,ok,") + (report.ok ? "true" : "false") + ",\n";
  return out;
}

}  // namespace clumpq
