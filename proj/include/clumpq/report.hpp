#ifndef CLUMPQ_REPORT_HPP
#define CLUMPQ_REPORT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace clumpq {

// A numeric result plus the method that produced it.
struct ResultEntry {
  std::string key;
  double value = 0.0;
  std::string provenance;
};

// Flat report emitted by every CLI command. Meta values are stored as
// pre-rendered JSON tokens so serialization is byte-stable.
struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<ResultEntry> results;
  std::vector<std::string> warnings;
  bool ok = true;

  void meta_str(const std::string& key, const std::string& value);
  void meta_num(const std::string& key, double value);
  void meta_int(const std::string& key, long long value);
  void add(const std::string& key, double value, const std::string& provenance);
  void warn(const std::string& message);
};

// 17 significant digits, round-trip safe for double.
std::string format_double(double value);

std::string to_json(const Report& report);
std::string to_csv(const Report& report);

}  // namespace clumpq

#endif  // CLUMPQ_REPORT_HPP
