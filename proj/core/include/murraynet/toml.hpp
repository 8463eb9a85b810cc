#pragma once

#include <map>
#include <string>
#include <vector>

namespace murraynet::toml {

// Small TOML subset good enough for run configs: [tables], key = value with
// strings, integers, floats, booleans and single-line arrays, # comments.
// No nested tables-in-arrays, no multiline strings, no dates.
struct Value {
  enum class Kind { String, Integer, Float, Boolean, Array };
  Kind kind = Kind::String;
  std::string str;
  long long integer = 0;
  double real = 0.0;
  bool boolean = false;
  std::vector<Value> items;
  int line = 0;

  // typed getters; InputError names the key and line on mismatch
  const std::string& as_string(const std::string& key) const;
  long long as_integer(const std::string& key) const;
  double as_number(const std::string& key) const;  // accepts int or float
  bool as_boolean(const std::string& key) const;
  std::vector<double> as_numbers(const std::string& key) const;
};

class Table {
 public:
  void insert(const std::string& key, Value v, const std::string& origin);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const Value* find(const std::string& key) const;
  const Value& require(const std::string& key) const;

  // convenience lookups with fallbacks
  double number_or(const std::string& key, double fallback) const;
  long long integer_or(const std::string& key, long long fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string string_or(const std::string& key, const std::string& fb) const;

  const std::map<std::string, Value>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, Value> entries_;
  std::string origin_;
};

// Keys are flattened to "table.key". Throws InputError with file and line.
Table parse_file(const std::string& path);
Table parse_string(const std::string& text, const std::string& origin);

}  // namespace murraynet::toml
