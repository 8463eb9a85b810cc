#include "murraynet/toml.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "murraynet/errors.hpp"

namespace murraynet::toml {

namespace {

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
  throw InputError(origin + ":" + std::to_string(line) + ": " + msg);
}

struct Cursor {
  const std::string& s;
  std::size_t i = 0;
  int line;
  const std::string& origin;

  bool done() const { return i >= s.size(); }
  char peek() const { return i < s.size() ? s[i] : '\0'; }
  char take() { return s[i++]; }
  void skip_ws() {
    while (!done() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
};

bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '.';
}

std::string parse_basic_string(Cursor& c) {
  std::string out;
  c.take();  // opening quote
  while (true) {
    if (c.done()) fail(c.origin, c.line, "unterminated string");
    char ch = c.take();
    if (ch == '"') return out;
    if (ch == '\\') {
      if (c.done()) fail(c.origin, c.line, "dangling escape");
      char e = c.take();
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default:
          fail(c.origin, c.line, std::string("unsupported escape \\") + e);
      }
    } else {
      out += ch;
    }
  }
}

bool looks_like_float(const std::string& tok) {
  return tok.find('.') != std::string::npos ||
         tok.find('e') != std::string::npos ||
         tok.find('E') != std::string::npos ||
         tok.find("inf") != std::string::npos ||
         tok.find("nan") != std::string::npos;
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
  Value v;
  v.kind = Value::Kind::Array;
  v.line = c.line;
  c.take();  // '['
  c.skip_ws();
  if (c.peek() == ']') {
    c.take();
    return v;
  }
  while (true) {
    c.skip_ws();
    v.items.push_back(parse_value(c));
    c.skip_ws();
    char ch = c.done() ? '\0' : c.take();
    if (ch == ']') return v;
    if (ch != ',') fail(c.origin, c.line, "expected ',' or ']' in array");
    c.skip_ws();
    if (c.peek() == ']') {  // trailing comma
      c.take();
      return v;
    }
  }
}

Value parse_scalar(Cursor& c) {
  Value v;
  v.line = c.line;
  std::string tok;
  while (!c.done()) {
    char ch = c.peek();
    if (ch == ',' || ch == ']' || ch == '#' || ch == ' ' || ch == '\t') break;
    tok += c.take();
  }
  if (tok.empty()) fail(c.origin, c.line, "expected a value");
  if (tok == "true" || tok == "false") {
    v.kind = Value::Kind::Boolean;
    v.boolean = tok == "true";
    return v;
  }
  std::string digits;
  digits.reserve(tok.size());
  for (char ch : tok)
    if (ch != '_') digits += ch;
  if (looks_like_float(digits)) {
    v.kind = Value::Kind::Float;
    char* end = nullptr;
    v.real = std::strtod(digits.c_str(), &end);
    if (end != digits.c_str() + digits.size())
      fail(c.origin, c.line, "malformed number '" + tok + "'");
    return v;
  }
  v.kind = Value::Kind::Integer;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                 v.integer);
  if (ec != std::errc() || p != digits.data() + digits.size())
    fail(c.origin, c.line, "malformed integer '" + tok + "'");
  return v;
}

Value parse_value(Cursor& c) {
  c.skip_ws();
  if (c.done()) fail(c.origin, c.line, "expected a value");
  char ch = c.peek();
  if (ch == '"') {
    Value v;
    v.kind = Value::Kind::String;
    v.line = c.line;
    v.str = parse_basic_string(c);
    return v;
  }
  if (ch == '[') return parse_array(c);
  return parse_scalar(c);
}

}  // namespace

const std::string& Value::as_string(const std::string& key) const {
  if (kind != Kind::String)
    throw InputError("key '" + key + "' (line " + std::to_string(line) +
                     ") must be a string");
  return str;
}

long long Value::as_integer(const std::string& key) const {
  if (kind != Kind::Integer)
    throw InputError("key '" + key + "' (line " + std::to_string(line) +
                     ") must be an integer");
  return integer;
}

double Value::as_number(const std::string& key) const {
  if (kind == Kind::Integer) return static_cast<double>(integer);
  if (kind == Kind::Float) return real;
  throw InputError("key '" + key + "' (line " + std::to_string(line) +
                   ") must be a number");
}

bool Value::as_boolean(const std::string& key) const {
  if (kind != Kind::Boolean)
    throw InputError("key '" + key + "' (line " + std::to_string(line) +
                     ") must be a boolean");
  return boolean;
}

std::vector<double> Value::as_numbers(const std::string& key) const {
  if (kind != Kind::Array)
    throw InputError("key '" + key + "' (line " + std::to_string(line) +
                     ") must be an array of numbers");
  std::vector<double> out;
  out.reserve(items.size());
  for (const Value& v : items) out.push_back(v.as_number(key));
  return out;
}

void Table::insert(const std::string& key, Value v,
                   const std::string& origin) {
  origin_ = origin;
  const int line = v.line;
  if (!entries_.emplace(key, std::move(v)).second)
    throw InputError(origin + ":" + std::to_string(line) +
                     ": duplicate key '" + key + "'");
}

const Value* Table::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

const Value& Table::require(const std::string& key) const {
  const Value* v = find(key);
  if (!v)
    throw InputError(origin_ + ": missing required key '" + key + "'");
  return *v;
}

double Table::number_or(const std::string& key, double fallback) const {
  const Value* v = find(key);
  return v ? v->as_number(key) : fallback;
}

long long Table::integer_or(const std::string& key, long long fallback) const {
  const Value* v = find(key);
  return v ? v->as_integer(key) : fallback;
}

bool Table::boolean_or(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  return v ? v->as_boolean(key) : fallback;
}

std::string Table::string_or(const std::string& key,
                             const std::string& fb) const {
  const Value* v = find(key);
  return v ? v->as_string(key) : fb;
}

Table parse_string(const std::string& text, const std::string& origin) {
  Table table;
  std::string prefix;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    Cursor c{raw, 0, lineno, origin};
    c.skip_ws();
    if (c.done() || c.peek() == '#') continue;
    if (c.peek() == '[') {
      c.take();
      std::string name;
      while (!c.done() && c.peek() != ']') {
        char ch = c.take();
        if (!bare_key_char(ch))
          fail(origin, lineno, "bad character in table name");
        name += ch;
      }
      if (c.done() || c.take() != ']')
        fail(origin, lineno, "unterminated table header");
      c.skip_ws();
      if (!c.done() && c.peek() != '#')
        fail(origin, lineno, "trailing characters after table header");
      if (name.empty()) fail(origin, lineno, "empty table name");
      prefix = name + ".";
      continue;
    }
    std::string key;
    if (c.peek() == '"') {
      key = parse_basic_string(c);
    } else {
      while (!c.done() && bare_key_char(c.peek())) key += c.take();
    }
    if (key.empty()) fail(origin, lineno, "expected a key");
    c.skip_ws();
    if (c.done() || c.take() != '=')
      fail(origin, lineno, "expected '=' after key '" + key + "'");
    Value v = parse_value(c);
    v.line = lineno;
    c.skip_ws();
    if (!c.done() && c.peek() != '#')
      fail(origin, lineno, "trailing characters after value for '" + key + "'");
    table.insert(prefix + key, std::move(v), origin);
  }
  return table;
}

Table parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

}  // namespace murraynet::toml
