#include "vvae/util/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vvae/core/error.hpp"

namespace vvae {

double TomlValue::as_number() const {
  if (kind == Kind::integer) return double(i);
  if (kind == Kind::floating) return f;
  throw input_error("toml: value is not numeric");
}

namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Removes a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

TomlValue parse_value(const std::string& raw, int line) {
  TomlValue v;
  if (raw.empty()) throw input_error("toml: empty value at line " +
                                     std::to_string(line));
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw input_error("toml: unterminated string at line " +
                        std::to_string(line));
    v.kind = TomlValue::Kind::string;
    v.s = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = TomlValue::Kind::boolean;
    v.b = raw == "true";
    return v;
  }
  // Integer first, then float.
  {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), i);
    if (ec == std::errc() && p == raw.data() + raw.size()) {
      v.kind = TomlValue::Kind::integer;
      v.i = i;
      return v;
    }
  }
  try {
    std::size_t pos = 0;
    const double f = std::stod(raw, &pos);
    if (pos == raw.size()) {
      v.kind = TomlValue::Kind::floating;
      v.f = f;
      return v;
    }
  } catch (...) {
  }
  throw input_error("toml: cannot parse value '" + raw + "' at line " +
                    std::to_string(line));
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable out;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = strip(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw input_error("toml: malformed section at line " +
                          std::to_string(lineno));
      section = strip(line.substr(1, line.size() - 2));
      if (section.empty())
        throw input_error("toml: empty section name at line " +
                          std::to_string(lineno));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw input_error("toml: expected key = value at line " +
                        std::to_string(lineno));
    const std::string key = strip(line.substr(0, eq));
    if (key.empty())
      throw input_error("toml: empty key at line " + std::to_string(lineno));
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full))
      throw input_error("toml: duplicate key '" + full + "' at line " +
                        std::to_string(lineno));
    out[full] = parse_value(strip(line.substr(eq + 1)), lineno);
  }
  return out;
}

TomlTable parse_toml_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw input_error("toml: cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_toml(ss.str());
}

namespace {
const TomlValue* find(const TomlTable& t, const std::string& key) {
  auto it = t.find(key);
  return it == t.end() ? nullptr : &it->second;
}
}  // namespace

std::string toml_str(const TomlTable& t, const std::string& key) {
  const TomlValue* v = find(t, key);
  if (!v) throw input_error("config: missing key '" + key + "'");
  if (v->kind != TomlValue::Kind::string)
    throw input_error("config: key '" + key + "' must be a string");
  return v->s;
}

std::int64_t toml_int(const TomlTable& t, const std::string& key) {
  const TomlValue* v = find(t, key);
  if (!v) throw input_error("config: missing key '" + key + "'");
  if (v->kind != TomlValue::Kind::integer)
    throw input_error("config: key '" + key + "' must be an integer");
  return v->i;
}

double toml_num(const TomlTable& t, const std::string& key) {
  const TomlValue* v = find(t, key);
  if (!v) throw input_error("config: missing key '" + key + "'");
  return v->as_number();
}

bool toml_bool(const TomlTable& t, const std::string& key) {
  const TomlValue* v = find(t, key);
  if (!v) throw input_error("config: missing key '" + key + "'");
  if (v->kind != TomlValue::Kind::boolean)
    throw input_error("config: key '" + key + "' must be a boolean");
  return v->b;
}

std::string toml_str_or(const TomlTable& t, const std::string& key,
                        const std::string& dflt) {
  return find(t, key) ? toml_str(t, key) : dflt;
}
std::int64_t toml_int_or(const TomlTable& t, const std::string& key,
                         std::int64_t dflt) {
  return find(t, key) ? toml_int(t, key) : dflt;
}
double toml_num_or(const TomlTable& t, const std::string& key, double dflt) {
  return find(t, key) ? toml_num(t, key) : dflt;
}
bool toml_bool_or(const TomlTable& t, const std::string& key, bool dflt) {
  return find(t, key) ? toml_bool(t, key) : dflt;
}

}  // namespace vvae
