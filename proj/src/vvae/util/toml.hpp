#pragma once

#include <cstdint>
#include <map>
#include <string>

// Flat TOML subset: [section] headers, key = value pairs, # comments.
// Values: "strings", integers, floats, booleans. Section names are folded
// into dotted keys ("train.steps").

namespace vvae {

struct TomlValue {
  enum class Kind { string, integer, floating, boolean };
  Kind kind = Kind::string;
  std::string s;
  std::int64_t i = 0;
  double f = 0.0;
  bool b = false;

  double as_number() const;  // integer or floating
};

using TomlTable = std::map<std::string, TomlValue>;

// Throws input_error with a line number on malformed input.
TomlTable parse_toml(const std::string& text);
TomlTable parse_toml_file(const std::string& path);

// Typed lookups; throw input_error naming the key on absence/bad type.
std::string toml_str(const TomlTable& t, const std::string& key);
std::int64_t toml_int(const TomlTable& t, const std::string& key);
double toml_num(const TomlTable& t, const std::string& key);
bool toml_bool(const TomlTable& t, const std::string& key);

std::string toml_str_or(const TomlTable& t, const std::string& key,
                        const std::string& dflt);
std::int64_t toml_int_or(const TomlTable& t, const std::string& key,
                         std::int64_t dflt);
double toml_num_or(const TomlTable& t, const std::string& key, double dflt);
bool toml_bool_or(const TomlTable& t, const std::string& key, bool dflt);

}  // namespace vvae
