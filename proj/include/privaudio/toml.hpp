#pragma once

#include <map>
#include <string>
#include <vector>

namespace privaudio {

/// One parsed TOML value. The subset covers what scenario files need:
/// strings, booleans, integers, floats, and (possibly nested) arrays.
struct TomlValue {
    enum class Kind { String, Bool, Int, Float, Array };

    Kind kind = Kind::String;
    std::string str;
    bool boolean = false;
    long long integer = 0;
    double real = 0.0;
    std::vector<TomlValue> array;

    const std::string& as_string(const std::string& key) const;
    bool as_bool(const std::string& key) const;
    long long as_int(const std::string& key) const;
    /// Accepts both integer and float tokens (TOML writers disagree on 1 vs 1.0).
    double as_double(const std::string& key) const;
    const std::vector<TomlValue>& as_array(const std::string& key) const;
};

/// Flat key/value table ([section] contents, or the keys before any section).
struct TomlTable {
    std::map<std::string, TomlValue> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    const TomlValue& at(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;  // empty if absent
    std::vector<long long> get_ints(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;
};

struct TomlDoc {
    TomlTable root;                          // keys before the first [section]
    std::map<std::string, TomlTable> tables;

    bool has_table(const std::string& name) const { return tables.count(name) != 0; }
    /// Returns the named table, or an empty one if the file omits it.
    const TomlTable& table(const std::string& name) const;
};

/// Parses the supported TOML subset: [section] headers, key = value lines,
/// full-line and trailing # comments. Values: "strings" (with \\ \" \n \t
/// escapes), booleans, integers, floats, and arrays ([1, 2] or [[x, y], ...]).
/// Throws ConfigError with a line number on anything else (dotted keys,
/// arrays of tables, multi-line strings are out of scope).
TomlDoc parse_toml(const std::string& text);
TomlDoc parse_toml_file(const std::string& path);

}  // namespace privaudio
