#include "privaudio/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "privaudio/errors.hpp"

namespace privaudio {
namespace {

[[noreturn]] void fail(long line, const std::string& what) {
    throw ConfigError("toml: line " + std::to_string(line) + ": " + what);
}

std::string kind_name(TomlValue::Kind k) {
    switch (k) {
        case TomlValue::Kind::String: return "string";
        case TomlValue::Kind::Bool: return "boolean";
        case TomlValue::Kind::Int: return "integer";
        case TomlValue::Kind::Float: return "float";
        case TomlValue::Kind::Array: return "array";
    }
    return "?";
}

[[noreturn]] void type_error(const std::string& key, const char* wanted, TomlValue::Kind got) {
    throw ConfigError("toml: key '" + key + "' is a " + kind_name(got) + ", expected " + wanted);
}

/// Cursor over one logical line (arrays may not span lines in this subset).
struct Cursor {
    const std::string& s;
    std::size_t pos = 0;
    long line;

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= s.size() || s[pos] == '#';
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
};

TomlValue parse_value(Cursor& c);

TomlValue parse_string(Cursor& c) {
    TomlValue v;
    v.kind = TomlValue::Kind::String;
    ++c.pos;  // opening quote
    while (c.pos < c.s.size() && c.s[c.pos] != '"') {
        char ch = c.s[c.pos];
        if (ch == '\\') {
            if (c.pos + 1 >= c.s.size()) fail(c.line, "dangling escape");
            char esc = c.s[c.pos + 1];
            switch (esc) {
                case '"': v.str += '"'; break;
                case '\\': v.str += '\\'; break;
                case 'n': v.str += '\n'; break;
                case 't': v.str += '\t'; break;
                default: fail(c.line, std::string("unsupported escape \\") + esc);
            }
            c.pos += 2;
        } else {
            v.str += ch;
            ++c.pos;
        }
    }
    if (c.pos >= c.s.size()) fail(c.line, "unterminated string");
    ++c.pos;  // closing quote
    return v;
}

TomlValue parse_array(Cursor& c) {
    TomlValue v;
    v.kind = TomlValue::Kind::Array;
    ++c.pos;  // '['
    if (c.peek() == ']') {
        ++c.pos;
        return v;
    }
    while (true) {
        v.array.push_back(parse_value(c));
        char ch = c.peek();
        if (ch == ',') {
            ++c.pos;
            if (c.peek() == ']') {  // trailing comma
                ++c.pos;
                return v;
            }
            continue;
        }
        if (ch == ']') {
            ++c.pos;
            return v;
        }
        fail(c.line, "expected ',' or ']' in array");
    }
}

TomlValue parse_scalar(Cursor& c) {
    std::size_t start = c.pos;
    while (c.pos < c.s.size() && c.s[c.pos] != ',' && c.s[c.pos] != ']' && c.s[c.pos] != '#') {
        ++c.pos;
    }
    std::size_t end = c.pos;
    while (end > start && std::isspace(static_cast<unsigned char>(c.s[end - 1]))) --end;
    const std::string tok = c.s.substr(start, end - start);
    if (tok.empty()) fail(c.line, "empty value");

    TomlValue v;
    if (tok == "true" || tok == "false") {
        v.kind = TomlValue::Kind::Bool;
        v.boolean = (tok == "true");
        return v;
    }
    const bool floaty = tok.find_first_of(".eE") != std::string::npos &&
                        tok.find_first_not_of("+-0123456789.eE") == std::string::npos;
    char* endp = nullptr;
    if (!floaty) {
        long long i = std::strtoll(tok.c_str(), &endp, 10);
        if (endp && *endp == '\0') {
            v.kind = TomlValue::Kind::Int;
            v.integer = i;
            return v;
        }
    }
    double d = std::strtod(tok.c_str(), &endp);
    if (endp && *endp == '\0') {
        v.kind = TomlValue::Kind::Float;
        v.real = d;
        return v;
    }
    fail(c.line, "cannot parse value '" + tok + "'");
}

TomlValue parse_value(Cursor& c) {
    char ch = c.peek();
    if (ch == '"') return parse_string(c);
    if (ch == '[') return parse_array(c);
    return parse_scalar(c);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char ch : k) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') return false;
    }
    return true;
}

}  // namespace

const std::string& TomlValue::as_string(const std::string& key) const {
    if (kind != Kind::String) type_error(key, "string", kind);
    return str;
}

bool TomlValue::as_bool(const std::string& key) const {
    if (kind != Kind::Bool) type_error(key, "boolean", kind);
    return boolean;
}

long long TomlValue::as_int(const std::string& key) const {
    if (kind != Kind::Int) type_error(key, "integer", kind);
    return integer;
}

double TomlValue::as_double(const std::string& key) const {
    if (kind == Kind::Int) return static_cast<double>(integer);
    if (kind != Kind::Float) type_error(key, "number", kind);
    return real;
}

const std::vector<TomlValue>& TomlValue::as_array(const std::string& key) const {
    if (kind != Kind::Array) type_error(key, "array", kind);
    return array;
}

const TomlValue& TomlTable::at(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("toml: missing required key '" + key + "'");
    return it->second;
}

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).as_string(key) : fallback;
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? at(key).as_bool(key) : fallback;
}

long long TomlTable::get_int(const std::string& key, long long fallback) const {
    return has(key) ? at(key).as_int(key) : fallback;
}

double TomlTable::get_double(const std::string& key, double fallback) const {
    return has(key) ? at(key).as_double(key) : fallback;
}

std::vector<double> TomlTable::get_doubles(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    for (const TomlValue& v : at(key).as_array(key)) {
        out.push_back(v.as_double(key));
    }
    return out;
}

std::vector<long long> TomlTable::get_ints(const std::string& key) const {
    std::vector<long long> out;
    if (!has(key)) return out;
    for (const TomlValue& v : at(key).as_array(key)) {
        out.push_back(v.as_int(key));
    }
    return out;
}

std::vector<std::string> TomlTable::get_strings(const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    for (const TomlValue& v : at(key).as_array(key)) {
        out.push_back(v.as_string(key));
    }
    return out;
}

const TomlTable& TomlDoc::table(const std::string& name) const {
    static const TomlTable empty;
    auto it = tables.find(name);
    return it == tables.end() ? empty : it->second;
}

TomlDoc parse_toml(const std::string& text) {
    TomlDoc doc;
    TomlTable* current = &doc.root;

    std::istringstream in(text);
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        Cursor c{raw, 0, line_no};
        if (c.done()) continue;

        if (c.peek() == '[') {
            std::size_t close = raw.find(']', c.pos);
            if (close == std::string::npos) fail(line_no, "unterminated [section]");
            std::string name = raw.substr(c.pos + 1, close - c.pos - 1);
            if (!valid_key(name)) fail(line_no, "bad section name '" + name + "'");
            c.pos = close + 1;
            if (!c.done()) fail(line_no, "trailing characters after [section]");
            if (doc.tables.count(name)) fail(line_no, "duplicate section [" + name + "]");
            current = &doc.tables[name];
            continue;
        }

        std::size_t eq = raw.find('=', c.pos);
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        std::string key = raw.substr(c.pos, eq - c.pos);
        while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) {
            key.pop_back();
        }
        if (!valid_key(key)) fail(line_no, "bad key '" + key + "'");
        if (current->has(key)) fail(line_no, "duplicate key '" + key + "'");

        c.pos = eq + 1;
        TomlValue value = parse_value(c);
        if (!c.done()) fail(line_no, "trailing characters after value");
        current->values.emplace(std::move(key), std::move(value));
    }
    return doc;
}

TomlDoc parse_toml_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    try {
        return parse_toml(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace privaudio
