#include <cctype>
#include <fstream>
#include <sstream>

#include "slf/errors.h"
#include "slf/io.h"

namespace slf {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Strips a # comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

double parse_number(const std::string& tok, const std::string& where) {
    try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": invalid number '" + tok + "'");
    }
}

TomlValue parse_value(const std::string& raw, const std::string& where) {
    TomlValue v;
    std::string s = trim(raw);
    if (s.empty()) throw ParseError(where + ": empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ParseError(where + ": unterminated string");
        v.kind = TomlValue::Kind::String;
        v.str = s.substr(1, s.size() - 2);
        return v;
    }
    if (s == "true" || s == "false") {
        v.kind = TomlValue::Kind::Boolean;
        v.boolean = s == "true";
        return v;
    }
    if (s.front() == '[') {
        if (s.back() != ']') throw ParseError(where + ": unterminated array");
        v.kind = TomlValue::Kind::NumberArray;
        std::string inner = s.substr(1, s.size() - 2);
        std::string tok;
        std::istringstream is(inner);
        while (std::getline(is, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            v.array.push_back(parse_number(tok, where));
        }
        return v;
    }
    v.kind = TomlValue::Kind::Number;
    v.num = parse_number(s, where);
    return v;
}

const char* kind_name(TomlValue::Kind k) {
    switch (k) {
        case TomlValue::Kind::String: return "string";
        case TomlValue::Kind::Number: return "number";
        case TomlValue::Kind::Boolean: return "boolean";
        case TomlValue::Kind::NumberArray: return "number array";
    }
    return "?";
}

} // namespace

Toml Toml::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

Toml Toml::parse(const std::string& text, const std::string& origin) {
    Toml toml;
    toml.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string where = origin + ":" + std::to_string(line_no);
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ParseError(where + ": empty section name");
            toml.sections_[section]; // sections may be empty
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(where + ": empty key");
        toml.sections_[section][key] = parse_value(line.substr(eq + 1), where);
    }
    return toml;
}

bool Toml::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

const TomlValue& Toml::require(const std::string& section, const std::string& key,
                               TomlValue::Kind kind) const {
    auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
        throw DataError(origin_ + ": missing key '" + key + "' in section [" + section + "]");
    const TomlValue& v = s->second.at(key);
    if (v.kind != kind)
        throw DataError(origin_ + ": key '" + key + "' in [" + section + "] should be a " +
                        kind_name(kind) + ", found " + kind_name(v.kind));
    return v;
}

std::string Toml::get_string(const std::string& section, const std::string& key) const {
    return require(section, key, TomlValue::Kind::String).str;
}
double Toml::get_number(const std::string& section, const std::string& key) const {
    return require(section, key, TomlValue::Kind::Number).num;
}
bool Toml::get_bool(const std::string& section, const std::string& key) const {
    return require(section, key, TomlValue::Kind::Boolean).boolean;
}
std::vector<double> Toml::get_array(const std::string& section, const std::string& key) const {
    return require(section, key, TomlValue::Kind::NumberArray).array;
}

std::string Toml::get_string(const std::string& section, const std::string& key,
                             const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}
double Toml::get_number(const std::string& section, const std::string& key,
                        double fallback) const {
    return has(section, key) ? get_number(section, key) : fallback;
}
bool Toml::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    return has(section, key) ? get_bool(section, key) : fallback;
}

} // namespace slf
