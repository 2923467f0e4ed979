// File formats: map description files (JSON or a strict TOML subset),
// full-precision number formatting, CSV assembly, and small filesystem
// helpers. Parsing is strict: unknown fields are errors, collected
// exhaustively rather than reported one at a time.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "henon/core.hpp"

namespace henon {

using json = nlohmann::json;

// 17 significant digits: enough for bit-exact double round-trips.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline json json_complex(const cplx& c) { return json::array({c.real(), c.imag()}); }

// --- strict-object helper: every key must be consumed ---

class StrictObject {
public:
    StrictObject(const json& j, std::string path, std::vector<std::string>& errors)
        : j_(j), path_(std::move(path)), errors_(errors) {
        if (!j_.is_object()) errors_.push_back(path_ + ": expected an object");
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        if (!j_.is_object() || !j_.contains(key)) return nullptr;
        return &j_.at(key);
    }

    const json* require(const std::string& key) {
        const json* p = get(key);
        if (!p) errors_.push_back(path_ + ": missing required field '" + key + "'");
        return p;
    }

    double number_or(const std::string& key, double dflt) {
        const json* p = get(key);
        if (!p) return dflt;
        if (!p->is_number()) {
            errors_.push_back(path_ + "." + key + ": expected a number");
            return dflt;
        }
        return p->get<double>();
    }

    long long integer_or(const std::string& key, long long dflt) {
        const json* p = get(key);
        if (!p) return dflt;
        if (!p->is_number_integer()) {
            errors_.push_back(path_ + "." + key + ": expected an integer");
            return dflt;
        }
        return p->get<long long>();
    }

    bool boolean_or(const std::string& key, bool dflt) {
        const json* p = get(key);
        if (!p) return dflt;
        if (!p->is_boolean()) {
            errors_.push_back(path_ + "." + key + ": expected a boolean");
            return dflt;
        }
        return p->get<bool>();
    }

    std::string string_or(const std::string& key, const std::string& dflt) {
        const json* p = get(key);
        if (!p) return dflt;
        if (!p->is_string()) {
            errors_.push_back(path_ + "." + key + ": expected a string");
            return dflt;
        }
        return p->get<std::string>();
    }

    ~StrictObject() {
        if (!j_.is_object()) return;
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                errors_.push_back(path_ + ": unknown field '" + it.key() + "'");
    }

    const std::string& path() const { return path_; }
    std::vector<std::string>& errors() { return errors_; }

private:
    const json& j_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

inline cplx parse_complex(const json& j, const std::string& path,
                          std::vector<std::string>& errors) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        errors.push_back(path + ": expected [re, im]");
        return {0.0, 0.0};
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

// --- map description: {"factors":[{"a":[re,im],"coeffs":[[re,im],...]}]} ---

inline std::vector<HenonFactor> parse_map_factors(const json& j, const std::string& path,
                                                  std::vector<std::string>& errors) {
    std::vector<HenonFactor> factors;
    StrictObject obj(j, path, errors);
    const json* fs = obj.require("factors");
    if (!fs) return factors;
    if (!fs->is_array() || fs->empty()) {
        errors.push_back(path + ".factors: expected a nonempty array");
        return factors;
    }
    for (size_t i = 0; i < fs->size(); ++i) {
        std::string fpath = path + ".factors[" + std::to_string(i) + "]";
        StrictObject fo((*fs)[i], fpath, errors);
        const json* aj = fo.require("a");
        const json* cj = fo.require("coeffs");
        if (!aj || !cj) continue;
        cplx a = parse_complex(*aj, fpath + ".a", errors);
        std::vector<cplx> coeffs;
        if (!cj->is_array() || cj->empty()) {
            errors.push_back(fpath + ".coeffs: expected a nonempty array (degree >= 2)");
            continue;
        }
        for (size_t k = 0; k < cj->size(); ++k)
            coeffs.push_back(parse_complex((*cj)[k], fpath + ".coeffs[" + std::to_string(k) + "]",
                                           errors));
        if (a == cplx(0.0, 0.0)) {
            errors.push_back(fpath + ".a: factor linear coefficient must be nonzero");
            continue;
        }
        factors.emplace_back(a, std::move(coeffs));
    }
    return factors;
}

inline json serialize_map(const HenonMap& map) {
    json fs = json::array();
    for (const auto& f : map.factors()) {
        json cj = json::array();
        for (const auto& c : f.coeffs()) cj.push_back(json_complex(c));
        fs.push_back(json{{"a", json_complex(f.a())}, {"coeffs", cj}});
    }
    return json{{"factors", fs}};
}

// --- minimal strict TOML subset ---
//
// Supported: [table] headers, dotted-free keys, strings, integers, floats,
// booleans, arrays, inline tables. That covers the experiment configs; no
// dates, no multiline strings. Parsed into the same json document shape the
// JSON path produces.

namespace toml_mini {

struct Parser {
    std::string_view s;
    size_t i = 0;
    std::vector<std::string>& errors;

    explicit Parser(std::string_view text, std::vector<std::string>& errs)
        : s(text), errors(errs) {}

    void skip_ws_inline() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }

    void skip_to_eol() {
        while (i < s.size() && s[i] != '\n') ++i;
    }

    bool at_comment() const { return i < s.size() && s[i] == '#'; }

    std::string parse_key() {
        skip_ws_inline();
        std::string key;
        if (i < s.size() && s[i] == '"') return parse_string();
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' ||
                                s[i] == '-'))
            key += s[i++];
        return key;
    }

    std::string parse_string() {
        std::string out;
        ++i; // opening quote
        while (i < s.size() && s[i] != '"') {
            if (s[i] == '\\' && i + 1 < s.size()) {
                ++i;
                switch (s[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: errors.push_back("toml: unsupported escape"); break;
                }
                ++i;
            } else {
                out += s[i++];
            }
        }
        if (i < s.size()) ++i; // closing quote
        return out;
    }

    json parse_value() {
        skip_ws_inline();
        if (i >= s.size()) {
            errors.push_back("toml: missing value");
            return json();
        }
        char c = s[i];
        if (c == '"') return json(parse_string());
        if (c == '[') {
            ++i;
            json arr = json::array();
            skip_ws_all();
            if (i < s.size() && s[i] == ']') {
                ++i;
                return arr;
            }
            while (i < s.size()) {
                arr.push_back(parse_value());
                skip_ws_all();
                if (i < s.size() && s[i] == ',') {
                    ++i;
                    skip_ws_all();
                    if (i < s.size() && s[i] == ']') break; // trailing comma
                    continue;
                }
                break;
            }
            if (i < s.size() && s[i] == ']') ++i;
            else errors.push_back("toml: unterminated array");
            return arr;
        }
        if (c == '{') {
            ++i;
            json obj = json::object();
            skip_ws_inline();
            if (i < s.size() && s[i] == '}') {
                ++i;
                return obj;
            }
            while (i < s.size()) {
                std::string key = parse_key();
                skip_ws_inline();
                if (i >= s.size() || s[i] != '=') {
                    errors.push_back("toml: expected '=' in inline table");
                    break;
                }
                ++i;
                obj[key] = parse_value();
                skip_ws_inline();
                if (i < s.size() && s[i] == ',') {
                    ++i;
                    skip_ws_inline();
                    continue;
                }
                break;
            }
            if (i < s.size() && s[i] == '}') ++i;
            else errors.push_back("toml: unterminated inline table");
            return obj;
        }
        // bare scalar: bool / integer / float
        std::string tok;
        while (i < s.size() && s[i] != ',' && s[i] != ']' && s[i] != '}' && s[i] != '\n' &&
               s[i] != '#' && s[i] != ' ' && s[i] != '\t')
            tok += s[i++];
        if (tok == "true") return json(true);
        if (tok == "false") return json(false);
        try {
            if (tok.find_first_of(".eEinf") == std::string::npos) {
                size_t pos = 0;
                long long v = std::stoll(tok, &pos);
                if (pos == tok.size()) return json(v);
            }
            size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos == tok.size()) return json(v);
        } catch (...) {
        }
        errors.push_back("toml: cannot parse value '" + tok + "'");
        return json();
    }

    void skip_ws_all() {
        while (i < s.size() &&
               (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r' || s[i] == '#')) {
            if (s[i] == '#') skip_to_eol();
            else ++i;
        }
    }

    json parse_document() {
        json root = json::object();
        json* current = &root;
        while (i < s.size()) {
            skip_ws_inline();
            if (i >= s.size()) break;
            char c = s[i];
            if (c == '\n' || c == '\r') {
                ++i;
                continue;
            }
            if (c == '#') {
                skip_to_eol();
                continue;
            }
            if (c == '[') {
                ++i;
                // dotted headers open nested tables: [a.b.c]
                std::vector<std::string> parts{parse_key()};
                while (i < s.size() && s[i] == '.') {
                    ++i;
                    parts.push_back(parse_key());
                }
                if (i < s.size() && s[i] == ']') ++i;
                else errors.push_back("toml: unterminated table header");
                json* node = &root;
                for (size_t p = 0; p < parts.size(); ++p) {
                    const std::string& name = parts[p];
                    if (name.empty()) {
                        errors.push_back("toml: empty table name component");
                        break;
                    }
                    bool leaf = p + 1 == parts.size();
                    if (!node->contains(name)) (*node)[name] = json::object();
                    else if (leaf)
                        errors.push_back("toml: duplicate table " + name);
                    else if (!(*node)[name].is_object())
                        errors.push_back("toml: " + name + " is not a table");
                    node = &(*node)[name];
                }
                current = node;
                skip_to_eol();
                continue;
            }
            std::string key = parse_key();
            if (key.empty()) {
                errors.push_back("toml: expected a key");
                skip_to_eol();
                continue;
            }
            skip_ws_inline();
            if (i >= s.size() || s[i] != '=') {
                errors.push_back("toml: expected '=' after key '" + key + "'");
                skip_to_eol();
                continue;
            }
            ++i;
            if (current->contains(key)) errors.push_back("toml: duplicate key " + key);
            (*current)[key] = parse_value();
            skip_ws_inline();
            if (at_comment()) skip_to_eol();
        }
        return root;
    }
};

} // namespace toml_mini

inline json parse_toml(const std::string& text, std::vector<std::string>& errors) {
    toml_mini::Parser p(text, errors);
    return p.parse_document();
}

// --- file helpers ---

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

inline void write_file(const std::string& path, const std::vector<uint8_t>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

// config text by extension: .json or .toml
inline json parse_config_text(const std::string& text, const std::string& path,
                              std::vector<std::string>& errors) {
    auto ends_with = [&](const char* suf) {
        std::string s(suf);
        return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with(".toml")) return parse_toml(text, errors);
    if (ends_with(".json")) {
        json j = json::parse(text, nullptr, false);
        if (j.is_discarded()) {
            errors.push_back(path + ": invalid JSON");
            return json::object();
        }
        return j;
    }
    errors.push_back(path + ": unknown config extension (want .json or .toml)");
    return json::object();
}

// --- CSV assembly ---

class CsvWriter {
public:
    explicit CsvWriter(std::string header) { out_ = std::move(header) + "\n"; }

    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ += ',';
            out_ += cells[i];
        }
        out_ += '\n';
    }

    const std::string& str() const { return out_; }

private:
    std::string out_;
};

// FNV-1a over a byte string; used for config identity, not security.
inline uint64_t fnv1a(const std::string& data) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace henon
