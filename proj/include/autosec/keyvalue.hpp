// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autosec/errors.hpp"

// Line-oriented declarative text format shared by every on-disk artifact
// (.sutm models, signature databases, vulnerability feeds, mitigation
// catalogs, simulated-SUT descriptions):
//
//   # comment until end of line
//   keyword key=value key="quoted value" ...
//
// One declaration per line. Values containing whitespace, '#', '"' or '='
// must be double-quoted; inside quotes, \" and \\ are the only escapes.

namespace autosec {

enum class Strictness { Strict, Lax };

struct Diagnostic {
    enum class Severity { Warning, Error };

    Severity severity = Severity::Warning;
    std::string file;
    int line = 0;
    std::string message;
};

inline std::string format_diagnostic(const Diagnostic& d) {
    std::string prefix = d.severity == Diagnostic::Severity::Error ? "error" : "warning";
    return detail::located(d.file, d.line, prefix + ": " + d.message);
}

/// One parsed declaration line.
struct KvLine {
    int line = 0;
    std::string keyword;
    std::vector<std::pair<std::string, std::string>> attrs;

    const std::string* find(std::string_view key) const {
        for (const auto& [k, v] : attrs)
            if (k == key)
                return &v;
        return nullptr;
    }

    bool has(std::string_view key) const { return find(key) != nullptr; }
};

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw IoError("cannot read file: " + path.string());
    return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open file for writing: " + path.string());
    out << content;
    if (!out)
        throw IoError("cannot write file: " + path.string());
}

namespace detail {

inline bool is_key_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

} // namespace detail

/// Parses declarative text into lines. Throws ParseError on malformed
/// syntax; the strict/lax distinction for unknown keywords and keys is
/// applied by the per-format loaders, not here.
inline std::vector<KvLine> parse_kv_text(std::string_view text, const std::string& filename = "") {
    std::vector<KvLine> out;
    int lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineNo;
        if (pos > text.size() + 1)
            break;

        KvLine kv;
        kv.line = lineNo;
        std::size_t i = 0;
        auto skip_ws = [&] {
            while (i < line.size() && detail::is_space(line[i]))
                ++i;
        };
        skip_ws();
        if (i >= line.size() || line[i] == '#')
            continue;

        // keyword
        std::size_t start = i;
        while (i < line.size() && detail::is_key_char(line[i]))
            ++i;
        if (i == start)
            throw ParseError(filename, lineNo, "expected a declaration keyword");
        kv.keyword = std::string(line.substr(start, i - start));
        if (i < line.size() && !detail::is_space(line[i]) && line[i] != '#')
            throw ParseError(filename, lineNo, "unexpected character after keyword");

        // key=value attributes
        while (true) {
            skip_ws();
            if (i >= line.size() || line[i] == '#')
                break;
            start = i;
            while (i < line.size() && detail::is_key_char(line[i]))
                ++i;
            if (i == start || i >= line.size() || line[i] != '=')
                throw ParseError(filename, lineNo, "expected key=value attribute");
            std::string key(line.substr(start, i - start));
            ++i; // '='
            std::string value;
            if (i < line.size() && line[i] == '"') {
                ++i;
                bool closed = false;
                while (i < line.size()) {
                    char c = line[i++];
                    if (c == '\\') {
                        if (i >= line.size() || (line[i] != '"' && line[i] != '\\'))
                            throw ParseError(filename, lineNo, "invalid escape in quoted value");
                        value += line[i++];
                    } else if (c == '"') {
                        closed = true;
                        break;
                    } else {
                        value += c;
                    }
                }
                if (!closed)
                    throw ParseError(filename, lineNo, "unterminated quoted value");
                if (i < line.size() && !detail::is_space(line[i]) && line[i] != '#')
                    throw ParseError(filename, lineNo, "unexpected character after quoted value");
            } else {
                while (i < line.size() && !detail::is_space(line[i]) && line[i] != '#')
                    value += line[i++];
            }
            for (const auto& [k, v] : kv.attrs)
                if (k == key)
                    throw ParseError(filename, lineNo, "duplicate key \"" + key + "\"");
            kv.attrs.emplace_back(std::move(key), std::move(value));
        }
        out.push_back(std::move(kv));
    }
    return out;
}

inline std::string quote_kv_value(const std::string& value) {
    bool plain = !value.empty();
    for (char c : value) {
        if (detail::is_space(c) || c == '#' || c == '"' || c == '=' || c == '\\' || c == '\n') {
            plain = false;
            break;
        }
    }
    if (plain)
        return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_kv_line(const std::string& keyword,
                                  const std::vector<std::pair<std::string, std::string>>& attrs) {
    std::string out = keyword;
    for (const auto& [k, v] : attrs) {
        out += ' ';
        out += k;
        out += '=';
        out += quote_kv_value(v);
    }
    out += '\n';
    return out;
}

/// Require an attribute to be present and non-empty.
inline const std::string& kv_require(const KvLine& kv, std::string_view key, const std::string& filename) {
    const std::string* v = kv.find(key);
    if (!v || v->empty())
        throw ParseError(filename, kv.line,
                         "declaration \"" + kv.keyword + "\" requires attribute \"" + std::string(key) + "\"");
    return *v;
}

/// Shortest round-trip decimal representation; byte-stable across runs.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::optional<double> try_parse_double(std::string_view s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

/// Unsigned integer, decimal or 0x-prefixed hex.
inline std::optional<std::uint64_t> try_parse_uint(std::string_view s) {
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        base = 16;
        s.remove_prefix(2);
    }
    if (s.empty())
        return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

inline double kv_double(const KvLine& kv, std::string_view key, const std::string& filename) {
    const std::string& raw = kv_require(kv, key, filename);
    auto v = try_parse_double(raw);
    if (!v)
        throw ParseError(filename, kv.line, "attribute \"" + std::string(key) + "\" is not a number: \"" + raw + "\"");
    return *v;
}

inline std::uint64_t kv_uint(const KvLine& kv, std::string_view key, const std::string& filename) {
    const std::string& raw = kv_require(kv, key, filename);
    auto v = try_parse_uint(raw);
    if (!v)
        throw ParseError(filename, kv.line,
                         "attribute \"" + std::string(key) + "\" is not a non-negative integer: \"" + raw + "\"");
    return *v;
}

/// Report keys outside `known` according to strictness.
inline void kv_check_keys(const KvLine& kv, std::initializer_list<std::string_view> known,
                          Strictness strictness, const std::string& filename,
                          std::vector<Diagnostic>* diags) {
    for (const auto& [k, v] : kv.attrs) {
        bool ok = false;
        for (auto name : known)
            if (k == name) {
                ok = true;
                break;
            }
        if (ok)
            continue;
        if (strictness == Strictness::Strict)
            throw ParseError(filename, kv.line, "unknown key \"" + k + "\" in \"" + kv.keyword + "\" declaration");
        if (diags)
            diags->push_back({Diagnostic::Severity::Warning, filename, kv.line,
                              "ignoring unknown key \"" + k + "\" in \"" + kv.keyword + "\" declaration"});
    }
}

} // namespace autosec
