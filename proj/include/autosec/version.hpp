// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autosec/errors.hpp"

namespace autosec {

/// Dotted product version: 1 to 4 non-negative integer parts ("2", "2.0",
/// "2.0.1", "2.0.1.7"). Comparison pads missing parts with zeros, so
/// compare("2.0", "2.0.0") == 0, while structural equality keeps the part
/// count as written.
class Version {
public:
    Version() = default;

    static std::optional<Version> try_parse(std::string_view text) {
        if (text.empty() || text.size() > 64)
            return std::nullopt;
        Version v;
        std::uint64_t part = 0;
        std::size_t digits = 0;
        for (std::size_t i = 0; i <= text.size(); ++i) {
            if (i == text.size() || text[i] == '.') {
                if (digits == 0 || v.parts_.size() == 4)
                    return std::nullopt;
                v.parts_.push_back(static_cast<std::uint32_t>(part));
                part = 0;
                digits = 0;
                continue;
            }
            const char c = text[i];
            if (c < '0' || c > '9')
                return std::nullopt;
            part = part * 10 + static_cast<std::uint64_t>(c - '0');
            if (part > 0xffffffffull)
                return std::nullopt;
            ++digits;
        }
        return v;
    }

    static Version parse(std::string_view text) {
        auto v = try_parse(text);
        if (!v)
            throw ParseError("invalid version string \"" + std::string(text) +
                             "\" (expected 1-4 dot-separated non-negative integers)");
        return *v;
    }

    const std::vector<std::uint32_t>& parts() const { return parts_; }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i)
                out += '.';
            out += std::to_string(parts_[i]);
        }
        return out;
    }

    /// Zero-padded numeric comparison: negative, zero or positive.
    int compare(const Version& other) const {
        const std::size_t n = parts_.size() > other.parts_.size() ? parts_.size() : other.parts_.size();
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint32_t a = i < parts_.size() ? parts_[i] : 0;
            const std::uint32_t b = i < other.parts_.size() ? other.parts_[i] : 0;
            if (a != b)
                return a < b ? -1 : 1;
        }
        return 0;
    }

    bool operator==(const Version& other) const { return parts_ == other.parts_; }
    bool operator<(const Version& other) const { return compare(other) < 0; }

private:
    std::vector<std::uint32_t> parts_;
};

} // namespace autosec
