// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "autosec/keyvalue.hpp"
#include "autosec/model.hpp"

// Vulnerability records, the store that indexes them, component matching,
// and the severity-to-cost conversion. Two input formats: a native
// declarative feed (.vulns) and a subset of NVD JSON 2.0. Malformed
// records are skipped with diagnostics; only document-level damage is
// fatal.
//
// Native feed format:
//
//   vuln    id=<vuln id> cvss=<base score> [summary="..."]
//   affects vendor=<v> product=<p> (version=<exact> | min=<lo> [maxex=<hi>])
//
// `affects` lines attach to the preceding `vuln` declaration.

namespace autosec {

/// Product applicability: exact version or half-open range [min, maxex).
struct Applicability {
    std::string vendor;
    std::string product;
    std::optional<Version> exactVersion;
    std::optional<Version> minInclusive;
    std::optional<Version> maxExclusive;

    bool operator==(const Applicability&) const = default;

    bool contains(const Version& v) const {
        if (exactVersion)
            return v.compare(*exactVersion) == 0;
        if (minInclusive && v.compare(*minInclusive) < 0)
            return false;
        if (maxExclusive && v.compare(*maxExclusive) >= 0)
            return false;
        return minInclusive.has_value();
    }
};

struct VulnRecord {
    std::string vulnId;
    double cvssBase = 0; // in [0, 10]
    std::string summary;
    std::vector<Applicability> affected; // non-empty

    bool operator==(const VulnRecord&) const = default;
};

struct MatchedVuln {
    std::string componentId;
    std::string vulnId;
    double cvssBase = 0;
    int coa = 1; // >= 1

    bool operator==(const MatchedVuln&) const = default;
};

/// Severity-to-cost map: high severity means cheap to attack.
/// coa = max(1, round_half_up((10 - cvss) * scale)).
inline int coa_from_cvss(double cvssBase, int scale = 10) {
    if (!(cvssBase >= 0.0 && cvssBase <= 10.0))
        throw OutOfRange("cvss base score must be in [0,10], got " + format_double(cvssBase));
    if (scale < 1)
        throw OutOfRange("coa scale must be >= 1, got " + std::to_string(scale));
    const double raw = (10.0 - cvssBase) * static_cast<double>(scale);
    const auto rounded = static_cast<long long>(std::floor(raw + 0.5));
    return static_cast<int>(std::max<long long>(1, rounded));
}

struct FeedParseResult {
    std::vector<VulnRecord> records;
    std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z')
            c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline void feed_diag(FeedParseResult& result, const std::string& file, int line, const std::string& message) {
    result.diagnostics.push_back({Diagnostic::Severity::Error, file, line, message});
}

} // namespace detail

inline FeedParseResult parse_native_feed(std::string_view text, const std::string& filename = "",
                                         Strictness strictness = Strictness::Strict) {
    FeedParseResult result;
    std::optional<VulnRecord> current;
    int currentLine = 0;
    bool currentBad = false;

    auto finalize = [&] {
        if (!current)
            return;
        if (!currentBad && current->affected.empty()) {
            detail::feed_diag(result, filename, currentLine,
                              "record \"" + current->vulnId + "\" skipped: no applicability entries");
            currentBad = true;
        }
        if (!currentBad)
            result.records.push_back(std::move(*current));
        current.reset();
        currentBad = false;
    };

    for (const KvLine& kv : parse_kv_text(text, filename)) {
        if (kv.keyword == "vuln") {
            finalize();
            currentLine = kv.line;
            kv_check_keys(kv, {"id", "cvss", "summary"}, strictness, filename, &result.diagnostics);
            const std::string* id = kv.find("id");
            const std::string* cvss = kv.find("cvss");
            if (!id || id->empty()) {
                detail::feed_diag(result, filename, kv.line, "record skipped: missing id");
                current.emplace(); // swallow subsequent affects lines
                currentBad = true;
                continue;
            }
            VulnRecord rec;
            rec.vulnId = *id;
            auto score = cvss ? try_parse_double(*cvss) : std::nullopt;
            if (!score || !(*score >= 0.0 && *score <= 10.0)) {
                detail::feed_diag(result, filename, kv.line,
                                  "record \"" + rec.vulnId + "\" skipped: cvss must be a number in [0,10]");
                current.emplace();
                currentBad = true;
                continue;
            }
            rec.cvssBase = *score;
            if (const std::string* summary = kv.find("summary"))
                rec.summary = *summary;
            current = std::move(rec);
        } else if (kv.keyword == "affects") {
            if (!current) {
                detail::feed_diag(result, filename, kv.line, "affects line without a preceding vuln declaration");
                continue;
            }
            if (currentBad)
                continue;
            kv_check_keys(kv, {"vendor", "product", "version", "min", "maxex"}, strictness, filename,
                          &result.diagnostics);
            const std::string* vendor = kv.find("vendor");
            const std::string* product = kv.find("product");
            if (!vendor || vendor->empty() || !product || product->empty()) {
                detail::feed_diag(result, filename, kv.line, "applicability skipped: vendor and product required");
                continue;
            }
            Applicability app;
            app.vendor = *vendor;
            app.product = *product;
            const std::string* exact = kv.find("version");
            const std::string* min = kv.find("min");
            const std::string* maxex = kv.find("maxex");
            if (exact && (min || maxex)) {
                detail::feed_diag(result, filename, kv.line,
                                  "applicability skipped: version= excludes min=/maxex=");
                continue;
            }
            auto parse_ver = [&](const std::string& raw, const char* what) -> std::optional<Version> {
                auto v = Version::try_parse(raw);
                if (!v)
                    detail::feed_diag(result, filename, kv.line,
                                      "applicability skipped: invalid " + std::string(what) + " \"" + raw + "\"");
                return v;
            };
            if (exact) {
                auto v = parse_ver(*exact, "version");
                if (!v)
                    continue;
                app.exactVersion = *v;
            } else if (min) {
                auto lo = parse_ver(*min, "min");
                if (!lo)
                    continue;
                app.minInclusive = *lo;
                if (maxex) {
                    auto hi = parse_ver(*maxex, "maxex");
                    if (!hi)
                        continue;
                    app.maxExclusive = *hi;
                }
            } else {
                detail::feed_diag(result, filename, kv.line,
                                  "applicability skipped: needs version= or min= [maxex=]");
                continue;
            }
            current->affected.push_back(std::move(app));
        } else {
            if (strictness == Strictness::Strict)
                throw ParseError(filename, kv.line, "unknown declaration \"" + kv.keyword + "\"");
            result.diagnostics.push_back({Diagnostic::Severity::Warning, filename, kv.line,
                                          "ignoring unknown declaration \"" + kv.keyword + "\""});
        }
    }
    finalize();
    return result;
}

/// Consumed NVD JSON 2.0 fields: vulnerabilities[].cve.id,
/// .metrics.cvssMetricV31[0].cvssData.baseScore, .descriptions[lang=en],
/// .configurations[].nodes[].cpeMatch[] with vulnerable=true, criteria
/// (cpe:2.3:<part>:<vendor>:<product>:<version>:...),
/// versionStartIncluding, versionEndExcluding. A cpeMatch without any
/// version information applies from version 0 upward.
inline FeedParseResult parse_nvd_feed(std::string_view text, const std::string& filename = "") {
    FeedParseResult result;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(filename, 0, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("vulnerabilities") || !doc["vulnerabilities"].is_array())
        throw SchemaError(detail::located(filename, 0, "NVD feed requires a top-level \"vulnerabilities\" array"));

    int index = -1;
    for (const auto& item : doc["vulnerabilities"]) {
        ++index;
        auto skip = [&](const std::string& why) {
            detail::feed_diag(result, filename, 0, "vulnerabilities[" + std::to_string(index) + "] skipped: " + why);
        };
        if (!item.is_object() || !item.contains("cve") || !item["cve"].is_object()) {
            skip("missing cve object");
            continue;
        }
        const auto& cve = item["cve"];
        if (!cve.contains("id") || !cve["id"].is_string()) {
            skip("missing id");
            continue;
        }
        VulnRecord rec;
        rec.vulnId = cve["id"].get<std::string>();

        const nlohmann::json* score = nullptr;
        if (cve.contains("metrics") && cve["metrics"].is_object()) {
            const auto& metrics = cve["metrics"];
            if (metrics.contains("cvssMetricV31") && metrics["cvssMetricV31"].is_array() &&
                !metrics["cvssMetricV31"].empty()) {
                const auto& m0 = metrics["cvssMetricV31"][0];
                if (m0.is_object() && m0.contains("cvssData") && m0["cvssData"].is_object() &&
                    m0["cvssData"].contains("baseScore") && m0["cvssData"]["baseScore"].is_number())
                    score = &m0["cvssData"]["baseScore"];
            }
        }
        if (!score) {
            skip("record \"" + rec.vulnId + "\" has no CVSS v3.1 base score");
            continue;
        }
        rec.cvssBase = score->get<double>();
        if (!(rec.cvssBase >= 0.0 && rec.cvssBase <= 10.0)) {
            skip("record \"" + rec.vulnId + "\" base score out of [0,10]");
            continue;
        }
        if (cve.contains("descriptions") && cve["descriptions"].is_array()) {
            for (const auto& d : cve["descriptions"]) {
                if (d.is_object() && d.value("lang", "") == "en" && d.contains("value") && d["value"].is_string()) {
                    rec.summary = d["value"].get<std::string>();
                    break;
                }
            }
        }

        if (cve.contains("configurations") && cve["configurations"].is_array()) {
            for (const auto& cfg : cve["configurations"]) {
                if (!cfg.is_object() || !cfg.contains("nodes") || !cfg["nodes"].is_array())
                    continue;
                for (const auto& node : cfg["nodes"]) {
                    if (!node.is_object() || !node.contains("cpeMatch") || !node["cpeMatch"].is_array())
                        continue;
                    for (const auto& cm : node["cpeMatch"]) {
                        if (!cm.is_object() || !cm.value("vulnerable", false))
                            continue;
                        if (!cm.contains("criteria") || !cm["criteria"].is_string())
                            continue;
                        const std::string criteria = cm["criteria"].get<std::string>();
                        std::vector<std::string> parts;
                        std::size_t start = 0;
                        while (start <= criteria.size()) {
                            std::size_t colon = criteria.find(':', start);
                            if (colon == std::string::npos)
                                colon = criteria.size();
                            parts.push_back(criteria.substr(start, colon - start));
                            start = colon + 1;
                            if (colon == criteria.size())
                                break;
                        }
                        if (parts.size() < 6 || parts[0] != "cpe" || parts[1] != "2.3") {
                            skip("record \"" + rec.vulnId + "\": unsupported CPE \"" + criteria + "\"");
                            continue;
                        }
                        Applicability app;
                        app.vendor = parts[3];
                        app.product = parts[4];
                        const std::string& cpeVersion = parts[5];
                        if (cpeVersion != "*" && cpeVersion != "-") {
                            auto v = Version::try_parse(cpeVersion);
                            if (!v) {
                                skip("record \"" + rec.vulnId + "\": unparsable CPE version \"" + cpeVersion + "\"");
                                continue;
                            }
                            app.exactVersion = *v;
                        } else {
                            std::string lo = cm.value("versionStartIncluding", "0");
                            auto vlo = Version::try_parse(lo);
                            if (!vlo) {
                                skip("record \"" + rec.vulnId + "\": invalid versionStartIncluding \"" + lo + "\"");
                                continue;
                            }
                            app.minInclusive = *vlo;
                            if (cm.contains("versionEndExcluding") && cm["versionEndExcluding"].is_string()) {
                                auto vhi = Version::try_parse(cm["versionEndExcluding"].get<std::string>());
                                if (!vhi) {
                                    skip("record \"" + rec.vulnId + "\": invalid versionEndExcluding");
                                    continue;
                                }
                                app.maxExclusive = *vhi;
                            }
                        }
                        rec.affected.push_back(std::move(app));
                    }
                }
            }
        }
        if (rec.affected.empty()) {
            skip("record \"" + rec.vulnId + "\" has no vulnerable applicability entries");
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

/// Auto-detects the feed format: JSON documents start with '{'.
inline FeedParseResult parse_feed_text(std::string_view text, const std::string& filename = "",
                                       Strictness strictness = Strictness::Strict) {
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n')
            continue;
        if (c == '{')
            return parse_nvd_feed(text, filename);
        break;
    }
    return parse_native_feed(text, filename, strictness);
}

inline FeedParseResult parse_feed(const std::filesystem::path& path, Strictness strictness = Strictness::Strict) {
    return parse_feed_text(read_text_file(path), path.string(), strictness);
}

/// Canonical native-format serializer: records sorted by vulnId,
/// applicability entries sorted; parse -> serialize -> parse is identity.
inline std::string serialize_vuln_records(std::vector<VulnRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const VulnRecord& a, const VulnRecord& b) { return a.vulnId < b.vulnId; });
    auto app_key = [](const Applicability& a) {
        std::string k = a.vendor + "\x1f" + a.product + "\x1f";
        if (a.exactVersion)
            k += "0\x1f" + a.exactVersion->str();
        else
            k += "1\x1f" + (a.minInclusive ? a.minInclusive->str() : std::string()) + "\x1f" +
                 (a.maxExclusive ? a.maxExclusive->str() : std::string());
        return k;
    };
    std::string out;
    for (auto& rec : records) {
        std::vector<std::pair<std::string, std::string>> attrs{{"id", rec.vulnId},
                                                               {"cvss", format_double(rec.cvssBase)}};
        if (!rec.summary.empty())
            attrs.emplace_back("summary", rec.summary);
        out += format_kv_line("vuln", attrs);
        std::sort(rec.affected.begin(), rec.affected.end(),
                  [&](const Applicability& a, const Applicability& b) { return app_key(a) < app_key(b); });
        for (const auto& app : rec.affected) {
            std::vector<std::pair<std::string, std::string>> a{{"vendor", app.vendor}, {"product", app.product}};
            if (app.exactVersion) {
                a.emplace_back("version", app.exactVersion->str());
            } else {
                a.emplace_back("min", app.minInclusive->str());
                if (app.maxExclusive)
                    a.emplace_back("maxex", app.maxExclusive->str());
            }
            out += format_kv_line("affects", a);
        }
    }
    return out;
}

/// Immutable after build; vulnIds unique (duplicates dropped with a
/// diagnostic). Provenance is informational and never serialized.
struct VulnStore {
    std::vector<VulnRecord> records; // sorted by vulnId
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> byVendorProduct; // lowercased keys
    std::string provenance;

    const VulnRecord* find(std::string_view vulnId) const {
        auto it = std::lower_bound(records.begin(), records.end(), vulnId,
                                   [](const VulnRecord& r, std::string_view id) { return r.vulnId < id; });
        if (it != records.end() && it->vulnId == vulnId)
            return &*it;
        return nullptr;
    }
};

inline VulnStore build_vuln_store(std::vector<VulnRecord> records, const std::string& provenance = "",
                                  std::vector<Diagnostic>* diags = nullptr) {
    VulnStore store;
    store.provenance = provenance;
    std::sort(records.begin(), records.end(),
              [](const VulnRecord& a, const VulnRecord& b) { return a.vulnId < b.vulnId; });
    for (auto& rec : records) {
        if (!store.records.empty() && store.records.back().vulnId == rec.vulnId) {
            if (diags)
                diags->push_back({Diagnostic::Severity::Warning, provenance, 0,
                                  "duplicate record \"" + rec.vulnId + "\" dropped"});
            continue;
        }
        store.records.push_back(std::move(rec));
    }
    for (std::size_t i = 0; i < store.records.size(); ++i) {
        std::set<std::pair<std::string, std::string>> keys;
        for (const auto& app : store.records[i].affected)
            keys.emplace(detail::lower_ascii(app.vendor), detail::lower_ascii(app.product));
        for (const auto& key : keys)
            store.byVendorProduct[key].push_back(i);
    }
    return store;
}

inline VulnStore load_vuln_store(const std::filesystem::path& path, Strictness strictness = Strictness::Strict,
                                 std::vector<Diagnostic>* diags = nullptr) {
    FeedParseResult parsed = parse_feed(path, strictness);
    if (diags)
        diags->insert(diags->end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
    return build_vuln_store(std::move(parsed.records), path.string(), diags);
}

struct ComponentMatchResult {
    std::string componentId;
    bool unidentified = false; // no productHint on the component
    std::vector<MatchedVuln> matches;
};

/// A match needs vendor+product equality (case-insensitive) and the
/// component's version inside the applicability range; a component
/// without a version never matches (its exposure is unknown, not
/// assumed).
inline ComponentMatchResult match_component(const Component& c, const VulnStore& store, int coaScale = 10) {
    ComponentMatchResult result;
    result.componentId = c.id;
    if (!c.productHint) {
        result.unidentified = true;
        return result;
    }
    if (!c.productHint->version)
        return result;
    const Version& v = *c.productHint->version;
    auto it = store.byVendorProduct.find(
        {detail::lower_ascii(c.productHint->vendor), detail::lower_ascii(c.productHint->product)});
    if (it == store.byVendorProduct.end())
        return result;
    for (std::size_t idx : it->second) {
        const VulnRecord& rec = store.records[idx];
        bool hit = false;
        for (const auto& app : rec.affected) {
            if (detail::lower_ascii(app.vendor) != detail::lower_ascii(c.productHint->vendor) ||
                detail::lower_ascii(app.product) != detail::lower_ascii(c.productHint->product))
                continue;
            if (app.contains(v)) {
                hit = true;
                break;
            }
        }
        if (hit)
            result.matches.push_back({c.id, rec.vulnId, rec.cvssBase, coa_from_cvss(rec.cvssBase, coaScale)});
    }
    std::sort(result.matches.begin(), result.matches.end(), [](const MatchedVuln& a, const MatchedVuln& b) {
        if (a.coa != b.coa)
            return a.coa < b.coa;
        return a.vulnId < b.vulnId;
    });
    return result;
}

using AnnotationMap = std::map<std::string, std::vector<MatchedVuln>>;

/// Per-component matches across a whole variant set. The same element id
/// may carry different hints in different variants; the union of matches
/// (deduplicated by vulnId) is the superposition-conservative choice.
inline AnnotationMap annotate_variant_set(const VariantSet& vs, const VulnStore& store, int coaScale = 10) {
    AnnotationMap annotations;
    for (const auto& variant : vs.variants) {
        for (const auto& c : variant.components) {
            ComponentMatchResult r = match_component(c, store, coaScale);
            auto& list = annotations[c.id];
            for (auto& m : r.matches) {
                bool dup = false;
                for (const auto& existing : list)
                    if (existing.vulnId == m.vulnId) {
                        dup = true;
                        break;
                    }
                if (!dup)
                    list.push_back(std::move(m));
            }
        }
    }
    for (auto& [id, list] : annotations)
        std::sort(list.begin(), list.end(), [](const MatchedVuln& a, const MatchedVuln& b) {
            if (a.coa != b.coa)
                return a.coa < b.coa;
            return a.vulnId < b.vulnId;
        });
    return annotations;
}

} // namespace autosec
