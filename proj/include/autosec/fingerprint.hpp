// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autosec/keyvalue.hpp"
#include "autosec/model.hpp"

// Component identification from observable behavior: clock-skew
// estimation over message traces, statistical signal features, signature
// matching, combinatorial probe planning, and before/after delta
// fingerprinting. All operations are pure functions over immutable
// inputs.

namespace autosec {

struct TraceRecord {
    double timestamp = 0; // seconds
    std::uint32_t arbitrationId = 0;
    std::vector<std::uint8_t> payload; // <= 8 bytes
};

struct MessageTrace {
    std::vector<TraceRecord> records; // timestamps non-decreasing
};

struct SignalSampleSeries {
    std::vector<double> values; // volts
    double sampleRate = 0;      // Hz, informational
};

struct FeatureVector {
    double mean = 0;
    double stddev = 0; // population
    double meanAbsDev = 0;
    double skewness = 0;       // Fisher g1
    double excessKurtosis = 0; // g2
    double rms = 0;
    double min = 0;
    double max = 0;
};

struct ClockSkewEstimate {
    double skewPpm = 0;
    double residualRms = 0; // seconds
    int sampleCount = 0;
};

enum class EvidenceKind { IdentityMatch, ElementObserved, ElementAbsent };
enum class EvidenceSource { Fingerprint, AttackOutcome };

inline std::string to_string(EvidenceKind k) {
    switch (k) {
    case EvidenceKind::IdentityMatch: return "identity-match";
    case EvidenceKind::ElementObserved: return "element-observed";
    case EvidenceKind::ElementAbsent: return "element-absent";
    }
    return "?";
}

inline std::string to_string(EvidenceSource s) {
    return s == EvidenceSource::Fingerprint ? "fingerprint" : "attack-outcome";
}

struct Evidence {
    EvidenceKind kind = EvidenceKind::ElementObserved;
    std::string subjectId; // element id (or arbitration id rendered as text)
    std::optional<ProductHint> identity;
    double confidence = 1.0; // in [0,1]
    EvidenceSource source = EvidenceSource::Fingerprint;
};

// ---------------------------------------------------------------------------
// Trace input. One record per line, candump-style:
//
//   <timestamp seconds> <arbitrationId (decimal or 0x hex)> <payload hex | ->
//
// '#' starts a comment; blank lines ignored; timestamps must be
// non-decreasing.

inline MessageTrace parse_trace(std::string_view text, const std::string& filename = "") {
    MessageTrace trace;
    int lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        bool last = eol == text.size();
        pos = eol + 1;
        ++lineNo;

        if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        std::vector<std::string_view> fields;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
                ++i;
            std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
                ++i;
            if (i > start)
                fields.push_back(line.substr(start, i - start));
        }
        if (fields.empty()) {
            if (last)
                break;
            continue;
        }
        if (fields.size() != 3)
            throw ParseError(filename, lineNo, "expected: timestamp arbitrationId payloadHex");

        TraceRecord rec;
        auto ts = try_parse_double(fields[0]);
        if (!ts)
            throw ParseError(filename, lineNo, "invalid timestamp \"" + std::string(fields[0]) + "\"");
        rec.timestamp = *ts;
        auto id = try_parse_uint(fields[1]);
        if (!id || *id > std::numeric_limits<std::uint32_t>::max())
            throw ParseError(filename, lineNo, "invalid arbitration id \"" + std::string(fields[1]) + "\"");
        rec.arbitrationId = static_cast<std::uint32_t>(*id);
        std::string_view hex = fields[2];
        if (hex != "-") {
            if (hex.size() % 2 != 0 || hex.size() > 16)
                throw ParseError(filename, lineNo, "payload must be an even-length hex string of at most 8 bytes");
            auto nibble = [&](char c) -> int {
                if (c >= '0' && c <= '9') return c - '0';
                if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                if (c >= 'A' && c <= 'F') return c - 'A' + 10;
                throw ParseError(filename, lineNo, "invalid hex digit in payload");
            };
            for (std::size_t b = 0; b < hex.size(); b += 2)
                rec.payload.push_back(static_cast<std::uint8_t>(nibble(hex[b]) * 16 + nibble(hex[b + 1])));
        }
        if (!trace.records.empty() && rec.timestamp < trace.records.back().timestamp)
            throw ParseError(filename, lineNo, "timestamps must be non-decreasing");
        trace.records.push_back(std::move(rec));
        if (last)
            break;
    }
    return trace;
}

inline MessageTrace load_trace(const std::filesystem::path& path) {
    return parse_trace(read_text_file(path), path.string());
}

/// Signal sample file: one voltage per line; '#' comments; blank lines
/// ignored.
inline SignalSampleSeries parse_sample_series(std::string_view text, const std::string& filename = "",
                                              double sampleRate = 0) {
    SignalSampleSeries series;
    series.sampleRate = sampleRate;
    int lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        bool last = eol == text.size();
        pos = eol + 1;
        ++lineNo;
        if (std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t' || line.front() == '\r'))
            line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
            line.remove_suffix(1);
        if (!line.empty()) {
            auto v = try_parse_double(line);
            if (!v)
                throw ParseError(filename, lineNo, "invalid sample value \"" + std::string(line) + "\"");
            series.values.push_back(*v);
        }
        if (last)
            break;
    }
    return series;
}

inline SignalSampleSeries load_sample_series(const std::filesystem::path& path, double sampleRate = 0) {
    return parse_sample_series(read_text_file(path), path.string(), sampleRate);
}

// ---------------------------------------------------------------------------
// Clock skew: drift of a sender's local clock against an assumed true
// clock, in ppm. With arrivals a_0..a_{n-1} and reference period T, the
// error e_i = a_i - (a_0 + i*T) is regressed (with intercept) against
// ideal elapsed time x_i = i*T; skew is the slope in ppm.

inline ClockSkewEstimate estimate_clock_skew(const MessageTrace& trace, std::uint32_t arbitrationId,
                                             std::optional<double> nominalPeriod = std::nullopt) {
    std::vector<double> arrivals;
    for (const auto& r : trace.records)
        if (r.arbitrationId == arbitrationId)
            arrivals.push_back(r.timestamp);
    if (arrivals.size() < 10)
        throw InsufficientSamples("need at least 10 records for arbitration id " + std::to_string(arbitrationId) +
                                  ", got " + std::to_string(arrivals.size()));

    double T;
    if (nominalPeriod) {
        T = *nominalPeriod;
    } else {
        std::vector<double> deltas;
        for (std::size_t i = 1; i < arrivals.size(); ++i)
            deltas.push_back(arrivals[i] - arrivals[i - 1]);
        std::sort(deltas.begin(), deltas.end());
        std::size_t mid = deltas.size() / 2;
        T = deltas.size() % 2 == 1 ? deltas[mid] : (deltas[mid - 1] + deltas[mid]) / 2.0;
    }
    if (T <= 0)
        throw ZeroPeriod("reference period must be positive, got " + format_double(T));

    const std::size_t n = arrivals.size();
    double sx = 0, se = 0;
    std::vector<double> xs(n), es(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = static_cast<double>(i) * T;
        es[i] = arrivals[i] - (arrivals[0] + xs[i]);
        sx += xs[i];
        se += es[i];
    }
    const double xbar = sx / static_cast<double>(n);
    const double ebar = se / static_cast<double>(n);
    double sxx = 0, sxe = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxe += (xs[i] - xbar) * (es[i] - ebar);
    }
    const double slope = sxe / sxx; // sxx > 0: n >= 10 distinct x values
    const double intercept = ebar - slope * xbar;

    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = es[i] - (intercept + slope * xs[i]);
        rss += r * r;
    }
    ClockSkewEstimate est;
    est.skewPpm = 1e6 * slope;
    est.residualRms = std::sqrt(rss / static_cast<double>(n));
    est.sampleCount = static_cast<int>(n);
    return est;
}

// ---------------------------------------------------------------------------
// Statistical features. Population moments; skewness and excess kurtosis
// are defined as 0 for constant signals (m2 = 0).

inline FeatureVector extract_features(const SignalSampleSeries& series) {
    if (series.values.empty())
        throw EmptySeries("signal series must not be empty");
    const auto& v = series.values;
    const double n = static_cast<double>(v.size());

    FeatureVector f;
    f.min = *std::min_element(v.begin(), v.end());
    f.max = *std::max_element(v.begin(), v.end());
    double sum = 0, sumSq = 0;
    for (double x : v) {
        sum += x;
        sumSq += x * x;
    }
    f.mean = sum / n;
    f.rms = std::sqrt(sumSq / n);
    if (f.min == f.max) {
        // exactly constant: no spread, shape moments defined as zero;
        // computing them would amplify the rounding noise of the mean
        f.mean = f.min;
        f.rms = std::abs(f.min);
        return f;
    }

    double m2 = 0, m3 = 0, m4 = 0, absDev = 0;
    for (double x : v) {
        const double d = x - f.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        absDev += std::abs(d);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    f.stddev = std::sqrt(m2);
    f.meanAbsDev = absDev / n;
    if (m2 > 0) {
        f.skewness = m3 / std::pow(m2, 1.5);
        f.excessKurtosis = m4 / (m2 * m2) - 3.0;
    }
    return f;
}

/// Canonical feature keys shared by signature databases and reports.
inline std::map<std::string, double> feature_map(const FeatureVector& f) {
    return {{"mean", f.mean},         {"stddev", f.stddev},   {"meanabsdev", f.meanAbsDev},
            {"skewness", f.skewness}, {"kurtosis", f.excessKurtosis}, {"rms", f.rms},
            {"min", f.min},           {"max", f.max}};
}

inline const std::set<std::string>& feature_keys() {
    static const std::set<std::string> keys = {"mean", "stddev", "meanabsdev", "skewness",
                                               "kurtosis", "rms", "min", "max"};
    return keys;
}

// ---------------------------------------------------------------------------
// Signature database (.sigdb). One entry per line:
//
//   signature vendor=<v> product=<p> [version=<dotted>] [skew=<lo>:<hi>]
//             [mean=<lo>:<hi>] [stddev=...] [meanabsdev=...] [skewness=...]
//             [kurtosis=...] [rms=...] [min=...] [max=...]
//
// Intervals are closed; every entry needs at least one interval.

struct SignatureEntry {
    ProductHint identity;
    std::map<std::string, std::pair<double, double>> featureRanges; // closed intervals
    std::optional<std::pair<double, double>> skewRangePpm;
};

struct SignatureDb {
    std::vector<SignatureEntry> entries; // identities unique
};

namespace detail {

inline std::pair<double, double> parse_interval(const std::string& raw, const std::string& filename, int line,
                                                const std::string& key) {
    std::size_t colon = raw.find(':');
    if (colon == std::string::npos)
        throw ParseError(filename, line, "interval \"" + key + "\" must have the form lo:hi");
    auto lo = try_parse_double(std::string_view(raw).substr(0, colon));
    auto hi = try_parse_double(std::string_view(raw).substr(colon + 1));
    if (!lo || !hi)
        throw ParseError(filename, line, "interval \"" + key + "\" must have numeric bounds");
    if (*lo > *hi)
        throw ParseError(filename, line, "interval \"" + key + "\" has lo > hi");
    return {*lo, *hi};
}

inline std::string identity_key(const ProductHint& h) {
    return h.vendor + "\x1f" + h.product + "\x1f" + (h.version ? h.version->str() : "");
}

} // namespace detail

inline SignatureDb parse_signature_db(std::string_view text, const std::string& filename = "",
                                      Strictness strictness = Strictness::Strict,
                                      std::vector<Diagnostic>* diags = nullptr) {
    SignatureDb db;
    std::set<std::string> seen;
    for (const KvLine& kv : parse_kv_text(text, filename)) {
        if (kv.keyword != "signature") {
            if (strictness == Strictness::Strict)
                throw ParseError(filename, kv.line, "unknown declaration \"" + kv.keyword + "\"");
            if (diags)
                diags->push_back({Diagnostic::Severity::Warning, filename, kv.line,
                                  "ignoring unknown declaration \"" + kv.keyword + "\""});
            continue;
        }
        kv_check_keys(kv,
                      {"vendor", "product", "version", "skew", "mean", "stddev", "meanabsdev", "skewness",
                       "kurtosis", "rms", "min", "max"},
                      strictness, filename, diags);
        SignatureEntry entry;
        entry.identity.vendor = kv_require(kv, "vendor", filename);
        entry.identity.product = kv_require(kv, "product", filename);
        if (const std::string* ver = kv.find("version")) {
            auto v = Version::try_parse(*ver);
            if (!v)
                throw ParseError(filename, kv.line, "invalid version \"" + *ver + "\"");
            entry.identity.version = *v;
        }
        for (const auto& [key, raw] : kv.attrs) {
            if (key == "vendor" || key == "product" || key == "version")
                continue;
            auto interval = detail::parse_interval(raw, filename, kv.line, key);
            if (key == "skew")
                entry.skewRangePpm = interval;
            else if (feature_keys().count(key))
                entry.featureRanges.emplace(key, interval);
        }
        if (entry.featureRanges.empty() && !entry.skewRangePpm)
            throw ParseError(filename, kv.line, "signature entry declares no intervals");
        if (!seen.insert(detail::identity_key(entry.identity)).second)
            throw ParseError(filename, kv.line, "duplicate signature identity");
        db.entries.push_back(std::move(entry));
    }
    return db;
}

inline SignatureDb load_signature_db(const std::filesystem::path& path,
                                     Strictness strictness = Strictness::Strict,
                                     std::vector<Diagnostic>* diags = nullptr) {
    return parse_signature_db(read_text_file(path), path.string(), strictness, diags);
}

/// What a probe or passive capture observed about one subject.
struct Observation {
    std::optional<FeatureVector> features;
    std::optional<double> skewPpm;
};

struct SignatureMatch {
    ProductHint identity;
    double score = 0; // in (0,1]
};

/// Score = fraction of the entry's declared intervals that contain the
/// corresponding observed value; intervals without an observed value
/// count as misses. Zero-score entries are omitted. Ties rank the
/// narrower (more specific) signature first, then lexicographic identity.
inline std::vector<SignatureMatch> match_signature(const Observation& obs, const SignatureDb& db) {
    if (!obs.features && !obs.skewPpm)
        throw EmptyObservation("observation carries neither features nor a skew estimate");
    std::map<std::string, double> observed;
    if (obs.features)
        observed = feature_map(*obs.features);
    if (obs.skewPpm)
        observed.emplace("skew", *obs.skewPpm);

    struct Ranked {
        SignatureMatch match;
        double totalWidth;
    };
    std::vector<Ranked> ranked;
    for (const auto& entry : db.entries) {
        int declared = 0, hits = 0;
        double width = 0;
        auto consider = [&](const std::string& key, const std::pair<double, double>& iv) {
            ++declared;
            width += iv.second - iv.first;
            auto it = observed.find(key);
            if (it != observed.end() && it->second >= iv.first && it->second <= iv.second)
                ++hits;
        };
        for (const auto& [key, iv] : entry.featureRanges)
            consider(key, iv);
        if (entry.skewRangePpm)
            consider("skew", *entry.skewRangePpm);
        if (hits == 0)
            continue;
        ranked.push_back({{entry.identity, static_cast<double>(hits) / static_cast<double>(declared)}, width});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.match.score != b.match.score)
            return a.match.score > b.match.score;
        if (a.totalWidth != b.totalWidth)
            return a.totalWidth < b.totalWidth;
        return detail::identity_key(a.match.identity) < detail::identity_key(b.match.identity);
    });
    std::vector<SignatureMatch> out;
    out.reserve(ranked.size());
    for (auto& r : ranked)
        out.push_back(std::move(r.match));
    return out;
}

// ---------------------------------------------------------------------------
// Combinatorial probe plans: greedy covering-array construction. Every
// t-tuple of parameter values appears in at least one row; rows never
// exceed the exhaustive product.

struct ProbeParameter {
    std::string name;
    std::vector<std::string> values; // finite domain, declared order
};

struct ProbePlan {
    std::vector<ProbeParameter> parameters;
    int strength = 1;
    std::vector<std::vector<std::string>> rows; // row[i] = value of parameters[i]
};

inline ProbePlan generate_probe_plan(const std::vector<ProbeParameter>& parameters, int strength) {
    if (strength < 1 || parameters.empty() || strength > static_cast<int>(parameters.size()))
        throw InvalidStrength("strength must satisfy 1 <= t <= parameter count (t=" + std::to_string(strength) +
                              ", parameters=" + std::to_string(parameters.size()) + ")");
    std::set<std::string> names;
    for (const auto& p : parameters) {
        if (!names.insert(p.name).second)
            throw ValidationError("duplicate probe parameter \"" + p.name + "\"");
        if (p.values.empty())
            throw ValidationError("probe parameter \"" + p.name + "\" has an empty domain");
        std::set<std::string> uniq(p.values.begin(), p.values.end());
        if (uniq.size() != p.values.size())
            throw ValidationError("probe parameter \"" + p.name + "\" has duplicate values");
    }

    const std::size_t k = parameters.size();
    const std::size_t t = static_cast<std::size_t>(strength);

    // All t-subsets of parameter positions, each with its uncovered
    // value-index combinations.
    struct SubsetState {
        std::vector<std::size_t> positions;
        std::set<std::vector<std::size_t>> uncovered;
    };
    std::vector<SubsetState> subsets;
    std::vector<std::size_t> pick(t);
    auto emit_subset = [&](const std::vector<std::size_t>& positions) {
        SubsetState st;
        st.positions = positions;
        std::vector<std::size_t> combo(t, 0);
        while (true) {
            st.uncovered.insert(combo);
            std::size_t d = t;
            while (d > 0) {
                --d;
                if (++combo[d] < parameters[positions[d]].values.size())
                    break;
                combo[d] = 0;
                if (d == 0)
                    return subsets.push_back(std::move(st));
            }
        }
    };
    // iterative k-choose-t in lexicographic order
    for (std::size_t i = 0; i < t; ++i)
        pick[i] = i;
    while (true) {
        emit_subset(pick);
        std::size_t d = t;
        bool advanced = false;
        while (d > 0) {
            --d;
            if (pick[d] < k - t + d) {
                ++pick[d];
                for (std::size_t j = d + 1; j < t; ++j)
                    pick[j] = pick[j - 1] + 1;
                advanced = true;
                break;
            }
        }
        if (!advanced)
            break;
    }

    std::size_t totalUncovered = 0;
    for (const auto& st : subsets)
        totalUncovered += st.uncovered.size();

    ProbePlan plan;
    plan.parameters = parameters;
    plan.strength = strength;

    std::vector<std::size_t> row(k, 0);
    auto next_row = [&](std::vector<std::size_t>& r) {
        std::size_t d = k;
        while (d > 0) {
            --d;
            if (++r[d] < parameters[d].values.size())
                return true;
            r[d] = 0;
        }
        return false;
    };
    std::vector<std::size_t> extracted(t);
    while (totalUncovered > 0) {
        std::vector<std::size_t> best;
        std::size_t bestCount = 0;
        std::fill(row.begin(), row.end(), 0);
        // Lexicographic candidate order + strict improvement makes the
        // tie-break "lexicographically smallest row" automatic.
        do {
            std::size_t count = 0;
            for (const auto& st : subsets) {
                for (std::size_t i = 0; i < t; ++i)
                    extracted[i] = row[st.positions[i]];
                if (st.uncovered.count(extracted))
                    ++count;
            }
            if (count > bestCount) {
                bestCount = count;
                best = row;
            }
        } while (next_row(row));

        for (auto& st : subsets) {
            for (std::size_t i = 0; i < t; ++i)
                extracted[i] = best[st.positions[i]];
            if (st.uncovered.erase(extracted))
                --totalUncovered;
        }
        std::vector<std::string> values(k);
        for (std::size_t i = 0; i < k; ++i)
            values[i] = parameters[i].values[best[i]];
        plan.rows.push_back(std::move(values));
    }
    return plan;
}

/// Probe parameter file: one `param name=<n> values=<v,v,...>` per line.
inline std::vector<ProbeParameter> parse_probe_parameters(std::string_view text, const std::string& filename = "") {
    std::vector<ProbeParameter> params;
    for (const KvLine& kv : parse_kv_text(text, filename)) {
        if (kv.keyword != "param")
            throw ParseError(filename, kv.line, "unknown declaration \"" + kv.keyword + "\"");
        kv_check_keys(kv, {"name", "values"}, Strictness::Strict, filename, nullptr);
        ProbeParameter p;
        p.name = kv_require(kv, "name", filename);
        const std::string& values = kv_require(kv, "values", filename);
        std::size_t start = 0;
        while (start <= values.size()) {
            std::size_t comma = values.find(',', start);
            if (comma == std::string::npos)
                comma = values.size();
            std::string v = values.substr(start, comma - start);
            if (v.empty())
                throw ParseError(filename, kv.line, "empty value in values list");
            p.values.push_back(std::move(v));
            start = comma + 1;
            if (comma == values.size())
                break;
        }
        params.push_back(std::move(p));
    }
    return params;
}

inline std::string serialize_probe_plan(const ProbePlan& plan) {
    std::string out;
    for (const auto& p : plan.parameters) {
        std::string joined;
        for (const auto& v : p.values) {
            if (!joined.empty())
                joined += ',';
            joined += v;
        }
        out += format_kv_line("param", {{"name", p.name}, {"values", joined}});
    }
    out += format_kv_line("strength", {{"t", std::to_string(plan.strength)}});
    for (const auto& row : plan.rows) {
        std::vector<std::pair<std::string, std::string>> attrs;
        for (std::size_t i = 0; i < row.size(); ++i)
            attrs.emplace_back(plan.parameters[i].name, row[i]);
        out += format_kv_line("row", attrs);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fingerprint reports and delta fingerprinting. A report maps subject ids
// to observed feature values (canonical keys plus "skew"). On disk:
//
//   subject id=<subjectId> <feature>=<value> ...

struct FingerprintReport {
    std::map<std::string, std::map<std::string, double>> subjects;
};

inline FingerprintReport parse_fingerprint_report(std::string_view text, const std::string& filename = "") {
    FingerprintReport report;
    for (const KvLine& kv : parse_kv_text(text, filename)) {
        if (kv.keyword != "subject")
            throw ParseError(filename, kv.line, "unknown declaration \"" + kv.keyword + "\"");
        const std::string& id = kv_require(kv, "id", filename);
        if (report.subjects.count(id))
            throw ParseError(filename, kv.line, "duplicate subject \"" + id + "\"");
        std::map<std::string, double> features;
        for (const auto& [key, raw] : kv.attrs) {
            if (key == "id")
                continue;
            if (!feature_keys().count(key) && key != "skew")
                throw ParseError(filename, kv.line, "unknown feature \"" + key + "\"");
            auto v = try_parse_double(raw);
            if (!v)
                throw ParseError(filename, kv.line, "feature \"" + key + "\" is not a number");
            features.emplace(key, *v);
        }
        report.subjects.emplace(id, std::move(features));
    }
    return report;
}

inline FingerprintReport load_fingerprint_report(const std::filesystem::path& path) {
    return parse_fingerprint_report(read_text_file(path), path.string());
}

inline std::string serialize_fingerprint_report(const FingerprintReport& report) {
    std::string out;
    for (const auto& [id, features] : report.subjects) {
        std::vector<std::pair<std::string, std::string>> attrs{{"id", id}};
        for (const auto& [key, value] : features)
            attrs.emplace_back(key, format_double(value));
        out += format_kv_line("subject", attrs);
    }
    return out;
}

struct FingerprintDelta {
    std::vector<std::string> added;   // subject ids, sorted
    std::vector<std::string> removed; // subject ids, sorted
    std::vector<std::pair<std::string, std::vector<std::string>>> changed; // id -> changed feature keys
};

/// A feature differs when |before - after| > epsilon or it exists on one
/// side only.
inline FingerprintDelta diff_fingerprints(const FingerprintReport& before, const FingerprintReport& after,
                                          double epsilon = 1e-9) {
    FingerprintDelta delta;
    for (const auto& [id, features] : after.subjects)
        if (!before.subjects.count(id))
            delta.added.push_back(id);
    for (const auto& [id, featuresBefore] : before.subjects) {
        auto it = after.subjects.find(id);
        if (it == after.subjects.end()) {
            delta.removed.push_back(id);
            continue;
        }
        const auto& featuresAfter = it->second;
        std::set<std::string> keys;
        for (const auto& [k, v] : featuresBefore)
            keys.insert(k);
        for (const auto& [k, v] : featuresAfter)
            keys.insert(k);
        std::vector<std::string> changedKeys;
        for (const auto& k : keys) {
            auto b = featuresBefore.find(k);
            auto a = featuresAfter.find(k);
            if (b == featuresBefore.end() || a == featuresAfter.end())
                changedKeys.push_back(k);
            else if (std::abs(b->second - a->second) > epsilon)
                changedKeys.push_back(k);
        }
        if (!changedKeys.empty())
            delta.changed.emplace_back(id, std::move(changedKeys));
    }
    return delta;
}

inline std::string serialize_fingerprint_delta(const FingerprintDelta& delta) {
    std::string out;
    for (const auto& id : delta.added)
        out += format_kv_line("added", {{"id", id}});
    for (const auto& id : delta.removed)
        out += format_kv_line("removed", {{"id", id}});
    for (const auto& [id, keys] : delta.changed) {
        std::string joined;
        for (const auto& k : keys) {
            if (!joined.empty())
                joined += ',';
            joined += k;
        }
        out += format_kv_line("changed", {{"id", id}, {"features", joined}});
    }
    return out;
}

} // namespace autosec
