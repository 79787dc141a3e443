// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autosec/attackgraph.hpp"
#include "autosec/keyvalue.hpp"

// Mitigation simulation and exact minimum-cost selection: raise every
// plausible variant's cheapest attack path to or above the MSV. Search
// is exact branch-and-bound over subsets; desk-scale catalogs (<= 24
// entries) keep that tractable, and an independent brute-force oracle in
// the tests keeps it honest.
//
// Catalog format (.mits), one mitigation per line:
//
//   mitigation id=<mitId> component=<componentId> delta=<coa increase> [cost=<non-negative>]
//
// A mitigation without a cost is priced speculatively or dropped,
// depending on the missing-cost policy.

namespace autosec {

struct Mitigation {
    std::string mitId;
    std::string componentId;
    int coaDelta = 1;                // >= 1
    std::optional<long long> cost;   // >= 0; absent = unknown

    bool operator==(const Mitigation&) const = default;
};

enum class MissingMitigationPolicy { Exclude, Speculative };

/// Price of hardening an already-cheap-to-attack component: inversely
/// proportional to its COA. cost = ceil(K / coa).
inline long long speculative_cost(long long coa, long long K = 1000) {
    if (coa < 1)
        throw OutOfRange("coa must be >= 1, got " + std::to_string(coa));
    if (K < 1)
        throw OutOfRange("speculative-cost constant must be >= 1, got " + std::to_string(K));
    return (K + coa - 1) / coa;
}

inline std::vector<Mitigation> parse_mitigation_catalog(std::string_view text, const std::string& filename = "",
                                                        Strictness strictness = Strictness::Strict,
                                                        std::vector<Diagnostic>* diags = nullptr) {
    std::vector<Mitigation> catalog;
    std::set<std::string> seen;
    for (const KvLine& kv : parse_kv_text(text, filename)) {
        if (kv.keyword != "mitigation") {
            if (strictness == Strictness::Strict)
                throw ParseError(filename, kv.line, "unknown declaration \"" + kv.keyword + "\"");
            if (diags)
                diags->push_back({Diagnostic::Severity::Warning, filename, kv.line,
                                  "ignoring unknown declaration \"" + kv.keyword + "\""});
            continue;
        }
        kv_check_keys(kv, {"id", "component", "delta", "cost"}, strictness, filename, diags);
        Mitigation m;
        m.mitId = kv_require(kv, "id", filename);
        if (!seen.insert(m.mitId).second)
            throw ParseError(filename, kv.line, "duplicate mitigation id \"" + m.mitId + "\"");
        m.componentId = kv_require(kv, "component", filename);
        const std::uint64_t delta = kv_uint(kv, "delta", filename);
        if (delta < 1 || delta > std::numeric_limits<int>::max())
            throw ParseError(filename, kv.line, "delta must be a positive integer");
        m.coaDelta = static_cast<int>(delta);
        if (kv.has("cost"))
            m.cost = static_cast<long long>(kv_uint(kv, "cost", filename));
        catalog.push_back(std::move(m));
    }
    return catalog;
}

inline std::vector<Mitigation> load_mitigation_catalog(const std::filesystem::path& path,
                                                       Strictness strictness = Strictness::Strict,
                                                       std::vector<Diagnostic>* diags = nullptr) {
    return parse_mitigation_catalog(read_text_file(path), path.string(), strictness, diags);
}

inline std::string serialize_mitigation_catalog(std::vector<Mitigation> catalog) {
    std::sort(catalog.begin(), catalog.end(),
              [](const Mitigation& a, const Mitigation& b) { return a.mitId < b.mitId; });
    std::string out;
    for (const auto& m : catalog) {
        std::vector<std::pair<std::string, std::string>> attrs{
            {"id", m.mitId}, {"component", m.componentId}, {"delta", std::to_string(m.coaDelta)}};
        if (m.cost)
            attrs.emplace_back("cost", std::to_string(*m.cost));
        out += format_kv_line("mitigation", attrs);
    }
    return out;
}

/// New graph with each selected mitigation's delta added to its
/// component's COA; deltas on the same component stack additively. The
/// input graph is untouched, and callers recompute every downstream
/// quantity from the result rather than patching old ones.
inline AttackGraph apply_mitigations(const AttackGraph& g, const std::vector<Mitigation>& selected) {
    AttackGraph out = g;
    for (const auto& m : selected) {
        auto it = out.nodes.find(m.componentId);
        if (it == out.nodes.end())
            throw UnknownComponent("mitigation \"" + m.mitId + "\" targets unknown component \"" + m.componentId +
                                   "\"");
        if (it->second.isEntry)
            throw UnknownComponent("mitigation \"" + m.mitId + "\" targets entry interface \"" + m.componentId +
                                   "\"; only components can be hardened");
        it->second.coa += m.coaDelta;
    }
    return out;
}

/// Fill in missing costs per the policy: speculative pricing from the
/// protected component's current COA, or dropping the entry. Throws
/// UnknownComponent if a catalog entry names a component outside the
/// graph.
inline std::vector<Mitigation> resolve_mitigation_costs(const AttackGraph& g, const std::vector<Mitigation>& catalog,
                                                        long long speculativeK = 1000,
                                                        MissingMitigationPolicy policy =
                                                            MissingMitigationPolicy::Speculative) {
    std::vector<Mitigation> resolved;
    for (const auto& m : catalog) {
        auto it = g.nodes.find(m.componentId);
        if (it == g.nodes.end())
            throw UnknownComponent("mitigation \"" + m.mitId + "\" targets unknown component \"" + m.componentId +
                                   "\"");
        if (it->second.isEntry)
            throw UnknownComponent("mitigation \"" + m.mitId + "\" targets entry interface \"" + m.componentId +
                                   "\"; only components can be hardened");
        Mitigation copy = m;
        if (!copy.cost) {
            if (policy == MissingMitigationPolicy::Exclude)
                continue;
            copy.cost = speculative_cost(it->second.coa, speculativeK);
        }
        resolved.push_back(std::move(copy));
    }
    return resolved;
}

struct MitigationVariantOutcome {
    std::string variantId;
    std::optional<int> beforeCoa; // absent = no path
    std::optional<int> afterCoa;
    bool pass = false;
};

struct MitigationPlan {
    std::vector<std::string> selected; // sorted mitIds
    long long totalCost = 0;
    std::vector<MitigationVariantOutcome> perVariant;
};

struct OptimizeOptions {
    long long speculativeK = 1000;
    MissingMitigationPolicy missingCostPolicy = MissingMitigationPolicy::Speculative;
    std::size_t maxCatalog = 24; // exact-search bound
};

/// Minimum-total-cost subset of the catalog such that every plausible
/// variant's cheapest path reaches the MSV (or loses its path). Exact
/// branch-and-bound: candidates ordered by (cost, mitId), include-branch
/// first, pruned by cost bound and by infeasibility of
/// current-plus-all-remaining (COA raises are monotone, so that bound is
/// admissible). Ties: fewer mitigations, then lexicographic id set.
inline MitigationPlan optimize_mitigations(const AttackGraph& g, const std::vector<Mitigation>& catalog, int msv,
                                           const std::vector<std::string>& plausibleVariants, bool invariantOnly,
                                           const OptimizeOptions& opts = {}) {
    if (plausibleVariants.empty())
        throw EmptyVariantSet("mitigation optimization needs at least one plausible variant");
    if (msv < 1)
        throw OutOfRange("msv must be >= 1, got " + std::to_string(msv));
    {
        std::set<std::string> ids;
        for (const auto& m : catalog)
            if (!ids.insert(m.mitId).second)
                throw ValidationError("duplicate mitigation id \"" + m.mitId + "\"");
    }

    std::vector<Mitigation> candidates =
        resolve_mitigation_costs(g, catalog, opts.speculativeK, opts.missingCostPolicy);
    if (invariantOnly) {
        std::vector<Mitigation> kept;
        for (auto& m : candidates) {
            const AttackNode& node = g.nodes.at(m.componentId);
            bool invariant = true;
            for (const auto& v : plausibleVariants)
                if (!node.variantLabels.count(v)) {
                    invariant = false;
                    break;
                }
            if (invariant)
                kept.push_back(std::move(m));
        }
        candidates = std::move(kept);
    }
    if (opts.maxCatalog > 63)
        throw OutOfRange("exact-search bound cannot exceed 63");
    if (candidates.size() > opts.maxCatalog)
        throw CatalogTooLarge("catalog has " + std::to_string(candidates.size()) +
                              " candidate mitigations; exact search is bounded at " +
                              std::to_string(opts.maxCatalog));
    std::sort(candidates.begin(), candidates.end(), [](const Mitigation& a, const Mitigation& b) {
        if (*a.cost != *b.cost)
            return *a.cost < *b.cost;
        return a.mitId < b.mitId;
    });

    const std::size_t n = candidates.size();
    std::map<std::uint64_t, bool> feasibleMemo;
    auto feasible = [&](std::uint64_t mask) {
        auto memo = feasibleMemo.find(mask);
        if (memo != feasibleMemo.end())
            return memo->second;
        std::vector<Mitigation> subset;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1ull << i))
                subset.push_back(candidates[i]);
        AttackGraph mitigated = apply_mitigations(g, subset);
        bool ok = true;
        for (const auto& v : plausibleVariants) {
            auto vec = try_cheapest_path(mitigated, v);
            if (vec && vec->totalCoa < msv) {
                ok = false;
                break;
            }
        }
        feasibleMemo.emplace(mask, ok);
        return ok;
    };

    const std::uint64_t fullMask = n == 64 ? ~0ull : (1ull << n) - 1ull;
    if (!feasible(fullMask))
        throw Infeasible("no mitigation subset raises every plausible variant to msv " + std::to_string(msv));

    struct Best {
        long long cost = std::numeric_limits<long long>::max();
        std::size_t count = 0;
        std::vector<std::string> ids; // sorted
        std::uint64_t mask = 0;
        bool found = false;
    } best;

    auto consider = [&](std::uint64_t mask, long long cost) {
        std::vector<std::string> ids;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1ull << i)) {
                ids.push_back(candidates[i].mitId);
                ++count;
            }
        std::sort(ids.begin(), ids.end());
        if (!best.found || cost < best.cost || (cost == best.cost && count < best.count) ||
            (cost == best.cost && count == best.count && ids < best.ids)) {
            best = {cost, count, std::move(ids), mask, true};
        }
    };

    auto rest_mask = [&](std::size_t i) {
        std::uint64_t rest = 0;
        for (std::size_t j = i; j < n; ++j)
            rest |= (1ull << j);
        return rest;
    };

    // Recursive lambda via explicit stack-free structure: plain recursion.
    struct Search {
        const std::vector<Mitigation>& candidates;
        decltype(feasible)& isFeasible;
        decltype(consider)& record;
        decltype(rest_mask)& rest;
        Best& best;
        std::size_t n;

        void run(std::size_t i, std::uint64_t mask, long long cost) {
            if (best.found && cost > best.cost)
                return;
            if (isFeasible(mask)) {
                record(mask, cost);
                return; // supersets only cost more or tie with more entries
            }
            if (i == n)
                return;
            if (!isFeasible(mask | rest(i)))
                return; // even taking everything left cannot fix it
            run(i + 1, mask | (1ull << i), cost + *candidates[i].cost);
            run(i + 1, mask, cost);
        }
    };
    Search search{candidates, feasible, consider, rest_mask, best, n};
    search.run(0, 0, 0);

    MitigationPlan plan;
    plan.selected = best.ids;
    plan.totalCost = best.cost;
    std::vector<Mitigation> selectedMits;
    for (std::size_t i = 0; i < n; ++i)
        if (best.mask & (1ull << i))
            selectedMits.push_back(candidates[i]);
    AttackGraph mitigated = apply_mitigations(g, selectedMits);
    for (const auto& v : plausibleVariants) {
        MitigationVariantOutcome outcome;
        outcome.variantId = v;
        if (auto vec = try_cheapest_path(g, v))
            outcome.beforeCoa = vec->totalCoa;
        if (auto vec = try_cheapest_path(mitigated, v)) {
            outcome.afterCoa = vec->totalCoa;
            outcome.pass = vec->totalCoa >= msv;
        } else {
            outcome.pass = true;
        }
        plan.perVariant.push_back(std::move(outcome));
    }
    return plan;
}

} // namespace autosec
