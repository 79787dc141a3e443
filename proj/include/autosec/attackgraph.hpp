// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "autosec/fingerprint.hpp"
#include "autosec/model.hpp"
#include "autosec/vulndb.hpp"

// Superposed, cost-annotated attack graph over all candidate variants:
// cheapest attack paths, exhaustive below-threshold path enumeration,
// difference-set prioritization, gate verdicts, evidence-driven variant
// exclusion, and DOT export. Every ordering is total, so identical
// inputs produce identical output bytes.

namespace autosec {

struct AttackNode {
    std::string elementId;
    int coa = 1;         // >= 1 for components; 0 for entry interfaces
    bool isEntry = false;
    std::set<std::string> variantLabels; // non-empty
    std::vector<std::string> matchedVulnIds;
    std::map<std::string, ProductHint> hintsByVariant;              // components only
    std::map<std::string, std::set<std::string>> segmentsByVariant; // components only
};

struct AttackEdge {
    std::string from;
    std::string to;
    std::set<std::string> variantLabels; // variants in which the adjacency exists
};

/// Directed graph: both directions for every component adjacency, entry
/// interfaces outgoing-only. Edges are labeled per-variant, so the
/// restriction to one variant's labels is exactly that variant's own
/// attack graph.
struct AttackGraph {
    std::map<std::string, AttackNode> nodes; // keyed by elementId
    std::vector<AttackEdge> edges;           // sorted by (from, to)
    std::set<std::string> entryNodeIds;
    std::string targetNodeId;
    std::vector<std::string> variantIds; // declared order
    std::map<std::string, std::vector<std::size_t>> outEdges;

    void reindex() {
        std::sort(edges.begin(), edges.end(), [](const AttackEdge& a, const AttackEdge& b) {
            if (a.from != b.from)
                return a.from < b.from;
            return a.to < b.to;
        });
        outEdges.clear();
        for (std::size_t i = 0; i < edges.size(); ++i)
            outEdges[edges[i].from].push_back(i);
    }
};

struct AttackVector {
    std::vector<std::string> orderedElementIds; // entry first, target last, simple
    int totalCoa = 0;                           // entry nodes cost 0
    std::set<std::string> feasibleVariants;     // intersection of element labels

    bool operator==(const AttackVector&) const = default;
};

struct TestSeries {
    std::string targetId;
    int msv = 1;
    std::vector<AttackVector> vectors; // prioritized order
    bool truncated = false;            // some variant hit the enumeration cap
};

inline AttackGraph build_superposed_graph(const VariantSet& vs, const AnnotationMap& annotations,
                                          const std::string& target, int defaultCoa = 100) {
    if (vs.variants.empty())
        throw EmptyVariantSet("variant set must not be empty");
    if (defaultCoa < 1)
        throw OutOfRange("default coa must be >= 1, got " + std::to_string(defaultCoa));
    validate_variant_set(vs);

    AttackGraph g;
    for (const auto& v : vs.variants)
        g.variantIds.push_back(v.modelId);

    for (const auto& v : vs.variants) {
        for (const auto& c : v.components) {
            AttackNode& node = g.nodes[c.id];
            node.elementId = c.id;
            node.variantLabels.insert(v.modelId);
            if (c.productHint)
                node.hintsByVariant.emplace(v.modelId, *c.productHint);
            node.segmentsByVariant.emplace(v.modelId, c.segmentIds);
        }
        for (const auto& e : v.entryInterfaces) {
            AttackNode& node = g.nodes[e.id];
            node.elementId = e.id;
            node.isEntry = true;
            node.coa = 0;
            node.variantLabels.insert(v.modelId);
            g.entryNodeIds.insert(e.id);
        }
    }
    for (auto& [id, node] : g.nodes) {
        if (node.isEntry)
            continue;
        auto it = annotations.find(id);
        if (it != annotations.end() && !it->second.empty()) {
            node.coa = it->second.front().coa; // lists sorted by (coa, vulnId)
            for (const auto& m : it->second)
                node.matchedVulnIds.push_back(m.vulnId);
        } else {
            node.coa = defaultCoa;
        }
    }

    auto targetIt = g.nodes.find(target);
    if (targetIt == g.nodes.end() || targetIt->second.isEntry)
        throw TargetUnknown("target \"" + target + "\" is not a component of any variant");
    g.targetNodeId = target;

    std::map<std::pair<std::string, std::string>, std::set<std::string>> edgeLabels;
    for (const auto& v : vs.variants) {
        Adjacency adj = derive_adjacency(v);
        for (const auto& [a, b] : adj.edges) {
            edgeLabels[{a, b}].insert(v.modelId);
            edgeLabels[{b, a}].insert(v.modelId);
        }
        for (const auto& [entry, host] : adj.entryAttachments)
            edgeLabels[{entry, host}].insert(v.modelId);
    }
    for (auto& [pair, labels] : edgeLabels)
        g.edges.push_back({pair.first, pair.second, std::move(labels)});
    g.reindex();
    return g;
}

namespace detail {

/// Search label: (cost, length, lexicographic path) is a total order
/// whose extension by any further hop is order-preserving, so a
/// single-settle Dijkstra yields the unique minimum per node.
struct SearchLabel {
    long long cost = 0;
    std::vector<std::string> path; // path[0] == "" marks the virtual super-source

    friend bool operator<(const SearchLabel& a, const SearchLabel& b) {
        if (a.cost != b.cost)
            return a.cost < b.cost;
        if (a.path.size() != b.path.size())
            return a.path.size() < b.path.size();
        return a.path < b.path;
    }
};

struct LabelGreater {
    bool operator()(const SearchLabel& a, const SearchLabel& b) const { return b < a; }
};

/// Cheapest path to the target within one variant's labels, avoiding
/// banned nodes/edges. `source` == "" starts from every entry node
/// (edges ("", entry) can be banned); otherwise the search starts at
/// `source` whose own cost is NOT charged (the caller accounts for it).
inline std::optional<SearchLabel> restricted_search(const AttackGraph& g, const std::string& variantId,
                                                    const std::string& source,
                                                    const std::set<std::string>& bannedNodes,
                                                    const std::set<std::pair<std::string, std::string>>& bannedEdges) {
    std::priority_queue<SearchLabel, std::vector<SearchLabel>, LabelGreater> pq;

    auto node_ok = [&](const std::string& id) {
        auto it = g.nodes.find(id);
        return it != g.nodes.end() && it->second.variantLabels.count(variantId) && !bannedNodes.count(id);
    };
    if (source.empty()) {
        for (const auto& e : g.entryNodeIds)
            if (node_ok(e) && !bannedEdges.count({"", e}))
                pq.push({0, {"", e}}); // entry nodes cost 0
    } else {
        if (!node_ok(source))
            return std::nullopt;
        pq.push({0, {source}});
    }

    std::set<std::string> settled;
    while (!pq.empty()) {
        SearchLabel label = pq.top();
        pq.pop();
        const std::string& u = label.path.back();
        if (!settled.insert(u).second)
            continue;
        if (u == g.targetNodeId)
            return label;
        auto outIt = g.outEdges.find(u);
        if (outIt == g.outEdges.end())
            continue;
        for (std::size_t ei : outIt->second) {
            const AttackEdge& edge = g.edges[ei];
            if (!edge.variantLabels.count(variantId))
                continue;
            const std::string& w = edge.to;
            if (settled.count(w) || !node_ok(w) || bannedEdges.count({u, w}))
                continue;
            SearchLabel next;
            next.cost = label.cost + g.nodes.at(w).coa;
            next.path = label.path;
            next.path.push_back(w);
            pq.push(std::move(next));
        }
    }
    return std::nullopt;
}

inline AttackVector vector_from_path(const AttackGraph& g, const std::vector<std::string>& path) {
    AttackVector vec;
    for (const auto& id : path) {
        if (id.empty())
            continue; // virtual super-source
        vec.orderedElementIds.push_back(id);
        vec.totalCoa += g.nodes.at(id).coa;
        const auto& labels = g.nodes.at(id).variantLabels;
        if (vec.orderedElementIds.size() == 1) {
            vec.feasibleVariants = labels;
        } else {
            std::set<std::string> inter;
            std::set_intersection(vec.feasibleVariants.begin(), vec.feasibleVariants.end(), labels.begin(),
                                  labels.end(), std::inserter(inter, inter.begin()));
            vec.feasibleVariants = std::move(inter);
        }
    }
    return vec;
}

} // namespace detail

inline void require_known_variant(const AttackGraph& g, const std::string& variantId) {
    if (std::find(g.variantIds.begin(), g.variantIds.end(), variantId) == g.variantIds.end())
        throw ValidationError("unknown variant \"" + variantId + "\"");
}

inline std::optional<AttackVector> try_cheapest_path(const AttackGraph& g, const std::string& variantId) {
    require_known_variant(g, variantId);
    auto label = detail::restricted_search(g, variantId, "", {}, {});
    if (!label)
        return std::nullopt;
    return detail::vector_from_path(g, label->path);
}

inline AttackVector cheapest_path(const AttackGraph& g, const std::string& variantId) {
    auto vec = try_cheapest_path(g, variantId);
    if (!vec)
        throw NoPath("no entry-to-target path for variant \"" + variantId + "\"");
    return *vec;
}

struct EnumerationResult {
    std::vector<AttackVector> vectors; // ascending (totalCoa, length, ids)
    bool truncated = false;            // true only if a further below-threshold path was cut off
};

/// Yen-style loopless K-cheapest enumeration with a strict cost cutoff.
/// All simple entry-to-target paths with totalCoa < msv, capped at kmax
/// paths; `truncated` reports whether the cap hid at least one more
/// qualifying path.
inline EnumerationResult enumerate_below_msv(const AttackGraph& g, const std::string& variantId, int msv,
                                             std::size_t kmax = 1000) {
    require_known_variant(g, variantId);
    if (msv < 1)
        throw OutOfRange("msv must be >= 1, got " + std::to_string(msv));
    if (kmax < 1)
        throw OutOfRange("kmax must be >= 1");

    EnumerationResult result;
    auto first = detail::restricted_search(g, variantId, "", {}, {});
    if (!first || first->cost >= msv)
        return result;

    std::vector<detail::SearchLabel> accepted{*first};
    std::set<std::vector<std::string>> acceptedPaths{first->path};
    std::set<detail::SearchLabel> candidates;
    std::set<std::vector<std::string>> candidatePaths;

    while (true) {
        const detail::SearchLabel& prev = accepted.back();
        for (std::size_t i = 0; i + 1 < prev.path.size(); ++i) {
            std::vector<std::string> root(prev.path.begin(), prev.path.begin() + static_cast<long>(i) + 1);
            std::set<std::pair<std::string, std::string>> bannedEdges;
            for (const auto& a : accepted)
                if (a.path.size() > i + 1 && std::equal(root.begin(), root.end(), a.path.begin()))
                    bannedEdges.insert({a.path[i], a.path[i + 1]});
            std::set<std::string> bannedNodes;
            for (std::size_t j = 0; j + 1 <= i; ++j)
                if (!root[j].empty())
                    bannedNodes.insert(root[j]);

            auto spur = detail::restricted_search(g, variantId, root[i], bannedNodes, bannedEdges);
            if (!spur)
                continue;
            detail::SearchLabel candidate;
            candidate.path = root;
            candidate.path.insert(candidate.path.end(), spur->path.begin() + 1, spur->path.end());
            candidate.cost = 0;
            for (const auto& id : candidate.path)
                if (!id.empty())
                    candidate.cost += g.nodes.at(id).coa;
            if (acceptedPaths.count(candidate.path) || candidatePaths.count(candidate.path))
                continue;
            candidatePaths.insert(candidate.path);
            candidates.insert(std::move(candidate));
        }

        if (candidates.empty())
            break;
        detail::SearchLabel best = *candidates.begin();
        candidates.erase(candidates.begin());
        candidatePaths.erase(best.path);
        if (best.cost >= msv)
            break; // candidates only get more expensive from here
        if (accepted.size() == kmax) {
            result.truncated = true;
            break;
        }
        acceptedPaths.insert(best.path);
        accepted.push_back(std::move(best));
    }

    for (const auto& label : accepted)
        result.vectors.push_back(detail::vector_from_path(g, label.path));
    std::sort(result.vectors.begin(), result.vectors.end(), [](const AttackVector& a, const AttackVector& b) {
        if (a.totalCoa != b.totalCoa)
            return a.totalCoa < b.totalCoa;
        if (a.orderedElementIds.size() != b.orderedElementIds.size())
            return a.orderedElementIds.size() < b.orderedElementIds.size();
        return a.orderedElementIds < b.orderedElementIds;
    });
    return result;
}

/// Stable priority: vectors touching the difference set first, cost
/// order preserved within each class.
inline std::vector<AttackVector> prioritize(std::vector<AttackVector> vectors, const std::set<std::string>& diffSet) {
    auto touches = [&](const AttackVector& v) {
        for (const auto& id : v.orderedElementIds)
            if (diffSet.count(id))
                return 1;
        return 0;
    };
    std::stable_sort(vectors.begin(), vectors.end(), [&](const AttackVector& a, const AttackVector& b) {
        const int ta = touches(a), tb = touches(b);
        if (ta != tb)
            return ta > tb;
        if (a.totalCoa != b.totalCoa)
            return a.totalCoa < b.totalCoa;
        if (a.orderedElementIds.size() != b.orderedElementIds.size())
            return a.orderedElementIds.size() < b.orderedElementIds.size();
        return a.orderedElementIds < b.orderedElementIds;
    });
    return vectors;
}

/// Per-variant enumeration, merged and deduplicated by element sequence,
/// then prioritized by the difference set.
inline TestSeries build_test_series(const AttackGraph& g, int msv, const std::set<std::string>& diffSet,
                                    std::size_t kmax = 1000) {
    TestSeries series;
    series.targetId = g.targetNodeId;
    series.msv = msv;
    std::set<std::vector<std::string>> seen;
    for (const auto& variantId : g.variantIds) {
        EnumerationResult per = enumerate_below_msv(g, variantId, msv, kmax);
        series.truncated = series.truncated || per.truncated;
        for (auto& vec : per.vectors)
            if (seen.insert(vec.orderedElementIds).second)
                series.vectors.push_back(std::move(vec));
    }
    series.vectors = prioritize(std::move(series.vectors), diffSet);
    return series;
}

struct VariantGate {
    std::string variantId;
    std::optional<int> cheapestCoa; // absent = no path
    bool pass = false;
};

struct GateResult {
    std::vector<VariantGate> perVariant;
    bool overallPass = false;
};

/// A variant passes statically iff its cheapest path costs >= msv or no
/// path exists. Strict comparison: a cheapest path equal to the MSV
/// passes.
inline GateResult gate_verdict(const AttackGraph& g, int msv, const std::vector<std::string>& plausibleVariants) {
    if (plausibleVariants.empty())
        throw EmptyVariantSet("gate verdict needs at least one plausible variant");
    if (msv < 1)
        throw OutOfRange("msv must be >= 1, got " + std::to_string(msv));
    GateResult result;
    result.overallPass = true;
    for (const auto& variantId : plausibleVariants) {
        VariantGate gate;
        gate.variantId = variantId;
        if (auto vec = try_cheapest_path(g, variantId)) {
            gate.cheapestCoa = vec->totalCoa;
            gate.pass = vec->totalCoa >= msv;
        } else {
            gate.pass = true;
        }
        result.overallPass = result.overallPass && gate.pass;
        result.perVariant.push_back(std::move(gate));
    }
    return result;
}

struct ExclusionRecord {
    std::string variantId;
    std::string reason;
    std::size_t evidenceIndex = 0; // index into the evidence list passed in
};

struct ExclusionResult {
    AttackGraph graph;                            // pruned copy
    std::vector<std::string> excludedVariantIds;  // in exclusion order
    std::vector<ExclusionRecord> records;
};

namespace detail {

inline bool identity_contradicts(const ProductHint& observed, const ProductHint& hint) {
    if (lower_ascii(observed.vendor) != lower_ascii(hint.vendor))
        return true;
    if (lower_ascii(observed.product) != lower_ascii(hint.product))
        return true;
    if (observed.version && hint.version && observed.version->compare(*hint.version) != 0)
        return true;
    return false;
}

} // namespace detail

/// Exclusion rules, applied to a fixed point (an exclusion can make
/// another element variant-exclusive and thus actionable):
///   1. ElementObserved(e): variants lacking e are excluded.
///   2. ElementAbsent(e): a variant is excluded if e is exclusive to it
///      among the still-active variants and e was verifiable -- an entry
///      interface, or a component on a confirmed-reachable segment (one
///      that carries an observed component in that variant).
///   3. IdentityMatch(e) with confidence >= theta: variants whose hint
///      for e names a different vendor/product (case-insensitive) or a
///      numerically different version are excluded.
inline ExclusionResult exclude_variants(const AttackGraph& g, const std::vector<Evidence>& evidence,
                                        double identityTheta = 0.8) {
    ExclusionResult result;
    std::vector<std::string> active = g.variantIds;
    auto exclude = [&](const std::string& v, const std::string& reason, std::size_t evidenceIndex) {
        active.erase(std::remove(active.begin(), active.end(), v), active.end());
        result.excludedVariantIds.push_back(v);
        result.records.push_back({v, reason, evidenceIndex});
    };

    bool changed = true;
    while (changed) {
        changed = false;

        // Segments confirmed reachable per variant: segments carrying an
        // observed component.
        std::map<std::string, std::set<std::string>> reachableSegments;
        for (const auto& ev : evidence) {
            if (ev.kind != EvidenceKind::ElementObserved)
                continue;
            auto nodeIt = g.nodes.find(ev.subjectId);
            if (nodeIt == g.nodes.end())
                continue;
            for (const auto& [variantId, segments] : nodeIt->second.segmentsByVariant)
                reachableSegments[variantId].insert(segments.begin(), segments.end());
        }

        for (std::size_t i = 0; i < evidence.size() && !changed; ++i) {
            const Evidence& ev = evidence[i];
            auto nodeIt = g.nodes.find(ev.subjectId);
            if (nodeIt == g.nodes.end())
                continue; // evidence about elements outside the model space
            const AttackNode& node = nodeIt->second;

            if (ev.kind == EvidenceKind::ElementObserved) {
                for (const auto& v : std::vector<std::string>(active)) {
                    if (!node.variantLabels.count(v)) {
                        exclude(v, "variant \"" + v + "\" lacks observed element \"" + ev.subjectId + "\"", i);
                        changed = true;
                    }
                }
            } else if (ev.kind == EvidenceKind::ElementAbsent) {
                for (const auto& v : std::vector<std::string>(active)) {
                    if (!node.variantLabels.count(v))
                        continue;
                    bool exclusive = true;
                    for (const auto& other : active)
                        if (other != v && node.variantLabels.count(other)) {
                            exclusive = false;
                            break;
                        }
                    if (!exclusive)
                        continue;
                    bool verifiable = node.isEntry;
                    if (!verifiable) {
                        auto segIt = node.segmentsByVariant.find(v);
                        if (segIt != node.segmentsByVariant.end()) {
                            const auto& reachable = reachableSegments[v];
                            for (const auto& s : segIt->second)
                                if (reachable.count(s)) {
                                    verifiable = true;
                                    break;
                                }
                        }
                    }
                    if (verifiable) {
                        exclude(v,
                                "element \"" + ev.subjectId + "\" is exclusive to variant \"" + v +
                                    "\" but was absent where it should be reachable",
                                i);
                        changed = true;
                    }
                }
            } else if (ev.kind == EvidenceKind::IdentityMatch) {
                if (!ev.identity || ev.confidence < identityTheta)
                    continue;
                for (const auto& v : std::vector<std::string>(active)) {
                    auto hintIt = node.hintsByVariant.find(v);
                    if (hintIt == node.hintsByVariant.end())
                        continue;
                    if (detail::identity_contradicts(*ev.identity, hintIt->second)) {
                        exclude(v,
                                "identity observed for \"" + ev.subjectId + "\" contradicts variant \"" + v +
                                    "\" (expected " + hintIt->second.vendor + ":" + hintIt->second.product + ")",
                                i);
                        changed = true;
                    }
                }
            }
        }
    }

    // Prune excluded labels; drop empty nodes and edges.
    std::set<std::string> activeSet(active.begin(), active.end());
    AttackGraph pruned;
    pruned.targetNodeId = g.targetNodeId;
    for (const auto& v : g.variantIds)
        if (activeSet.count(v))
            pruned.variantIds.push_back(v);
    for (const auto& [id, node] : g.nodes) {
        AttackNode copy = node;
        std::set<std::string> labels;
        for (const auto& v : copy.variantLabels)
            if (activeSet.count(v))
                labels.insert(v);
        if (labels.empty())
            continue;
        copy.variantLabels = std::move(labels);
        for (auto it = copy.hintsByVariant.begin(); it != copy.hintsByVariant.end();)
            it = activeSet.count(it->first) ? std::next(it) : copy.hintsByVariant.erase(it);
        for (auto it = copy.segmentsByVariant.begin(); it != copy.segmentsByVariant.end();)
            it = activeSet.count(it->first) ? std::next(it) : copy.segmentsByVariant.erase(it);
        if (copy.isEntry)
            pruned.entryNodeIds.insert(id);
        pruned.nodes.emplace(id, std::move(copy));
    }
    for (const auto& edge : g.edges) {
        std::set<std::string> labels;
        for (const auto& v : edge.variantLabels)
            if (activeSet.count(v))
                labels.insert(v);
        if (labels.empty() || !pruned.nodes.count(edge.from) || !pruned.nodes.count(edge.to))
            continue;
        pruned.edges.push_back({edge.from, edge.to, std::move(labels)});
    }
    pruned.reindex();
    if (!pruned.nodes.count(pruned.targetNodeId))
        pruned.targetNodeId.clear();
    result.graph = std::move(pruned);
    return result;
}

/// Deterministic Graphviz rendering: nodes sorted by id, edges by
/// (from, to); entry interfaces are diamonds, the target a double
/// circle. Identical graphs yield identical bytes.
inline std::string export_dot(const AttackGraph& g) {
    auto label_set = [](const std::set<std::string>& labels) {
        std::string out = "{";
        bool first = true;
        for (const auto& v : labels) {
            if (!first)
                out += ',';
            out += v;
            first = false;
        }
        out += '}';
        return out;
    };
    std::string out = "digraph attackgraph {\n  rankdir=LR;\n";
    for (const auto& [id, node] : g.nodes) {
        out += "  \"" + id + "\" [label=\"" + id + "\\n" + std::to_string(node.coa) + "\\n" +
               label_set(node.variantLabels) + "\"";
        if (node.isEntry)
            out += " shape=diamond";
        else if (id == g.targetNodeId)
            out += " shape=doublecircle";
        out += "];\n";
    }
    for (const auto& edge : g.edges)
        out += "  \"" + edge.from + "\" -> \"" + edge.to + "\" [label=\"" + label_set(edge.variantLabels) + "\"];\n";
    out += "}\n";
    return out;
}

} // namespace autosec
