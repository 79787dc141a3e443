// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autosec/keyvalue.hpp"
#include "autosec/version.hpp"

// System-under-test topology models and model variants.
//
// On-disk format (.sutm), one declaration per line:
//
//   model     id=<model id>
//   component id=<id> kind=<ecu|gateway|sensor|infotainment|external-interface-host>
//             [segments=<seg,seg,...>] [vendor=<v> product=<p> [version=<dotted>]]
//   segment   id=<id> bus=<can|lin|flexray|automotive-ethernet|wireless|diagnostic>
//   entry     id=<id> kind=<bluetooth|wifi|usb|obd2|v2x|cellular|rfid> host=<component id>
//   target    id=<component id>
//
// Segment membership is declared on the component side only; a segment's
// member set is derived during validation. Element ids (components,
// segments, entry interfaces) share one namespace and must be unique
// within a model.

namespace autosec {

enum class ComponentKind { Ecu, Gateway, Sensor, Infotainment, ExternalInterfaceHost };
enum class BusKind { Can, Lin, Flexray, AutomotiveEthernet, Wireless, Diagnostic };
enum class InterfaceKind { Bluetooth, Wifi, Usb, ObdII, V2x, Cellular, Rfid };

namespace detail {

inline const std::vector<std::pair<ComponentKind, std::string>>& component_kind_names() {
    static const std::vector<std::pair<ComponentKind, std::string>> names = {
        {ComponentKind::Ecu, "ecu"},
        {ComponentKind::Gateway, "gateway"},
        {ComponentKind::Sensor, "sensor"},
        {ComponentKind::Infotainment, "infotainment"},
        {ComponentKind::ExternalInterfaceHost, "external-interface-host"},
    };
    return names;
}

inline const std::vector<std::pair<BusKind, std::string>>& bus_kind_names() {
    static const std::vector<std::pair<BusKind, std::string>> names = {
        {BusKind::Can, "can"},
        {BusKind::Lin, "lin"},
        {BusKind::Flexray, "flexray"},
        {BusKind::AutomotiveEthernet, "automotive-ethernet"},
        {BusKind::Wireless, "wireless"},
        {BusKind::Diagnostic, "diagnostic"},
    };
    return names;
}

inline const std::vector<std::pair<InterfaceKind, std::string>>& interface_kind_names() {
    static const std::vector<std::pair<InterfaceKind, std::string>> names = {
        {InterfaceKind::Bluetooth, "bluetooth"},
        {InterfaceKind::Wifi, "wifi"},
        {InterfaceKind::Usb, "usb"},
        {InterfaceKind::ObdII, "obd2"},
        {InterfaceKind::V2x, "v2x"},
        {InterfaceKind::Cellular, "cellular"},
        {InterfaceKind::Rfid, "rfid"},
    };
    return names;
}

template <typename E>
std::string enum_name(E value, const std::vector<std::pair<E, std::string>>& table) {
    for (const auto& [e, name] : table)
        if (e == value)
            return name;
    return "?";
}

template <typename E>
std::optional<E> enum_from_name(std::string_view name, const std::vector<std::pair<E, std::string>>& table) {
    for (const auto& [e, n] : table)
        if (n == name)
            return e;
    return std::nullopt;
}

} // namespace detail

inline std::string to_string(ComponentKind k) { return detail::enum_name(k, detail::component_kind_names()); }
inline std::string to_string(BusKind k) { return detail::enum_name(k, detail::bus_kind_names()); }
inline std::string to_string(InterfaceKind k) { return detail::enum_name(k, detail::interface_kind_names()); }

/// Component identification guess: who built it and which version runs on it.
struct ProductHint {
    std::string vendor;
    std::string product;
    std::optional<Version> version;

    bool operator==(const ProductHint&) const = default;
};

struct Component {
    std::string id;
    ComponentKind kind = ComponentKind::Ecu;
    std::optional<ProductHint> productHint;
    std::set<std::string> segmentIds;

    bool operator==(const Component&) const = default;
};

struct NetworkSegment {
    std::string id;
    BusKind busKind = BusKind::Can;
    std::set<std::string> memberIds; // derived from component declarations

    bool operator==(const NetworkSegment&) const = default;
};

struct EntryInterface {
    std::string id;
    std::string hostComponentId;
    InterfaceKind interfaceKind = InterfaceKind::ObdII;

    bool operator==(const EntryInterface&) const = default;
};

struct SutModel {
    std::string modelId;
    std::vector<Component> components;
    std::vector<NetworkSegment> segments;
    std::vector<EntryInterface> entryInterfaces;
    std::set<std::string> targetCandidates;

    bool operator==(const SutModel&) const = default;

    const Component* find_component(std::string_view id) const {
        for (const auto& c : components)
            if (c.id == id)
                return &c;
        return nullptr;
    }
    const NetworkSegment* find_segment(std::string_view id) const {
        for (const auto& s : segments)
            if (s.id == id)
                return &s;
        return nullptr;
    }
    const EntryInterface* find_entry(std::string_view id) const {
        for (const auto& e : entryInterfaces)
            if (e.id == id)
                return &e;
        return nullptr;
    }
};

/// Candidate models for one SUT. The variant id of each member is its
/// modelId; element identity across variants is by element id.
struct VariantSet {
    std::vector<SutModel> variants;

    const SutModel* find_variant(std::string_view variantId) const {
        for (const auto& v : variants)
            if (v.modelId == variantId)
                return &v;
        return nullptr;
    }
};

/// All element ids of a model (components, segments, entry interfaces).
inline std::set<std::string> element_ids(const SutModel& m) {
    std::set<std::string> ids;
    for (const auto& c : m.components)
        ids.insert(c.id);
    for (const auto& s : m.segments)
        ids.insert(s.id);
    for (const auto& e : m.entryInterfaces)
        ids.insert(e.id);
    return ids;
}

/// Checks every model invariant and derives segment member sets.
/// Throws ValidationError naming the offending element. A model that
/// passes is internally consistent: validation is all-or-nothing.
inline void validate_model(SutModel& m) {
    if (m.modelId.empty())
        throw ValidationError("model id must not be empty");

    std::map<std::string, std::string> idKinds; // id -> element category
    auto claim = [&](const std::string& id, const std::string& category) {
        if (id.empty())
            throw ValidationError("model \"" + m.modelId + "\": empty " + category + " id");
        auto [it, inserted] = idKinds.emplace(id, category);
        if (!inserted)
            throw ValidationError("model \"" + m.modelId + "\": duplicate element id \"" + id + "\" (declared as " +
                                  it->second + " and " + category + ")");
    };
    for (const auto& c : m.components)
        claim(c.id, "component");
    for (const auto& s : m.segments)
        claim(s.id, "segment");
    for (const auto& e : m.entryInterfaces)
        claim(e.id, "entry interface");

    for (auto& s : m.segments)
        s.memberIds.clear();
    for (const auto& c : m.components) {
        for (const auto& sid : c.segmentIds) {
            auto it = std::find_if(m.segments.begin(), m.segments.end(),
                                   [&](const NetworkSegment& s) { return s.id == sid; });
            if (it == m.segments.end())
                throw ValidationError("model \"" + m.modelId + "\": component \"" + c.id +
                                      "\" references undeclared segment \"" + sid + "\"");
            it->memberIds.insert(c.id);
        }
        if (c.productHint) {
            if (c.productHint->vendor.empty() || c.productHint->product.empty())
                throw ValidationError("model \"" + m.modelId + "\": component \"" + c.id +
                                      "\" has an incomplete product hint (vendor and product required)");
        }
    }
    for (const auto& s : m.segments) {
        if (s.memberIds.empty())
            throw ValidationError("model \"" + m.modelId + "\": segment \"" + s.id + "\" has no members");
    }
    for (const auto& e : m.entryInterfaces) {
        if (!m.find_component(e.hostComponentId))
            throw ValidationError("model \"" + m.modelId + "\": entry interface \"" + e.id +
                                  "\" references unknown host component \"" + e.hostComponentId + "\"");
    }
    if (m.entryInterfaces.empty())
        throw ValidationError("model \"" + m.modelId + "\": at least one entry interface is required");
    for (const auto& t : m.targetCandidates) {
        if (!m.find_component(t))
            throw ValidationError("model \"" + m.modelId + "\": target \"" + t + "\" is not a declared component");
    }
}

/// Parses .sutm text. Unknown keys and keywords are rejected in strict
/// mode and reported as warnings in lax mode.
inline SutModel parse_model(std::string_view text, const std::string& filename = "",
                            Strictness strictness = Strictness::Strict,
                            std::vector<Diagnostic>* diags = nullptr) {
    SutModel m;
    bool sawModelLine = false;
    for (const KvLine& kv : parse_kv_text(text, filename)) {
        if (kv.keyword == "model") {
            kv_check_keys(kv, {"id"}, strictness, filename, diags);
            if (sawModelLine)
                throw ParseError(filename, kv.line, "duplicate \"model\" declaration");
            sawModelLine = true;
            m.modelId = kv_require(kv, "id", filename);
        } else if (kv.keyword == "component") {
            kv_check_keys(kv, {"id", "kind", "segments", "vendor", "product", "version"}, strictness, filename, diags);
            Component c;
            c.id = kv_require(kv, "id", filename);
            const std::string& kindName = kv_require(kv, "kind", filename);
            auto kind = detail::enum_from_name(kindName, detail::component_kind_names());
            if (!kind)
                throw ParseError(filename, kv.line, "unknown component kind \"" + kindName + "\"");
            c.kind = *kind;
            if (const std::string* segs = kv.find("segments")) {
                std::size_t start = 0;
                while (start <= segs->size()) {
                    std::size_t comma = segs->find(',', start);
                    if (comma == std::string::npos)
                        comma = segs->size();
                    std::string sid = segs->substr(start, comma - start);
                    if (sid.empty())
                        throw ParseError(filename, kv.line, "empty segment id in segments list");
                    c.segmentIds.insert(sid);
                    start = comma + 1;
                    if (comma == segs->size())
                        break;
                }
            }
            const std::string* vendor = kv.find("vendor");
            const std::string* product = kv.find("product");
            const std::string* version = kv.find("version");
            if (vendor || product || version) {
                if (!vendor || !product)
                    throw ParseError(filename, kv.line,
                                     "product hint requires both vendor= and product=");
                ProductHint hint;
                hint.vendor = *vendor;
                hint.product = *product;
                if (version) {
                    auto v = Version::try_parse(*version);
                    if (!v)
                        throw ParseError(filename, kv.line, "invalid version \"" + *version + "\"");
                    hint.version = *v;
                }
                c.productHint = std::move(hint);
            }
            m.components.push_back(std::move(c));
        } else if (kv.keyword == "segment") {
            kv_check_keys(kv, {"id", "bus"}, strictness, filename, diags);
            NetworkSegment s;
            s.id = kv_require(kv, "id", filename);
            const std::string& busName = kv_require(kv, "bus", filename);
            auto bus = detail::enum_from_name(busName, detail::bus_kind_names());
            if (!bus)
                throw ParseError(filename, kv.line, "unknown bus kind \"" + busName + "\"");
            s.busKind = *bus;
            m.segments.push_back(std::move(s));
        } else if (kv.keyword == "entry") {
            kv_check_keys(kv, {"id", "kind", "host"}, strictness, filename, diags);
            EntryInterface e;
            e.id = kv_require(kv, "id", filename);
            const std::string& kindName = kv_require(kv, "kind", filename);
            auto kind = detail::enum_from_name(kindName, detail::interface_kind_names());
            if (!kind)
                throw ParseError(filename, kv.line, "unknown interface kind \"" + kindName + "\"");
            e.interfaceKind = *kind;
            e.hostComponentId = kv_require(kv, "host", filename);
            m.entryInterfaces.push_back(std::move(e));
        } else if (kv.keyword == "target") {
            kv_check_keys(kv, {"id"}, strictness, filename, diags);
            m.targetCandidates.insert(kv_require(kv, "id", filename));
        } else {
            if (strictness == Strictness::Strict)
                throw ParseError(filename, kv.line, "unknown declaration \"" + kv.keyword + "\"");
            if (diags)
                diags->push_back({Diagnostic::Severity::Warning, filename, kv.line,
                                  "ignoring unknown declaration \"" + kv.keyword + "\""});
        }
    }
    if (!sawModelLine)
        throw ParseError(filename, 0, "missing \"model id=...\" declaration");
    validate_model(m);
    return m;
}

inline SutModel load_model(const std::filesystem::path& path, Strictness strictness = Strictness::Strict,
                           std::vector<Diagnostic>* diags = nullptr) {
    return parse_model(read_text_file(path), path.string(), strictness, diags);
}

/// Canonical serializer: declarations sorted by id, fixed key order,
/// byte-stable output. Reparsing the serialization serializes to the
/// same bytes again, and equals the original model up to declaration
/// order.
inline std::string serialize_model(const SutModel& m) {
    std::string out;
    out += format_kv_line("model", {{"id", m.modelId}});

    std::vector<const Component*> comps;
    for (const auto& c : m.components)
        comps.push_back(&c);
    std::sort(comps.begin(), comps.end(), [](auto* a, auto* b) { return a->id < b->id; });
    for (const Component* c : comps) {
        std::vector<std::pair<std::string, std::string>> attrs{{"id", c->id}, {"kind", to_string(c->kind)}};
        if (!c->segmentIds.empty()) {
            std::string joined;
            for (const auto& s : c->segmentIds) { // std::set iterates sorted
                if (!joined.empty())
                    joined += ',';
                joined += s;
            }
            attrs.emplace_back("segments", joined);
        }
        if (c->productHint) {
            attrs.emplace_back("vendor", c->productHint->vendor);
            attrs.emplace_back("product", c->productHint->product);
            if (c->productHint->version)
                attrs.emplace_back("version", c->productHint->version->str());
        }
        out += format_kv_line("component", attrs);
    }

    std::vector<const NetworkSegment*> segs;
    for (const auto& s : m.segments)
        segs.push_back(&s);
    std::sort(segs.begin(), segs.end(), [](auto* a, auto* b) { return a->id < b->id; });
    for (const NetworkSegment* s : segs)
        out += format_kv_line("segment", {{"id", s->id}, {"bus", to_string(s->busKind)}});

    std::vector<const EntryInterface*> entries;
    for (const auto& e : m.entryInterfaces)
        entries.push_back(&e);
    std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->id < b->id; });
    for (const EntryInterface* e : entries)
        out += format_kv_line("entry", {{"id", e->id}, {"kind", to_string(e->interfaceKind)}, {"host", e->hostComponentId}});

    for (const auto& t : m.targetCandidates)
        out += format_kv_line("target", {{"id", t}});
    return out;
}

/// Undirected component graph induced by shared segments, plus entry
/// interface attachments. Edge list is lexicographic by (low, high) id.
struct Adjacency {
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::pair<std::string, std::string>> entryAttachments; // (entry id, host id)
    std::vector<std::string> isolatedComponents;
};

inline Adjacency derive_adjacency(const SutModel& m) {
    Adjacency adj;
    std::set<std::pair<std::string, std::string>> edgeSet;
    for (const auto& s : m.segments) {
        for (auto a = s.memberIds.begin(); a != s.memberIds.end(); ++a) {
            auto b = a;
            for (++b; b != s.memberIds.end(); ++b)
                edgeSet.emplace(*a, *b); // set members are sorted, so *a < *b
        }
    }
    adj.edges.assign(edgeSet.begin(), edgeSet.end());

    for (const auto& e : m.entryInterfaces)
        adj.entryAttachments.emplace_back(e.id, e.hostComponentId);
    std::sort(adj.entryAttachments.begin(), adj.entryAttachments.end());

    for (const auto& c : m.components) {
        bool incident = false;
        for (const auto& [a, b] : adj.edges)
            if (a == c.id || b == c.id) {
                incident = true;
                break;
            }
        if (!incident)
            adj.isolatedComponents.push_back(c.id);
    }
    std::sort(adj.isolatedComponents.begin(), adj.isolatedComponents.end());
    return adj;
}

/// Variant-set invariants: non-empty, unique variant ids, and same-id
/// elements agree on their element category across variants.
inline void validate_variant_set(const VariantSet& vs) {
    if (vs.variants.empty())
        throw EmptyVariantSet("variant set must not be empty");
    std::set<std::string> seen;
    for (const auto& v : vs.variants) {
        if (!seen.insert(v.modelId).second)
            throw ValidationError("duplicate variant id \"" + v.modelId + "\"");
    }
    std::map<std::string, std::pair<std::string, std::string>> categories; // id -> (category, variant)
    auto check = [&](const std::string& id, const std::string& category, const std::string& variantId) {
        auto it = categories.find(id);
        if (it == categories.end()) {
            categories.emplace(id, std::make_pair(category, variantId));
        } else if (it->second.first != category) {
            throw ValidationError("element \"" + id + "\" is a " + it->second.first + " in variant \"" +
                                  it->second.second + "\" but a " + category + " in variant \"" + variantId + "\"");
        }
    };
    for (const auto& v : vs.variants) {
        for (const auto& c : v.components)
            check(c.id, "component", v.modelId);
        for (const auto& s : v.segments)
            check(s.id, "segment", v.modelId);
        for (const auto& e : v.entryInterfaces)
            check(e.id, "entry interface", v.modelId);
    }
}

/// Element ids NOT present in every variant (symmetric-difference
/// semantics over per-variant element-id sets).
inline std::set<std::string> difference_set(const VariantSet& vs) {
    std::set<std::string> result;
    if (vs.variants.empty())
        return result;
    std::map<std::string, std::size_t> counts;
    for (const auto& v : vs.variants)
        for (const auto& id : element_ids(v))
            ++counts[id];
    for (const auto& [id, n] : counts)
        if (n != vs.variants.size())
            result.insert(id);
    return result;
}

inline VariantSet load_variant_set(const std::vector<std::filesystem::path>& paths,
                                   Strictness strictness = Strictness::Strict,
                                   std::vector<Diagnostic>* diags = nullptr) {
    VariantSet vs;
    for (const auto& p : paths)
        vs.variants.push_back(load_model(p, strictness, diags));
    validate_variant_set(vs);
    return vs;
}

} // namespace autosec
