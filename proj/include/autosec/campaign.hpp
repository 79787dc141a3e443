// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "autosec/attackgraph.hpp"
#include "autosec/fingerprint.hpp"
#include "autosec/mitigate.hpp"
#include "autosec/model.hpp"
#include "autosec/vulndb.hpp"

// The iterative test workflow: emit the prioritized test series, execute
// vectors through a pluggable adapter, fold the returned evidence into
// variant exclusions, recompute everything from scratch, and repeat
// until compromise (Fail), exhaustion (Pass), or budget out
// (Inconclusive). The loop is strictly sequential and fully
// deterministic for fixed inputs.

namespace autosec {

enum class AttackResult { Compromised, Resisted };
enum class Verdict { Pass, Fail, Inconclusive };

inline std::string to_string(AttackResult r) {
    return r == AttackResult::Compromised ? "compromised" : "resisted";
}

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct Outcome {
    AttackResult result = AttackResult::Resisted;
    std::vector<Evidence> evidence; // emitted for both results
};

class ExecutionAdapter {
public:
    virtual ~ExecutionAdapter() = default;
    virtual Outcome execute(const AttackVector& vector) = 0;
};

// ---------------------------------------------------------------------------
// Simulated SUT: a desk-scale stand-in for a vehicle. Configured by a
// .sut file:
//
//   sut      variant=<true variant id>
//   exploit  id=<element id>                 # exploitable elements
//   identity id=<element id> vendor=<v> product=<p> [version=<dotted>]

struct SimulatedSut {
    std::string trueVariantId;
    std::set<std::string> exploitableElementIds;
    std::map<std::string, ProductHint> identityTable;
};

inline SimulatedSut parse_sut_config(std::string_view text, const std::string& filename = "",
                                     Strictness strictness = Strictness::Strict,
                                     std::vector<Diagnostic>* diags = nullptr) {
    SimulatedSut sut;
    bool sawSut = false;
    for (const KvLine& kv : parse_kv_text(text, filename)) {
        if (kv.keyword == "sut") {
            kv_check_keys(kv, {"variant"}, strictness, filename, diags);
            if (sawSut)
                throw ParseError(filename, kv.line, "duplicate \"sut\" declaration");
            sawSut = true;
            sut.trueVariantId = kv_require(kv, "variant", filename);
        } else if (kv.keyword == "exploit") {
            kv_check_keys(kv, {"id"}, strictness, filename, diags);
            sut.exploitableElementIds.insert(kv_require(kv, "id", filename));
        } else if (kv.keyword == "identity") {
            kv_check_keys(kv, {"id", "vendor", "product", "version"}, strictness, filename, diags);
            const std::string& id = kv_require(kv, "id", filename);
            if (sut.identityTable.count(id))
                throw ParseError(filename, kv.line, "duplicate identity for \"" + id + "\"");
            ProductHint hint;
            hint.vendor = kv_require(kv, "vendor", filename);
            hint.product = kv_require(kv, "product", filename);
            if (const std::string* ver = kv.find("version")) {
                auto v = Version::try_parse(*ver);
                if (!v)
                    throw ParseError(filename, kv.line, "invalid version \"" + *ver + "\"");
                hint.version = *v;
            }
            sut.identityTable.emplace(id, std::move(hint));
        } else {
            if (strictness == Strictness::Strict)
                throw ParseError(filename, kv.line, "unknown declaration \"" + kv.keyword + "\"");
            if (diags)
                diags->push_back({Diagnostic::Severity::Warning, filename, kv.line,
                                  "ignoring unknown declaration \"" + kv.keyword + "\""});
        }
    }
    if (!sawSut)
        throw ParseError(filename, 0, "missing \"sut variant=...\" declaration");
    return sut;
}

inline SimulatedSut load_sut_config(const std::filesystem::path& path, Strictness strictness = Strictness::Strict,
                                    std::vector<Diagnostic>* diags = nullptr) {
    return parse_sut_config(read_text_file(path), path.string(), strictness, diags);
}

/// Walks the vector through the ground truth: an element missing from
/// the true variant stops the attack with ElementAbsent evidence; an
/// existing element is observed (plus an identity report when the SUT
/// configuration has one) and, if it is an unexploitable component, the
/// attack stops there. The attack succeeds only when the walk reaches
/// the end. Unsuccessful attacks still return every observation made on
/// the way.
inline Outcome simulated_execute(const SimulatedSut& sut, const SutModel& trueModel, const AttackVector& vector) {
    Outcome outcome;
    const std::set<std::string> trueElements = element_ids(trueModel);
    for (const auto& el : vector.orderedElementIds) {
        if (!trueElements.count(el)) {
            outcome.evidence.push_back(
                {EvidenceKind::ElementAbsent, el, std::nullopt, 1.0, EvidenceSource::AttackOutcome});
            return outcome;
        }
        outcome.evidence.push_back(
            {EvidenceKind::ElementObserved, el, std::nullopt, 1.0, EvidenceSource::AttackOutcome});
        auto idIt = sut.identityTable.find(el);
        if (idIt != sut.identityTable.end())
            outcome.evidence.push_back(
                {EvidenceKind::IdentityMatch, el, idIt->second, 1.0, EvidenceSource::AttackOutcome});
        const bool isEntry = trueModel.find_entry(el) != nullptr;
        if (!isEntry && !sut.exploitableElementIds.count(el))
            return outcome; // observed, but it resisted exploitation
    }
    outcome.result = AttackResult::Compromised;
    return outcome;
}

/// Deterministic adapter around a SimulatedSut. Construction checks that
/// the configured identities do not contradict the true variant's own
/// product hints; an inconsistent ground truth would poison the
/// exclusion rules.
class SimulatedSutAdapter : public ExecutionAdapter {
public:
    SimulatedSutAdapter(SimulatedSut sut, const VariantSet& vs) : sut_(std::move(sut)) {
        const SutModel* trueModel = vs.find_variant(sut_.trueVariantId);
        if (!trueModel)
            throw AdapterError("true variant \"" + sut_.trueVariantId + "\" is not in the variant set");
        trueModel_ = *trueModel;
        for (const auto& [el, identity] : sut_.identityTable) {
            const Component* c = trueModel_.find_component(el);
            if (c && c->productHint && detail::identity_contradicts(identity, *c->productHint))
                throw AdapterError("configured identity for \"" + el + "\" contradicts the true variant's hint");
        }
    }

    Outcome execute(const AttackVector& vector) override { return simulated_execute(sut_, trueModel_, vector); }

    const SutModel& true_model() const { return trueModel_; }

private:
    SimulatedSut sut_;
    SutModel trueModel_;
};

// ---------------------------------------------------------------------------
// Campaign loop.

struct CampaignOptions {
    int msv = 30;
    std::string target; // empty = resolve from declared target candidates
    int budget = 100;
    std::size_t kmax = 1000;
    int defaultCoa = 100;
    int coaScale = 10;
    double identityTheta = 0.8;
    std::optional<std::vector<Mitigation>> catalog; // absent = synthesize from sub-MSV paths
    long long speculativeK = 1000;
    MissingMitigationPolicy missingCostPolicy = MissingMitigationPolicy::Speculative;
    std::size_t maxCatalog = 24;
};

struct ExecutedVectorRecord {
    AttackVector vector;
    AttackResult result = AttackResult::Resisted;
    std::size_t evidenceBegin = 0; // slice of CampaignReport::evidence
    std::size_t evidenceCount = 0;
};

struct ExclusionEvent {
    std::string variantId;
    std::string reason;
    std::size_t evidenceIndex = 0;
};

struct IterationRecord {
    int iteration = 1;
    std::vector<std::string> plausibleVariants; // after folding all prior evidence
    std::vector<ExclusionEvent> newExclusions;  // exclusions that first took effect here
    std::size_t pendingVectors = 0;             // untested below-MSV vectors at selection time
    bool seriesTruncated = false;
    std::optional<ExecutedVectorRecord> executed;
};

struct CampaignReport {
    Verdict verdict = Verdict::Inconclusive;
    std::string verdictNote;
    std::string targetId;
    int msv = 0;
    int budget = 0;
    int executionsUsed = 0;
    std::vector<IterationRecord> iterations;
    std::vector<Evidence> evidence;              // global, in fold order
    std::vector<ExclusionEvent> exclusions;      // cumulative, from the final recomputation
    std::vector<std::string> finalPlausibleVariants;
    std::optional<MitigationPlan> recommendation;
    std::string recommendationNote;
    AttackGraph finalGraph; // pruned by the final evidence state
};

/// Sole target candidate shared by the variant set; fails when the
/// choice is ambiguous.
inline std::string resolve_target(const VariantSet& vs) {
    std::set<std::string> all;
    for (const auto& v : vs.variants)
        all.insert(v.targetCandidates.begin(), v.targetCandidates.end());
    if (all.size() == 1)
        return *all.begin();
    if (all.empty())
        throw ValidationError("no target candidates declared; pass an explicit target");
    std::string listed;
    for (const auto& t : all)
        listed += (listed.empty() ? "" : ", ") + t;
    throw ValidationError("ambiguous target candidates (" + listed + "); pass an explicit target");
}

namespace detail {

inline std::string join_ids(const std::vector<std::string>& ids, const std::string& sep = "->") {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty())
            out += sep;
        out += id;
    }
    return out;
}

inline std::vector<ExclusionEvent> exclusion_events(const std::vector<ExclusionRecord>& records) {
    std::vector<ExclusionEvent> events;
    for (const auto& r : records)
        events.push_back({r.variantId, r.reason, r.evidenceIndex});
    return events;
}

} // namespace detail

inline CampaignReport run_campaign(const VariantSet& vs, const VulnStore& store, ExecutionAdapter& adapter,
                                   const CampaignOptions& opts) {
    if (opts.msv < 1)
        throw OutOfRange("msv must be >= 1, got " + std::to_string(opts.msv));
    if (opts.budget < 1)
        throw OutOfRange("budget must be >= 1, got " + std::to_string(opts.budget));

    const std::string target = opts.target.empty() ? resolve_target(vs) : opts.target;
    const AnnotationMap annotations = annotate_variant_set(vs, store, opts.coaScale);
    const AttackGraph fullGraph = build_superposed_graph(vs, annotations, target, opts.defaultCoa);

    CampaignReport report;
    report.targetId = target;
    report.msv = opts.msv;
    report.budget = opts.budget;

    std::vector<Evidence> evidence;
    std::set<std::vector<std::string>> executedSet;
    std::set<std::string> previouslyExcluded;
    int iteration = 0;

    while (true) {
        ++iteration;
        IterationRecord rec;
        rec.iteration = iteration;

        ExclusionResult excl = exclude_variants(fullGraph, evidence, opts.identityTheta);
        rec.plausibleVariants = excl.graph.variantIds;
        for (const auto& r : excl.records)
            if (!previouslyExcluded.count(r.variantId))
                rec.newExclusions.push_back({r.variantId, r.reason, r.evidenceIndex});
        previouslyExcluded.clear();
        for (const auto& v : excl.excludedVariantIds)
            previouslyExcluded.insert(v);

        if (excl.graph.variantIds.empty()) {
            report.verdict = Verdict::Inconclusive;
            report.verdictNote = "evidence excluded every candidate variant; the model set does not cover the SUT";
            report.iterations.push_back(std::move(rec));
            break;
        }
        if (excl.graph.targetNodeId.empty()) {
            report.verdict = Verdict::Inconclusive;
            report.verdictNote = "target \"" + target + "\" is absent from every plausible variant";
            report.iterations.push_back(std::move(rec));
            break;
        }

        VariantSet plausible;
        for (const auto& v : vs.variants)
            if (std::find(excl.graph.variantIds.begin(), excl.graph.variantIds.end(), v.modelId) !=
                excl.graph.variantIds.end())
                plausible.variants.push_back(v);
        const std::set<std::string> diffSet = difference_set(plausible);

        TestSeries series = build_test_series(excl.graph, opts.msv, diffSet, opts.kmax);
        rec.seriesTruncated = series.truncated;
        std::vector<AttackVector> untested;
        for (auto& vec : series.vectors)
            if (!executedSet.count(vec.orderedElementIds))
                untested.push_back(std::move(vec));
        rec.pendingVectors = untested.size();

        if (untested.empty()) {
            if (series.truncated) {
                report.verdict = Verdict::Inconclusive;
                report.verdictNote = "path enumeration hit the cap; exhaustion of the test series is not certified";
            } else {
                report.verdict = Verdict::Pass;
                report.verdictNote = "no untested attack vector below msv remains for any plausible variant";
            }
            report.iterations.push_back(std::move(rec));
            break;
        }
        if (report.executionsUsed == opts.budget) {
            report.verdict = Verdict::Inconclusive;
            report.verdictNote = "execution budget exhausted with " + std::to_string(untested.size()) +
                                 " vector(s) still pending";
            report.iterations.push_back(std::move(rec));
            break;
        }

        const AttackVector vec = untested.front();
        Outcome outcome;
        try {
            outcome = adapter.execute(vec);
        } catch (const std::exception& e) {
            throw AdapterError("adapter failed on vector " + detail::join_ids(vec.orderedElementIds) + ": " +
                               e.what());
        }
        ++report.executionsUsed;
        executedSet.insert(vec.orderedElementIds);

        ExecutedVectorRecord exec;
        exec.vector = vec;
        exec.result = outcome.result;
        exec.evidenceBegin = evidence.size();
        exec.evidenceCount = outcome.evidence.size();
        evidence.insert(evidence.end(), outcome.evidence.begin(), outcome.evidence.end());
        rec.executed = std::move(exec);
        report.iterations.push_back(std::move(rec));

        if (outcome.result == AttackResult::Compromised) {
            report.verdict = Verdict::Fail;
            report.verdictNote =
                "vector " + detail::join_ids(vec.orderedElementIds) + " compromised the target";
            break;
        }
    }

    report.evidence = evidence;
    ExclusionResult finalExcl = exclude_variants(fullGraph, evidence, opts.identityTheta);
    report.exclusions = detail::exclusion_events(finalExcl.records);
    report.finalPlausibleVariants = finalExcl.graph.variantIds;
    report.finalGraph = finalExcl.graph;

    if (report.verdict != Verdict::Pass) {
        const AttackGraph& fg = report.finalGraph;
        if (fg.variantIds.empty()) {
            report.recommendationNote = "no plausible variant remains; nothing to mitigate";
        } else if (fg.targetNodeId.empty()) {
            report.recommendationNote = "target absent from every plausible variant; nothing to mitigate";
        } else {
            TestSeries residual = build_test_series(fg, opts.msv, {}, opts.kmax);
            if (residual.vectors.empty() && !residual.truncated) {
                report.recommendationNote = "no attack vector below msv remains; no mitigation needed";
            } else {
                std::vector<Mitigation> catalog;
                if (opts.catalog) {
                    std::size_t dropped = 0;
                    for (const auto& m : *opts.catalog) {
                        auto it = fg.nodes.find(m.componentId);
                        if (it == fg.nodes.end() || it->second.isEntry) {
                            ++dropped;
                            continue;
                        }
                        catalog.push_back(m);
                    }
                    if (dropped > 0)
                        report.recommendationNote =
                            std::to_string(dropped) + " catalog entrie(s) target components outside the "
                                                      "plausible graph and were ignored";
                } else {
                    std::set<std::string> onPath;
                    for (const auto& v : residual.vectors)
                        for (const auto& id : v.orderedElementIds)
                            if (!fg.nodes.at(id).isEntry)
                                onPath.insert(id);
                    for (const auto& id : onPath)
                        catalog.push_back({"auto-" + id, id, opts.msv, std::nullopt});
                }
                try {
                    MitigationPlan plan =
                        optimize_mitigations(fg, catalog, opts.msv, fg.variantIds, false,
                                             {opts.speculativeK, opts.missingCostPolicy, opts.maxCatalog});
                    report.recommendation = std::move(plan);
                } catch (const Infeasible&) {
                    report.recommendationNote = "no subset of the mitigation catalog reaches the msv";
                } catch (const CatalogTooLarge& e) {
                    report.recommendationNote = e.what();
                }
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report rendering. JSON output is schema-stable and timestamp-free so
// identical campaigns serialize to identical bytes.

namespace detail {

inline nlohmann::ordered_json vector_to_json(const AttackVector& v) {
    nlohmann::ordered_json j;
    j["elements"] = v.orderedElementIds;
    j["totalCoa"] = v.totalCoa;
    j["feasibleVariants"] = std::vector<std::string>(v.feasibleVariants.begin(), v.feasibleVariants.end());
    return j;
}

inline nlohmann::ordered_json evidence_to_json(const Evidence& ev) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(ev.kind);
    j["subjectId"] = ev.subjectId;
    j["confidence"] = ev.confidence;
    j["source"] = to_string(ev.source);
    if (ev.identity) {
        nlohmann::ordered_json id;
        id["vendor"] = ev.identity->vendor;
        id["product"] = ev.identity->product;
        if (ev.identity->version)
            id["version"] = ev.identity->version->str();
        j["identity"] = std::move(id);
    }
    return j;
}

inline nlohmann::ordered_json exclusion_to_json(const ExclusionEvent& e) {
    nlohmann::ordered_json j;
    j["variantId"] = e.variantId;
    j["reason"] = e.reason;
    j["evidenceIndex"] = e.evidenceIndex;
    return j;
}

} // namespace detail

inline nlohmann::ordered_json report_to_json(const CampaignReport& report) {
    nlohmann::ordered_json j;
    j["verdict"] = to_string(report.verdict);
    j["verdictNote"] = report.verdictNote;
    j["target"] = report.targetId;
    j["msv"] = report.msv;
    j["budget"] = report.budget;
    j["executionsUsed"] = report.executionsUsed;
    j["finalPlausibleVariants"] = report.finalPlausibleVariants;

    nlohmann::ordered_json iterations = nlohmann::ordered_json::array();
    for (const auto& it : report.iterations) {
        nlohmann::ordered_json ji;
        ji["iteration"] = it.iteration;
        ji["plausibleVariants"] = it.plausibleVariants;
        nlohmann::ordered_json excls = nlohmann::ordered_json::array();
        for (const auto& e : it.newExclusions)
            excls.push_back(detail::exclusion_to_json(e));
        ji["newExclusions"] = std::move(excls);
        ji["pendingVectors"] = it.pendingVectors;
        ji["seriesTruncated"] = it.seriesTruncated;
        if (it.executed) {
            nlohmann::ordered_json je;
            je["vector"] = detail::vector_to_json(it.executed->vector);
            je["result"] = to_string(it.executed->result);
            je["evidenceBegin"] = it.executed->evidenceBegin;
            je["evidenceCount"] = it.executed->evidenceCount;
            ji["executed"] = std::move(je);
        } else {
            ji["executed"] = nullptr;
        }
        iterations.push_back(std::move(ji));
    }
    j["iterations"] = std::move(iterations);

    nlohmann::ordered_json evidence = nlohmann::ordered_json::array();
    for (const auto& ev : report.evidence)
        evidence.push_back(detail::evidence_to_json(ev));
    j["evidence"] = std::move(evidence);

    nlohmann::ordered_json exclusions = nlohmann::ordered_json::array();
    for (const auto& e : report.exclusions)
        exclusions.push_back(detail::exclusion_to_json(e));
    j["exclusions"] = std::move(exclusions);

    if (report.recommendation) {
        nlohmann::ordered_json jr;
        jr["selected"] = report.recommendation->selected;
        jr["totalCost"] = report.recommendation->totalCost;
        nlohmann::ordered_json perVariant = nlohmann::ordered_json::array();
        for (const auto& o : report.recommendation->perVariant) {
            nlohmann::ordered_json jo;
            jo["variantId"] = o.variantId;
            if (o.beforeCoa)
                jo["beforeCoa"] = *o.beforeCoa;
            else
                jo["beforeCoa"] = nullptr;
            if (o.afterCoa)
                jo["afterCoa"] = *o.afterCoa;
            else
                jo["afterCoa"] = nullptr;
            jo["pass"] = o.pass;
            perVariant.push_back(std::move(jo));
        }
        jr["perVariant"] = std::move(perVariant);
        j["recommendation"] = std::move(jr);
    } else {
        j["recommendation"] = nullptr;
    }
    j["recommendationNote"] = report.recommendationNote;
    return j;
}

inline std::string report_summary(const CampaignReport& report) {
    std::string out;
    out += "verdict: " + to_string(report.verdict) + "\n";
    if (!report.verdictNote.empty())
        out += "  " + report.verdictNote + "\n";
    out += "target: " + report.targetId + "  msv: " + std::to_string(report.msv) + "\n";
    out += "executions: " + std::to_string(report.executionsUsed) + " of budget " + std::to_string(report.budget) +
           "\n";
    out += "plausible variants: " + detail::join_ids(report.finalPlausibleVariants, ", ") + "\n";
    for (const auto& it : report.iterations) {
        out += "iteration " + std::to_string(it.iteration) + ": plausible [" +
               detail::join_ids(it.plausibleVariants, ", ") + "]";
        for (const auto& e : it.newExclusions)
            out += "\n  excluded " + e.variantId + ": " + e.reason;
        if (it.executed) {
            out += "\n  executed " + detail::join_ids(it.executed->vector.orderedElementIds) + " (coa " +
                   std::to_string(it.executed->vector.totalCoa) + "): " + to_string(it.executed->result);
        }
        out += "\n";
    }
    if (report.recommendation) {
        out += "recommended mitigations: " + detail::join_ids(report.recommendation->selected, ", ") +
               " (total cost " + std::to_string(report.recommendation->totalCost) + ")\n";
    }
    if (!report.recommendationNote.empty())
        out += "note: " + report.recommendationNote + "\n";
    return out;
}

} // namespace autosec
