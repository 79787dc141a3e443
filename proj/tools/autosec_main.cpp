// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Exit codes: 0 pass, 1 fail, 2 inconclusive,
// >2 tool error (3 = domain/input error, 4 = unexpected failure).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autosec/autosec.hpp"

#ifdef AUTOSEC_HAVE_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#ifdef AUTOSEC_ENABLE_FETCH
#include <httplib.h>
#endif

namespace {

using namespace autosec;

void write_out(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    write_text_file(path, content);
}

void print_diagnostics(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        std::cerr << format_diagnostic(d) << "\n";
}

struct GlobalOptions {
    int msv = 30;
    int coaScale = 10;
    int defaultCoa = 100;
    std::size_t kmax = 1000;
    std::uint64_t seed = 0; // reserved for stochastic adapters; the built-in pipeline is deterministic
    int budget = 100;
    std::string missingPolicy = "speculative";
    bool lax = false;

    Strictness strictness() const { return lax ? Strictness::Lax : Strictness::Strict; }
    MissingMitigationPolicy policy() const {
        return missingPolicy == "exclude" ? MissingMitigationPolicy::Exclude : MissingMitigationPolicy::Speculative;
    }
};

VariantSet load_variants(const std::vector<std::string>& files, const GlobalOptions& g) {
    std::vector<Diagnostic> diags;
    std::vector<std::filesystem::path> paths(files.begin(), files.end());
    VariantSet vs = load_variant_set(paths, g.strictness(), &diags);
    print_diagnostics(diags);
    return vs;
}

std::string pick_target(const VariantSet& vs, const std::string& explicitTarget) {
    return explicitTarget.empty() ? resolve_target(vs) : explicitTarget;
}

AttackGraph build_graph(const VariantSet& vs, const VulnStore& store, const std::string& target,
                        const GlobalOptions& g) {
    AnnotationMap annotations = annotate_variant_set(vs, store, g.coaScale);
    return build_superposed_graph(vs, annotations, target, g.defaultCoa);
}

#ifdef AUTOSEC_ENABLE_FETCH
// Minimal scheme://host[:port]/path splitter for the feed fetcher.
struct ParsedUrl {
    std::string scheme, host, path;
    int port = 0;
};

ParsedUrl parse_url(const std::string& url) {
    ParsedUrl u;
    auto schemeEnd = url.find("://");
    if (schemeEnd == std::string::npos)
        throw ValidationError("url must start with http:// or https://: " + url);
    u.scheme = url.substr(0, schemeEnd);
    if (u.scheme != "http" && u.scheme != "https")
        throw ValidationError("unsupported url scheme \"" + u.scheme + "\"");
    std::string rest = url.substr(schemeEnd + 3);
    auto slash = rest.find('/');
    std::string hostPort = slash == std::string::npos ? rest : rest.substr(0, slash);
    u.path = slash == std::string::npos ? "/" : rest.substr(slash);
    auto colon = hostPort.find(':');
    if (colon == std::string::npos) {
        u.host = hostPort;
        u.port = u.scheme == "https" ? 443 : 80;
    } else {
        u.host = hostPort.substr(0, colon);
        u.port = std::stoi(hostPort.substr(colon + 1));
    }
    if (u.host.empty())
        throw ValidationError("url has no host: " + url);
    return u;
}

std::filesystem::path fetch_feed(const std::string& url, const std::string& cacheDirFlag) {
    std::string cacheDir = cacheDirFlag;
    if (cacheDir.empty()) {
        const char* env = std::getenv("AUTOSEC_CACHE_DIR");
        cacheDir = env && *env ? env : ".autosec-cache";
    }
    std::filesystem::create_directories(cacheDir);
    ParsedUrl u = parse_url(url);

    httplib::Result res;
    if (u.scheme == "https") {
#ifdef AUTOSEC_HAVE_TLS
        httplib::SSLClient client(u.host, u.port);
        client.enable_server_certificate_verification(false);
        res = client.Get(u.path);
#else
        throw IoError("built without TLS support; cannot fetch " + url);
#endif
    } else {
        httplib::Client client(u.host, u.port);
        res = client.Get(u.path);
    }
    if (!res)
        throw IoError("fetch failed for " + url + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw IoError("fetch failed for " + url + ": HTTP " + std::to_string(res->status));

    std::string name = u.path.substr(u.path.find_last_of('/') + 1);
    if (name.empty())
        name = "feed";
    for (char& c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_'))
            c = '_';
    std::filesystem::path out = std::filesystem::path(cacheDir) / name;
    write_text_file(out, res->body);
    std::cerr << "fetched " << url << " -> " << out.string() << "\n";
    return out;
}
#endif

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"attack-graph driven security test generation for automotive systems"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--msv", g.msv, "minimum security value gate")->capture_default_str();
    app.add_option("--coa-scale", g.coaScale, "cost-of-attack scale factor")->capture_default_str();
    app.add_option("--default-coa", g.defaultCoa, "cost for components without matched vulnerabilities")
        ->capture_default_str();
    app.add_option("--k-max", g.kmax, "cap on enumerated paths per variant")->capture_default_str();
    app.add_option("--seed", g.seed, "random seed (reserved; built-in pipeline is deterministic)")
        ->capture_default_str();
    app.add_option("--budget", g.budget, "campaign execution budget")->capture_default_str();
    app.add_option("--missing-mitigation-policy", g.missingPolicy, "costless catalog entries: exclude|speculative")
        ->check(CLI::IsMember({"exclude", "speculative"}))
        ->capture_default_str();
    app.add_flag("--lax", g.lax, "warn instead of failing on unknown file keys");

    int exitCode = 0;

    // ----------------------------------------------------------------- model
    auto* model = app.add_subcommand("model", "SUT topology models");
    model->require_subcommand(1);

    std::vector<std::string> mvFiles;
    bool mvPrint = false;
    auto* modelValidate = model->add_subcommand("validate", "parse and validate model files");
    modelValidate->add_option("files", mvFiles, "model files (.sutm)")->required()->check(CLI::ExistingFile);
    modelValidate->add_flag("--print", mvPrint, "emit the canonical serialization");
    modelValidate->callback([&] {
        for (const auto& f : mvFiles) {
            std::vector<Diagnostic> diags;
            SutModel m = load_model(f, g.strictness(), &diags);
            print_diagnostics(diags);
            Adjacency adj = derive_adjacency(m);
            std::cout << "ok " << m.modelId << ": " << m.components.size() << " component(s), "
                      << m.segments.size() << " segment(s), " << m.entryInterfaces.size() << " entry point(s), "
                      << adj.edges.size() << " adjacency pair(s)\n";
            for (const auto& iso : adj.isolatedComponents)
                std::cerr << "warning: component \"" << iso << "\" is attached to no segment\n";
            if (mvPrint)
                std::cout << serialize_model(m);
        }
    });

    std::vector<std::string> mdFiles;
    auto* modelDiff = model->add_subcommand("diff", "difference set across model variants");
    modelDiff->add_option("files", mdFiles, "model files (.sutm)")->required()->check(CLI::ExistingFile);
    modelDiff->callback([&] {
        VariantSet vs = load_variants(mdFiles, g);
        if (vs.variants.size() < 2)
            throw ValidationError("model diff needs at least two variants");
        for (const auto& id : difference_set(vs))
            std::cout << id << "\n";
    });

    // ----------------------------------------------------------- fingerprint
    auto* fingerprint = app.add_subcommand("fingerprint", "component fingerprinting");
    fingerprint->require_subcommand(1);

    std::string fsTrace, fsArb;
    double fsPeriod = 0.0;
    auto* fpSkew = fingerprint->add_subcommand("skew", "estimate clock skew from a message trace");
    fpSkew->add_option("trace", fsTrace, "trace file")->required()->check(CLI::ExistingFile);
    fpSkew->add_option("--arb-id", fsArb, "arbitration id (decimal or 0x hex)")->required();
    fpSkew->add_option("--period", fsPeriod, "nominal period in seconds (default: median inter-arrival)");
    fpSkew->callback([&] {
        MessageTrace trace = load_trace(fsTrace);
        auto arb = try_parse_uint(fsArb);
        if (!arb)
            throw ValidationError("invalid arbitration id \"" + fsArb + "\"");
        std::optional<double> period;
        if (fpSkew->count("--period"))
            period = fsPeriod;
        ClockSkewEstimate est = estimate_clock_skew(trace, static_cast<std::uint32_t>(*arb), period);
        std::cout << "skew-ppm=" << format_double(est.skewPpm) << "\n"
                  << "residual-rms=" << format_double(est.residualRms) << "\n"
                  << "samples=" << est.sampleCount << "\n";
    });

    std::string ffSamples;
    auto* fpFeatures = fingerprint->add_subcommand("features", "statistical features of a sample series");
    fpFeatures->add_option("samples", ffSamples, "one sample per line")->required()->check(CLI::ExistingFile);
    fpFeatures->callback([&] {
        SignalSampleSeries series = load_sample_series(ffSamples);
        FeatureVector fv = extract_features(series);
        for (const auto& [key, value] : feature_map(fv))
            std::cout << key << "=" << format_double(value) << "\n";
    });

    std::string fmDb, fmSamples, fmTrace, fmArb;
    double fmSkewPpm = 0.0, fmPeriod = 0.0;
    auto* fpMatch = fingerprint->add_subcommand("match", "rank signature-database candidates");
    fpMatch->add_option("database", fmDb, "signature database (.sigdb)")->required()->check(CLI::ExistingFile);
    fpMatch->add_option("--features", fmSamples, "sample series to fingerprint")->check(CLI::ExistingFile);
    fpMatch->add_option("--skew-ppm", fmSkewPpm, "observed clock skew in ppm");
    fpMatch->add_option("--skew-trace", fmTrace, "trace to estimate skew from")->check(CLI::ExistingFile);
    fpMatch->add_option("--arb-id", fmArb, "arbitration id for --skew-trace");
    fpMatch->add_option("--period", fmPeriod, "nominal period for --skew-trace");
    fpMatch->callback([&] {
        SignatureDb db = load_signature_db(fmDb, g.strictness());
        Observation obs;
        if (fpMatch->count("--features"))
            obs.features = extract_features(load_sample_series(fmSamples));
        if (fpMatch->count("--skew-ppm"))
            obs.skewPpm = fmSkewPpm;
        if (fpMatch->count("--skew-trace")) {
            if (!fpMatch->count("--arb-id"))
                throw ValidationError("--skew-trace requires --arb-id");
            auto arb = try_parse_uint(fmArb);
            if (!arb)
                throw ValidationError("invalid arbitration id \"" + fmArb + "\"");
            std::optional<double> period;
            if (fpMatch->count("--period"))
                period = fmPeriod;
            obs.skewPpm =
                estimate_clock_skew(load_trace(fmTrace), static_cast<std::uint32_t>(*arb), period).skewPpm;
        }
        std::vector<SignatureMatch> matches = match_signature(obs, db);
        if (matches.empty()) {
            std::cout << "no candidates\n";
            return;
        }
        for (const auto& m : matches) {
            std::cout << m.identity.vendor << " " << m.identity.product;
            if (m.identity.version)
                std::cout << " " << m.identity.version->str();
            std::cout << " score=" << format_double(m.score) << "\n";
        }
    });

    std::string ppParams, ppOut;
    int ppStrength = 2;
    auto* fpProbe = fingerprint->add_subcommand("probe-plan", "covering-array probe plan");
    fpProbe->add_option("parameters", ppParams, "parameter domain file")->required()->check(CLI::ExistingFile);
    fpProbe->add_option("--strength", ppStrength, "interaction strength t")->capture_default_str();
    fpProbe->add_option("--out", ppOut, "output file (default stdout)");
    fpProbe->callback([&] {
        std::vector<ProbeParameter> params = parse_probe_parameters(read_text_file(ppParams), ppParams);
        ProbePlan plan = generate_probe_plan(params, ppStrength);
        write_out(ppOut, serialize_probe_plan(plan));
        std::cerr << "rows: " << plan.rows.size() << "\n";
    });

    std::string fdBefore, fdAfter;
    double fdEps = 1e-9;
    auto* fpDiff = fingerprint->add_subcommand("diff", "compare two fingerprint reports");
    fpDiff->add_option("before", fdBefore, "earlier report")->required()->check(CLI::ExistingFile);
    fpDiff->add_option("after", fdAfter, "later report")->required()->check(CLI::ExistingFile);
    fpDiff->add_option("--epsilon", fdEps, "numeric tolerance")->capture_default_str();
    fpDiff->callback([&] {
        FingerprintReport before = load_fingerprint_report(fdBefore);
        FingerprintReport after = load_fingerprint_report(fdAfter);
        std::cout << serialize_fingerprint_delta(diff_fingerprints(before, after, fdEps));
    });

    // ------------------------------------------------------------------ vuln
    auto* vuln = app.add_subcommand("vuln", "vulnerability feeds and matching");
    vuln->require_subcommand(1);

    std::vector<std::string> viFeeds;
    std::string viOut, viFetchUrl, viCacheDir;
    auto* vulnImport = vuln->add_subcommand("import", "import feeds into a canonical store");
    vulnImport->add_option("feeds", viFeeds, "feed files (native or NVD JSON)")->check(CLI::ExistingFile);
    vulnImport->add_option("--out", viOut, "store output file (default stdout)");
    vulnImport->add_option("--fetch-url", viFetchUrl, "fetch a feed over HTTP(S) into the cache first");
    vulnImport->add_option("--cache-dir", viCacheDir, "cache directory (default $AUTOSEC_CACHE_DIR or .autosec-cache)");
    vulnImport->callback([&] {
        std::vector<std::filesystem::path> paths(viFeeds.begin(), viFeeds.end());
        if (!viFetchUrl.empty()) {
#ifdef AUTOSEC_ENABLE_FETCH
            paths.push_back(fetch_feed(viFetchUrl, viCacheDir));
#else
            throw IoError("built without fetch support; download the feed manually");
#endif
        }
        if (paths.empty())
            throw ValidationError("no feeds given");
        std::vector<VulnRecord> all;
        for (const auto& p : paths) {
            FeedParseResult r = parse_feed(p, g.strictness());
            print_diagnostics(r.diagnostics);
            all.insert(all.end(), r.records.begin(), r.records.end());
        }
        std::vector<Diagnostic> diags;
        VulnStore store = build_vuln_store(std::move(all), "import", &diags);
        print_diagnostics(diags);
        write_out(viOut, serialize_vuln_records(store.records));
        std::cerr << "imported " << store.records.size() << " record(s)\n";
    });

    std::string vmStore, vmModel;
    auto* vulnMatch = vuln->add_subcommand("match", "match store records against model components");
    vulnMatch->add_option("store", vmStore, "vulnerability store")->required()->check(CLI::ExistingFile);
    vulnMatch->add_option("model", vmModel, "model file (.sutm)")->required()->check(CLI::ExistingFile);
    vulnMatch->callback([&] {
        VulnStore store = load_vuln_store(vmStore, g.strictness());
        SutModel m = load_model(vmModel, g.strictness());
        for (const auto& c : m.components) {
            ComponentMatchResult r = match_component(c, store, g.coaScale);
            if (r.unidentified) {
                std::cout << c.id << " unidentified\n";
                continue;
            }
            if (r.matches.empty()) {
                std::cout << c.id << " no-known-vulnerabilities\n";
                continue;
            }
            for (const auto& mv : r.matches)
                std::cout << c.id << " " << mv.vulnId << " cvss=" << format_double(mv.cvssBase)
                          << " coa=" << mv.coa << "\n";
        }
    });

    // ---------------------------------------------------------------- attack
    auto* attack = app.add_subcommand("attack", "superposed attack graphs");
    attack->require_subcommand(1);

    std::vector<std::string> abFiles;
    std::string abStore, abTarget, abDot;
    auto* attackBuild = attack->add_subcommand("build", "build the superposed attack graph");
    attackBuild->add_option("variants", abFiles, "variant model files")->required()->check(CLI::ExistingFile);
    attackBuild->add_option("--store", abStore, "vulnerability store")->required()->check(CLI::ExistingFile);
    attackBuild->add_option("--target", abTarget, "target component id");
    attackBuild->add_option("--dot", abDot, "also write a DOT rendering");
    attackBuild->callback([&] {
        VariantSet vs = load_variants(abFiles, g);
        VulnStore store = load_vuln_store(abStore, g.strictness());
        AttackGraph graph = build_graph(vs, store, pick_target(vs, abTarget), g);
        std::cout << "graph: " << graph.nodes.size() << " node(s), " << graph.edges.size() << " edge(s), "
                  << graph.entryNodeIds.size() << " entry node(s), target " << graph.targetNodeId << "\n";
        for (const auto& [id, node] : graph.nodes) {
            std::cout << id << " coa=" << node.coa << (node.isEntry ? " entry" : "") << " variants={";
            bool first = true;
            for (const auto& v : node.variantLabels) {
                std::cout << (first ? "" : ",") << v;
                first = false;
            }
            std::cout << "}";
            for (const auto& vulnId : node.matchedVulnIds)
                std::cout << " " << vulnId;
            std::cout << "\n";
        }
        if (!abDot.empty())
            write_text_file(abDot, export_dot(graph));
    });

    std::vector<std::string> apFiles;
    std::string apStore, apTarget;
    bool apBelowMsv = false;
    auto* attackPaths = attack->add_subcommand("paths", "cheapest paths / below-MSV test series");
    attackPaths->add_option("variants", apFiles, "variant model files")->required()->check(CLI::ExistingFile);
    attackPaths->add_option("--store", apStore, "vulnerability store")->required()->check(CLI::ExistingFile);
    attackPaths->add_option("--target", apTarget, "target component id");
    attackPaths->add_flag("--below-msv", apBelowMsv, "emit the merged prioritized series below --msv");
    attackPaths->callback([&] {
        VariantSet vs = load_variants(apFiles, g);
        VulnStore store = load_vuln_store(apStore, g.strictness());
        AttackGraph graph = build_graph(vs, store, pick_target(vs, apTarget), g);
        if (apBelowMsv) {
            std::set<std::string> diffSet = difference_set(vs);
            TestSeries series = build_test_series(graph, g.msv, diffSet, g.kmax);
            if (series.truncated)
                std::cerr << "warning: enumeration truncated at k-max=" << g.kmax << "\n";
            for (const auto& v : series.vectors) {
                std::cout << "coa=" << v.totalCoa << " variants={";
                bool first = true;
                for (const auto& var : v.feasibleVariants) {
                    std::cout << (first ? "" : ",") << var;
                    first = false;
                }
                std::cout << "} ";
                for (std::size_t i = 0; i < v.orderedElementIds.size(); ++i)
                    std::cout << (i ? "->" : "") << v.orderedElementIds[i];
                std::cout << "\n";
            }
            return;
        }
        for (const auto& variantId : graph.variantIds) {
            auto vec = try_cheapest_path(graph, variantId);
            if (!vec) {
                std::cout << variantId << " unreachable\n";
                continue;
            }
            std::cout << variantId << " coa=" << vec->totalCoa << " ";
            for (std::size_t i = 0; i < vec->orderedElementIds.size(); ++i)
                std::cout << (i ? "->" : "") << vec->orderedElementIds[i];
            std::cout << "\n";
        }
    });

    std::vector<std::string> agFiles;
    std::string agStore, agTarget;
    auto* attackGate = attack->add_subcommand("gate", "per-variant MSV gate verdicts");
    attackGate->add_option("variants", agFiles, "variant model files")->required()->check(CLI::ExistingFile);
    attackGate->add_option("--store", agStore, "vulnerability store")->required()->check(CLI::ExistingFile);
    attackGate->add_option("--target", agTarget, "target component id");
    attackGate->callback([&] {
        VariantSet vs = load_variants(agFiles, g);
        VulnStore store = load_vuln_store(agStore, g.strictness());
        AttackGraph graph = build_graph(vs, store, pick_target(vs, agTarget), g);
        GateResult result = gate_verdict(graph, g.msv, graph.variantIds);
        for (const auto& vg : result.perVariant) {
            std::cout << vg.variantId << " ";
            if (vg.cheapestCoa)
                std::cout << "cheapest=" << *vg.cheapestCoa;
            else
                std::cout << "unreachable";
            std::cout << " " << (vg.pass ? "pass" : "fail") << "\n";
        }
        exitCode = result.overallPass ? 0 : 1;
    });

    std::vector<std::string> adFiles;
    std::string adStore, adTarget, adOut;
    auto* attackDot = attack->add_subcommand("dot", "DOT rendering of the superposed graph");
    attackDot->add_option("variants", adFiles, "variant model files")->required()->check(CLI::ExistingFile);
    attackDot->add_option("--store", adStore, "vulnerability store")->required()->check(CLI::ExistingFile);
    attackDot->add_option("--target", adTarget, "target component id");
    attackDot->add_option("--out", adOut, "output file (default stdout)");
    attackDot->callback([&] {
        VariantSet vs = load_variants(adFiles, g);
        VulnStore store = load_vuln_store(adStore, g.strictness());
        AttackGraph graph = build_graph(vs, store, pick_target(vs, adTarget), g);
        write_out(adOut, export_dot(graph));
    });

    // -------------------------------------------------------------- mitigate
    auto* mitigate = app.add_subcommand("mitigate", "mitigation planning");
    mitigate->require_subcommand(1);

    std::vector<std::string> moFiles;
    std::string moStore, moTarget, moCatalog;
    bool moInvariantOnly = false;
    long long moSpecK = 1000;
    auto* mitigateOptimize = mitigate->add_subcommand("optimize", "cheapest mitigation subset reaching the MSV");
    mitigateOptimize->add_option("variants", moFiles, "variant model files")->required()->check(CLI::ExistingFile);
    mitigateOptimize->add_option("--store", moStore, "vulnerability store")->required()->check(CLI::ExistingFile);
    mitigateOptimize->add_option("--target", moTarget, "target component id");
    mitigateOptimize->add_option("--catalog", moCatalog, "mitigation catalog (.mits)")
        ->required()
        ->check(CLI::ExistingFile);
    mitigateOptimize->add_flag("--invariant-only", moInvariantOnly,
                               "restrict to components present in every plausible variant");
    mitigateOptimize->add_option("--speculative-k", moSpecK, "constant K for speculative costs")
        ->capture_default_str();
    mitigateOptimize->callback([&] {
        VariantSet vs = load_variants(moFiles, g);
        VulnStore store = load_vuln_store(moStore, g.strictness());
        AttackGraph graph = build_graph(vs, store, pick_target(vs, moTarget), g);
        std::vector<Mitigation> catalog = load_mitigation_catalog(moCatalog, g.strictness());
        OptimizeOptions opts;
        opts.speculativeK = moSpecK;
        opts.missingCostPolicy = g.policy();
        try {
            MitigationPlan plan =
                optimize_mitigations(graph, catalog, g.msv, graph.variantIds, moInvariantOnly, opts);
            std::cout << "total-cost=" << plan.totalCost << "\n";
            for (const auto& id : plan.selected)
                std::cout << "select " << id << "\n";
            for (const auto& o : plan.perVariant) {
                std::cout << o.variantId << " before=";
                if (o.beforeCoa)
                    std::cout << *o.beforeCoa;
                else
                    std::cout << "unreachable";
                std::cout << " after=";
                if (o.afterCoa)
                    std::cout << *o.afterCoa;
                else
                    std::cout << "unreachable";
                std::cout << " " << (o.pass ? "pass" : "fail") << "\n";
            }
        } catch (const Infeasible& e) {
            std::cout << "infeasible: " << e.what() << "\n";
            exitCode = 1;
        }
    });

    // -------------------------------------------------------------- campaign
    auto* campaign = app.add_subcommand("campaign", "iterative test campaigns");
    campaign->require_subcommand(1);

    std::vector<std::string> crFiles;
    std::string crStore, crSut, crTarget, crReport, crDot, crCatalog;
    bool crQuiet = false;
    auto* campaignRun = campaign->add_subcommand("run", "run a campaign against the simulated SUT");
    campaignRun->add_option("variants", crFiles, "variant model files")->required()->check(CLI::ExistingFile);
    campaignRun->add_option("--store", crStore, "vulnerability store")->required()->check(CLI::ExistingFile);
    campaignRun->add_option("--sut", crSut, "simulated SUT configuration (.sut)")
        ->required()
        ->check(CLI::ExistingFile);
    campaignRun->add_option("--target", crTarget, "target component id");
    campaignRun->add_option("--report", crReport, "write the JSON report here (default stdout)");
    campaignRun->add_option("--dot", crDot, "write a DOT rendering of the final pruned graph");
    campaignRun->add_option("--catalog", crCatalog, "mitigation catalog for the recommendation")
        ->check(CLI::ExistingFile);
    campaignRun->add_flag("--quiet", crQuiet, "suppress the human-readable summary");
    campaignRun->callback([&] {
        VariantSet vs = load_variants(crFiles, g);
        VulnStore store = load_vuln_store(crStore, g.strictness());
        SimulatedSut sut = load_sut_config(crSut, g.strictness());
        SimulatedSutAdapter adapter(std::move(sut), vs);

        CampaignOptions opts;
        opts.msv = g.msv;
        opts.target = crTarget; // empty = resolve from candidates
        opts.budget = g.budget;
        opts.kmax = g.kmax;
        opts.defaultCoa = g.defaultCoa;
        opts.coaScale = g.coaScale;
        opts.missingCostPolicy = g.policy();
        if (!crCatalog.empty())
            opts.catalog = load_mitigation_catalog(crCatalog, g.strictness());

        CampaignReport report = run_campaign(vs, store, adapter, opts);

        const std::string json = report_to_json(report).dump(2) + "\n";
        write_out(crReport, json);
        if (!crDot.empty())
            write_text_file(crDot, export_dot(report.finalGraph));
        if (!crQuiet) {
            // keep stdout clean for the JSON document when it goes there
            std::ostream& out = crReport.empty() ? std::cerr : std::cout;
            out << report_summary(report);
        }
        switch (report.verdict) {
        case Verdict::Pass: exitCode = 0; break;
        case Verdict::Fail: exitCode = 1; break;
        case Verdict::Inconclusive: exitCode = 2; break;
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 4;
    }
    return exitCode;
}
