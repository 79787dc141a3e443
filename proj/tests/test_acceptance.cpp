// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance gate. Each check prints exactly one PASS/FAIL
// line; the binary exits nonzero if any check fails. Checks judge the
// library against independent oracles (exhaustive DFS, 2^n subset
// search, tuple-coverage counting, synthetic signal generators), not
// against the library's own internals.

#include <algorithm>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "autosec/autosec.hpp"
#include "support/test_oracles.hpp"

using namespace autosec;

namespace {

const std::string kFixtures = AUTOSEC_FIXTURE_DIR;

VariantSet demo_variants() {
    return load_variant_set({kFixtures + "/demo_v1.sutm", kFixtures + "/demo_v2.sutm",
                             kFixtures + "/demo_v3.sutm"});
}

VulnStore demo_store() {
    FeedParseResult r = parse_feed(kFixtures + "/demo.vulns");
    return build_vuln_store(std::move(r.records));
}

AttackGraph demo_graph(const VariantSet& vs, const VulnStore& store) {
    return build_superposed_graph(vs, annotate_variant_set(vs, store, 10), "t", 100);
}

MessageTrace synthetic_trace(double t0, double period, double ppm, int n,
                             std::mt19937* rng = nullptr, double noiseSigma = 0) {
    MessageTrace trace;
    std::normal_distribution<double> noise(0.0, noiseSigma);
    const double effective = period * (1.0 + ppm * 1e-6);
    for (int i = 0; i < n; ++i) {
        double ts = t0 + i * effective;
        if (rng && noiseSigma > 0)
            ts += noise(*rng);
        trace.records.push_back({ts, 0x123, {}});
    }
    std::sort(trace.records.begin(), trace.records.end(),
              [](const TraceRecord& a, const TraceRecord& b) { return a.timestamp < b.timestamp; });
    return trace;
}

bool check_enumeration_against_dfs(std::mt19937& rng, int iterations) {
    int nonTrivial = 0;
    for (int iter = 0; iter < iterations; ++iter) {
        AttackGraph g = oracles::random_graph(rng);
        const int msv = std::uniform_int_distribution<int>(10, 160)(rng);

        std::vector<oracles::OraclePath> expected = oracles::paths_below(g, "V", msv);
        std::sort(expected.begin(), expected.end(), oracles::oracle_order);

        EnumerationResult got = enumerate_below_msv(g, "V", msv, std::size_t{1} << 20);
        if (got.truncated)
            return false;
        if (got.vectors.size() != expected.size())
            return false;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (got.vectors[i].orderedElementIds != expected[i].ids)
                return false;
            if (got.vectors[i].totalCoa != expected[i].cost)
                return false;
        }
        if (!expected.empty())
            ++nonTrivial;

        // cheapest-path query must agree with the exhaustive minimum
        std::vector<oracles::OraclePath> all = oracles::all_paths(g, "V");
        auto cheapest = try_cheapest_path(g, "V");
        if (all.empty()) {
            if (cheapest)
                return false;
        } else {
            int minCost = all.front().cost;
            for (const auto& p : all)
                minCost = std::min(minCost, p.cost);
            if (!cheapest || cheapest->totalCoa != minCost)
                return false;
        }
    }
    return nonTrivial > 40; // the sample must actually exercise enumeration
}

bool check_optimizer_against_brute_force(std::mt19937& rng, int iterations) {
    int feasibleSeen = 0, infeasibleSeen = 0;
    for (int iter = 0; iter < iterations; ++iter) {
        AttackGraph g = oracles::random_graph(rng);

        std::vector<std::string> components;
        for (const auto& [id, node] : g.nodes)
            if (!node.isEntry)
                components.push_back(id);
        std::sort(components.begin(), components.end());
        if (components.size() > 12)
            components.resize(12);

        std::vector<Mitigation> catalog;
        for (const auto& id : components) {
            Mitigation m;
            m.mitId = "m-" + id;
            m.componentId = id;
            m.coaDelta = std::uniform_int_distribution<int>(1, 30)(rng);
            m.cost = std::uniform_int_distribution<int>(1, 40)(rng);
            catalog.push_back(std::move(m));
        }
        const int msv = std::uniform_int_distribution<int>(10, 200)(rng);

        std::optional<oracles::BruteForcePlan> brute =
            oracles::brute_force_optimum(g, catalog, msv, {"V"});
        try {
            MitigationPlan plan = optimize_mitigations(g, catalog, msv, {"V"}, false, {});
            if (!brute)
                return false;
            if (plan.selected != brute->selected || plan.totalCost != brute->totalCost)
                return false;
            ++feasibleSeen;
        } catch (const Infeasible&) {
            if (brute)
                return false;
            ++infeasibleSeen;
        }
    }
    return feasibleSeen > 30 && infeasibleSeen > 0;
}

} // namespace

int main() {
    int failures = 0;
    auto criterion = [&](int n, const std::string& desc, const std::function<bool()>& body) {
        bool ok = false;
        std::string note;
        try {
            ok = body();
        } catch (const std::exception& e) {
            note = e.what();
        }
        std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << " — " << desc << "\n";
        if (!ok) {
            ++failures;
            if (!note.empty())
                std::cerr << "  criterion " << n << " aborted: " << note << "\n";
        }
    };

    criterion(1, "demo variants cost 23/30/28 to reach the target and only the middle one survives an msv-30 gate",
              [&] {
                  VariantSet vs = demo_variants();
                  VulnStore store = demo_store();
                  AttackGraph g = demo_graph(vs, store);

                  bool ok = true;
                  auto expect = [&](const std::string& variant, int cost, const std::vector<std::string>& ids) {
                      auto vec = try_cheapest_path(g, variant);
                      ok = ok && vec && vec->totalCoa == cost && vec->orderedElementIds == ids;
                  };
                  expect("variant-1", 23, {"e0", "gw", "b", "x", "y", "t"});
                  expect("variant-2", 30, {"e0", "gw", "m", "x", "y", "t"});
                  expect("variant-3", 28, {"e0", "gw", "c", "x", "y", "t"});

                  GateResult gate = gate_verdict(g, 30, g.variantIds);
                  ok = ok && gate.perVariant.size() == 3;
                  ok = ok && !gate.perVariant[0].pass;  // 23 < 30
                  ok = ok && gate.perVariant[1].pass;   // 30 >= 30 (boundary passes)
                  ok = ok && !gate.perVariant[2].pass;  // 28 < 30
                  ok = ok && !gate.overallPass;
                  return ok;
              });

    criterion(2, "the mitigation optimizer returns the exhaustive-search optimum on the demo catalog, with and without the invariant-components restriction",
              [&] {
                  VariantSet vs = demo_variants();
                  VulnStore store = demo_store();
                  AttackGraph g = demo_graph(vs, store);
                  std::vector<Mitigation> catalog = load_mitigation_catalog(kFixtures + "/demo.mits");
                  std::vector<Mitigation> priced = resolve_mitigation_costs(g, catalog);

                  MitigationPlan plan = optimize_mitigations(g, catalog, 30, g.variantIds, false, {});
                  bool ok = plan.selected == std::vector<std::string>{"mit-b", "mit-c"} && plan.totalCost == 167;
                  for (const auto& o : plan.perVariant)
                      ok = ok && o.pass;
                  auto brute = oracles::brute_force_optimum(g, priced, 30, g.variantIds);
                  ok = ok && brute && brute->selected == plan.selected && brute->totalCost == plan.totalCost;

                  MitigationPlan inv = optimize_mitigations(g, catalog, 30, g.variantIds, true, {});
                  ok = ok && inv.selected == std::vector<std::string>{"mit-x"} && inv.totalCost == 200;
                  std::vector<Mitigation> invariantPriced;
                  for (const auto& m : priced)
                      if (g.nodes.at(m.componentId).variantLabels.size() == g.variantIds.size())
                          invariantPriced.push_back(m);
                  auto bruteInv = oracles::brute_force_optimum(g, invariantPriced, 30, g.variantIds);
                  ok = ok && bruteInv && bruteInv->selected == inv.selected && bruteInv->totalCost == inv.totalCost;
                  return ok;
              });

    criterion(3, "path enumeration and cheapest-path agree with an exhaustive DFS oracle on 200 random graphs",
              [&] {
                  std::mt19937 rng(20260815);
                  return check_enumeration_against_dfs(rng, 200);
              });

    criterion(4, "mitigation optimization agrees with 2^n subset brute force on 100 random instances",
              [&] {
                  std::mt19937 rng(424242);
                  return check_optimizer_against_brute_force(rng, 100);
              });

    criterion(5, "clock-skew recovery is exact on clean periodic traces and within 5 ppm at 0.1 ms jitter",
              [&] {
                  std::mt19937 rng(31337);
                  for (int i = 0; i < 50; ++i) {
                      const double period = std::uniform_real_distribution<double>(0.004, 0.02)(rng);
                      const double ppm = std::uniform_real_distribution<double>(-200.0, 200.0)(rng);
                      MessageTrace trace = synthetic_trace(0.5, period, ppm, 120);
                      ClockSkewEstimate est = estimate_clock_skew(trace, 0x123, period);
                      if (std::abs(est.skewPpm - ppm) >= 1e-6)
                          return false;
                  }
                  std::mt19937 noisy(4242);
                  MessageTrace trace = synthetic_trace(0.0, 0.010, 50.0, 10000, &noisy, 1e-4);
                  ClockSkewEstimate est = estimate_clock_skew(trace, 0x123, 0.010);
                  return std::abs(est.skewPpm - 50.0) <= 5.0 && est.sampleCount == 10000;
              });

    criterion(6, "probe plans cover every t-way value combination using fewer rows than the full cartesian product",
              [&] {
                  std::vector<ProbeParameter> params =
                      parse_probe_parameters(read_text_file(kFixtures + "/probe_params.txt"), "probe_params.txt");
                  std::size_t product = 1;
                  for (const auto& p : params)
                      product *= p.values.size(); // 3 * 2 * 2 = 12

                  ProbePlan pairwise = generate_probe_plan(params, 2);
                  bool ok = oracles::covers_all_tuples(params, pairwise, 2) && pairwise.rows.size() < product;

                  ProbePlan full = generate_probe_plan(params, 3);
                  ok = ok && oracles::covers_all_tuples(params, full, 3) && full.rows.size() == product;

                  std::vector<ProbeParameter> wide = {{"p0", {"a", "b"}},
                                                      {"p1", {"a", "b", "c"}},
                                                      {"p2", {"a", "b"}},
                                                      {"p3", {"a", "b", "c", "d"}}};
                  ProbePlan widePlan = generate_probe_plan(wide, 2);
                  ok = ok && oracles::covers_all_tuples(wide, widePlan, 2) && widePlan.rows.size() < 48;
                  ProbePlan wide3 = generate_probe_plan(wide, 3);
                  ok = ok && oracles::covers_all_tuples(wide, wide3, 3) && wide3.rows.size() < 48;
                  return ok;
              });

    criterion(7, "200 randomized campaigns never exclude the true variant and every exclusion cites matching evidence",
              [&] {
                  std::mt19937 rng(99);
                  for (int iter = 0; iter < 200; ++iter) {
                      oracles::CampaignFixture fix = oracles::random_campaign_fixture(rng);
                      SimulatedSutAdapter adapter(fix.sut, fix.vs);
                      CampaignOptions opts;
                      opts.msv = fix.msv;
                      opts.target = fix.target;
                      CampaignReport report = run_campaign(fix.vs, fix.store, adapter, opts);

                      const auto& fpv = report.finalPlausibleVariants;
                      if (std::find(fpv.begin(), fpv.end(), fix.sut.trueVariantId) == fpv.end())
                          return false;
                      for (const auto& it : report.iterations) {
                          const auto& pv = it.plausibleVariants;
                          if (std::find(pv.begin(), pv.end(), fix.sut.trueVariantId) == pv.end())
                              return false;
                      }
                      for (const auto& e : report.exclusions) {
                          if (e.variantId == fix.sut.trueVariantId)
                              return false;
                          if (e.evidenceIndex >= report.evidence.size())
                              return false;
                          if (e.reason.find(report.evidence[e.evidenceIndex].subjectId) == std::string::npos)
                              return false;
                      }
                      if (report.executionsUsed > opts.budget)
                          return false;
                  }
                  return true;
              });

    criterion(8, "campaign reports and graph exports are byte-identical across repeated runs",
              [&] {
                  auto once = [&] {
                      VariantSet vs = demo_variants();
                      VulnStore store = demo_store();
                      SimulatedSutAdapter adapter(load_sut_config(kFixtures + "/demo_fail.sut"), vs);
                      CampaignOptions opts;
                      opts.msv = 30;
                      opts.catalog = load_mitigation_catalog(kFixtures + "/demo.mits");
                      CampaignReport report = run_campaign(vs, store, adapter, opts);
                      return report_to_json(report).dump(2) + "\n--\n" + export_dot(report.finalGraph) +
                             "\n--\n" + export_dot(demo_graph(vs, store));
                  };
                  const std::string a = once();
                  const std::string b = once();
                  return !a.empty() && a == b;
              });

    criterion(9, "campaign verdicts: a resistant SUT passes with each vector tried once, an exploitable one fails on the compromising vector, a spent budget is inconclusive",
              [&] {
                  VariantSet vs = demo_variants();
                  VulnStore store = demo_store();
                  bool ok = true;

                  {
                      SimulatedSutAdapter adapter(load_sut_config(kFixtures + "/demo_resistant.sut"), vs);
                      CampaignOptions opts;
                      opts.msv = 30;
                      CampaignReport r = run_campaign(vs, store, adapter, opts);
                      ok = ok && r.verdict == Verdict::Pass && r.executionsUsed == 2;
                      std::set<std::vector<std::string>> seen;
                      for (const auto& it : r.iterations)
                          if (it.executed)
                              ok = ok && seen.insert(it.executed->vector.orderedElementIds).second;
                      ok = ok && seen.size() == 2;
                  }
                  {
                      SimulatedSutAdapter adapter(load_sut_config(kFixtures + "/demo_fail.sut"), vs);
                      CampaignOptions opts;
                      opts.msv = 30;
                      CampaignReport r = run_campaign(vs, store, adapter, opts);
                      ok = ok && r.verdict == Verdict::Fail && r.executionsUsed == 1;
                      ok = ok && r.verdictNote.find("e0->gw->b->x->y->t") != std::string::npos;
                  }
                  {
                      SimulatedSutAdapter adapter(load_sut_config(kFixtures + "/demo_resistant.sut"), vs);
                      CampaignOptions opts;
                      opts.msv = 40;
                      opts.budget = 1;
                      CampaignReport r = run_campaign(vs, store, adapter, opts);
                      ok = ok && r.verdict == Verdict::Inconclusive && r.executionsUsed == 1;
                      ok = ok && !r.iterations.empty() && r.iterations.back().pendingVectors == 2;
                  }
                  return ok;
              });

    if (failures != 0)
        std::cerr << failures << " criterion(s) failed\n";
    return failures == 0 ? 0 : 1;
}
