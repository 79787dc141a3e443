// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "autosec/model.hpp"
#include "autosec/vulndb.hpp"

using namespace autosec;

namespace {

const std::string kFixtures = AUTOSEC_FIXTURE_DIR;

Component hinted(const std::string& id, const std::string& vendor, const std::string& product,
                 const std::string& version) {
    Component c;
    c.id = id;
    c.kind = ComponentKind::Ecu;
    c.productHint = ProductHint{vendor, product, Version::parse(version)};
    return c;
}

} // namespace

TEST_CASE("cost of attack from cvss, scale 10") {
    CHECK(coa_from_cvss(9.8) == 2);
    CHECK(coa_from_cvss(9.0) == 10);
    CHECK(coa_from_cvss(8.3) == 17);
    CHECK(coa_from_cvss(8.5) == 15);
    CHECK(coa_from_cvss(9.5) == 5);
    CHECK(coa_from_cvss(9.6) == 4);
    CHECK(coa_from_cvss(7.7) == 23);
    CHECK(coa_from_cvss(10.0) == 1);  // clamped to the minimum
    CHECK(coa_from_cvss(0.0) == 100);
    CHECK(coa_from_cvss(9.95) == 1);  // 0.5 rounds half up
    CHECK(coa_from_cvss(9.85) == 2);  // 1.5 rounds half up to 2
}

TEST_CASE("cost of attack respects the scale parameter") {
    CHECK(coa_from_cvss(8.0, 5) == 10);
    CHECK(coa_from_cvss(8.0, 100) == 200);
    CHECK(coa_from_cvss(10.0, 100) == 1);
    CHECK_THROWS_AS(coa_from_cvss(5.0, 0), OutOfRange);
    CHECK_THROWS_AS(coa_from_cvss(-0.1), OutOfRange);
    CHECK_THROWS_AS(coa_from_cvss(10.1), OutOfRange);
}

TEST_CASE("native feed parses records, ranges, and summaries") {
    FeedParseResult r = parse_feed_text(read_text_file(kFixtures + "/demo.vulns"), "demo.vulns");
    CHECK(r.diagnostics.empty());
    REQUIRE(r.records.size() == 7);
    const VulnRecord* b = nullptr;
    for (const auto& rec : r.records)
        if (rec.vulnId == "VULN-B")
            b = &rec;
    REQUIRE(b);
    CHECK(b->cvssBase == 9.0);
    CHECK(b->summary.find("reflash") != std::string::npos);
    REQUIRE(b->affected.size() == 1);
    CHECK(b->affected[0].vendor == "bosch");
    CHECK_FALSE(b->affected[0].exactVersion);
    CHECK(b->affected[0].minInclusive->str() == "2.0.0");
    CHECK(b->affected[0].maxExclusive->str() == "3.0.0");
}

TEST_CASE("native feed recovers per record and reports diagnostics") {
    const std::string feed = "vuln id=GOOD cvss=5.0\n"
                             "affects vendor=v product=p version=1.0\n"
                             "vuln cvss=5.0\n"                       // missing id
                             "vuln id=BADCVSS cvss=eleven\n"         // unparseable score
                             "affects vendor=v product=p version=1.0\n"
                             "vuln id=NOAPP cvss=4.0\n"              // no applicability
                             "vuln id=BADRANGE cvss=4.0\n"
                             "affects vendor=v product=p\n"          // neither version nor range
                             "affects vendor=v product=p version=2.0\n";
    FeedParseResult r = parse_feed_text(feed, "t");
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].vulnId == "GOOD");
    CHECK(r.records[1].vulnId == "BADRANGE"); // recovered via its second applicability
    CHECK(r.diagnostics.size() >= 4);
    for (const auto& d : r.diagnostics)
        CHECK(d.severity == Diagnostic::Severity::Error);
}

TEST_CASE("native feed rejects orphaned applicability lines") {
    FeedParseResult r = parse_feed_text("affects vendor=v product=p version=1.0\n", "t");
    CHECK(r.records.empty());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].message.find("affects") != std::string::npos);
}

TEST_CASE("nvd json subset import") {
    FeedParseResult r = parse_feed(kFixtures + "/nvd_subset.json");
    REQUIRE(r.records.size() == 3);
    CHECK(r.records[0].vulnId == "CVE-2026-1001");
    CHECK(r.records[0].cvssBase == 9.8);
    CHECK(r.records[0].summary.find("Stack overflow") == 0); // picks the English description
    REQUIRE(r.records[0].affected.size() == 1);              // vulnerable=false entry dropped
    CHECK(r.records[0].affected[0].vendor == "aurix");
    CHECK(r.records[0].affected[0].exactVersion->str() == "1.0.0");

    CHECK(r.records[1].vulnId == "CVE-2026-1002");
    CHECK(r.records[1].affected[0].minInclusive->str() == "1.0.0");
    CHECK(r.records[1].affected[0].maxExclusive->str() == "2.0.0");

    // a wildcard version with no bounds applies from 0 upward
    CHECK(r.records[2].vulnId == "CVE-2026-1004");
    CHECK(r.records[2].affected[0].minInclusive->str() == "0");
    CHECK_FALSE(r.records[2].affected[0].maxExclusive);

    REQUIRE(r.diagnostics.size() == 1); // CVE-2026-1003 has no metrics
    CHECK(r.diagnostics[0].message.find("CVE-2026-1003") != std::string::npos);
}

TEST_CASE("nvd parser rejects documents without the expected shape") {
    CHECK_THROWS_AS(parse_feed_text("{ not json", "t"), ParseError);
    CHECK_THROWS_AS(parse_feed_text("{\"foo\": 1}", "t"), SchemaError);
    CHECK_THROWS_AS(parse_feed_text("{\"vulnerabilities\": 3}", "t"), SchemaError);
}

TEST_CASE("canonical store serialization round-trips") {
    FeedParseResult r = parse_feed(kFixtures + "/demo.vulns");
    std::string text = serialize_vuln_records(r.records);
    // canonical text is a fixpoint; canonically ordered records
    // round-trip as equal values
    FeedParseResult canon = parse_feed_text(text, "roundtrip");
    CHECK(canon.diagnostics.empty());
    CHECK(canon.records.size() == r.records.size());
    CHECK(serialize_vuln_records(canon.records) == text);
    FeedParseResult again = parse_feed_text(serialize_vuln_records(canon.records), "again");
    CHECK(again.records == canon.records);
}

TEST_CASE("store deduplicates ids and indexes by vendor and product") {
    std::vector<VulnRecord> records;
    VulnRecord a;
    a.vulnId = "V-1";
    a.cvssBase = 5.0;
    a.affected.push_back({"Vend", "Prod", Version::parse("1.0"), {}, {}});
    records.push_back(a);
    records.push_back(a); // duplicate id
    std::vector<Diagnostic> diags;
    VulnStore store = build_vuln_store(std::move(records), "unit", &diags);
    CHECK(store.records.size() == 1);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("V-1") != std::string::npos);
    CHECK(store.find("V-1"));
    CHECK_FALSE(store.find("V-2"));
}

TEST_CASE("match requires an identified component with a version") {
    FeedParseResult r = parse_feed(kFixtures + "/demo.vulns");
    VulnStore store = build_vuln_store(std::move(r.records));

    Component anonymous;
    anonymous.id = "ghost";
    anonymous.kind = ComponentKind::Ecu;
    ComponentMatchResult rm = match_component(anonymous, store);
    CHECK(rm.unidentified);
    CHECK(rm.matches.empty());

    Component noVersion = hinted("nx", "nxp", "s32g", "1.0.0");
    noVersion.productHint->version.reset();
    rm = match_component(noVersion, store);
    CHECK_FALSE(rm.unidentified);
    CHECK(rm.matches.empty());
}

TEST_CASE("match applies exact versions, ranges, and case folding") {
    FeedParseResult r = parse_feed(kFixtures + "/demo.vulns");
    VulnStore store = build_vuln_store(std::move(r.records));

    auto matches = match_component(hinted("gw", "AURIX", "TC397", "1.0.0"), store).matches;
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].vulnId == "VULN-GW");
    CHECK(matches[0].coa == 2);

    // range [2.0.0, 3.0.0): inclusive low edge, exclusive high edge
    CHECK(match_component(hinted("b", "bosch", "mmu5", "2.0.0"), store).matches.size() == 1);
    CHECK(match_component(hinted("b", "bosch", "mmu5", "2.9.9"), store).matches.size() == 1);
    CHECK(match_component(hinted("b", "bosch", "mmu5", "3.0.0"), store).matches.empty());
    CHECK(match_component(hinted("b", "bosch", "mmu5", "1.9.9"), store).matches.empty());

    CHECK(match_component(hinted("gw", "aurix", "tc397", "1.0.1"), store).matches.empty());
    CHECK(match_component(hinted("gw", "aurix", "tc399", "1.0.0"), store).matches.empty());
}

TEST_CASE("matches sort by ascending cost of attack") {
    std::vector<VulnRecord> records;
    for (int i = 0; i < 3; ++i) {
        VulnRecord v;
        v.vulnId = "V-" + std::to_string(i);
        v.cvssBase = 7.0 + i;                                       // coas 30, 20, 10
        v.affected.push_back({"v", "p", Version::parse("1.0"), {}, {}});
        records.push_back(v);
    }
    VulnStore store = build_vuln_store(std::move(records));
    auto matches = match_component(hinted("c", "v", "p", "1.0"), store).matches;
    REQUIRE(matches.size() == 3);
    CHECK(matches[0].vulnId == "V-2");
    CHECK(matches[0].coa == 10);
    CHECK(matches[2].vulnId == "V-0");
    CHECK(matches[2].coa == 30);
}

TEST_CASE("variant-set annotation yields the demonstrator costs") {
    VariantSet vs = load_variant_set({kFixtures + "/demo_v1.sutm", kFixtures + "/demo_v2.sutm",
                                      kFixtures + "/demo_v3.sutm"});
    FeedParseResult r = parse_feed(kFixtures + "/demo.vulns");
    VulnStore store = build_vuln_store(std::move(r.records));
    AnnotationMap ann = annotate_variant_set(vs, store);

    auto coa = [&](const std::string& id) {
        REQUIRE(ann.count(id));
        REQUIRE_FALSE(ann.at(id).empty());
        return ann.at(id).front().coa;
    };
    CHECK(coa("gw") == 2);
    CHECK(coa("b") == 10);
    CHECK(coa("m") == 17);
    CHECK(coa("c") == 15);
    CHECK(coa("x") == 5);
    CHECK(coa("y") == 4);
    CHECK(coa("t") == 2);
}
