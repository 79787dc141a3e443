// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "autosec/fingerprint.hpp"
#include "support/test_oracles.hpp"

using namespace autosec;

namespace {

const std::string kFixtures = AUTOSEC_FIXTURE_DIR;

MessageTrace synthetic_trace(std::uint32_t arbId, double period, double ppm, int count,
                             double noiseSigma = 0.0, std::uint32_t seed = 0) {
    MessageTrace trace;
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, noiseSigma);
    for (int i = 0; i < count; ++i) {
        TraceRecord r;
        r.timestamp = i * period * (1.0 + ppm * 1e-6);
        if (noiseSigma > 0)
            r.timestamp += noise(rng);
        r.arbitrationId = arbId;
        trace.records.push_back(r);
    }
    std::sort(trace.records.begin(), trace.records.end(),
              [](const TraceRecord& a, const TraceRecord& b) { return a.timestamp < b.timestamp; });
    return trace;
}

} // namespace

// --------------------------------------------------------------- trace input

TEST_CASE("trace parser reads candump-style lines") {
    MessageTrace t = parse_trace("# header\n0.000 0x123 DEADBEEF\n0.010 291 -\n0.020 0x7df 0011\n", "t");
    REQUIRE(t.records.size() == 3);
    CHECK(t.records[0].arbitrationId == 0x123);
    CHECK(t.records[0].payload == std::vector<std::uint8_t>{0xDE, 0xAD, 0xBE, 0xEF});
    CHECK(t.records[1].arbitrationId == 291); // decimal
    CHECK(t.records[1].payload.empty());
    CHECK(t.records[2].timestamp == Catch::Approx(0.020));
}

TEST_CASE("trace parser rejects malformed records") {
    CHECK_THROWS_AS(parse_trace("0.0 0x1 00\n-0.5 0x1 00\n", "t"), ParseError);     // decreasing time
    CHECK_THROWS_AS(parse_trace("0.0 0x1 001\n", "t"), ParseError);                 // odd hex digits
    CHECK_THROWS_AS(parse_trace("0.0 0x1 00112233445566778899\n", "t"), ParseError); // > 8 bytes
    CHECK_THROWS_AS(parse_trace("0.0 zz 00\n", "t"), ParseError);                   // bad id
    CHECK_THROWS_AS(parse_trace("0.0 0x1\n", "t"), ParseError);                     // missing payload field
}

// --------------------------------------------------------------- clock skew

TEST_CASE("noiseless drift is recovered exactly against the nominal period") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> periodDist(0.001, 0.1);
    std::uniform_real_distribution<double> ppmDist(-500.0, 500.0);
    for (int i = 0; i < 50; ++i) {
        const double period = periodDist(rng);
        const double ppm = ppmDist(rng);
        MessageTrace trace = synthetic_trace(0x10, period, ppm, 200);
        ClockSkewEstimate est = estimate_clock_skew(trace, 0x10, period);
        CHECK(std::abs(est.skewPpm - ppm) < 1e-6);
        CHECK(est.sampleCount == 200);
    }
}

TEST_CASE("noisy drift estimate stays within five ppm") {
    MessageTrace trace = synthetic_trace(0x10, 0.010, 50.0, 10000, 0.0001, 42);
    ClockSkewEstimate est = estimate_clock_skew(trace, 0x10, 0.010);
    CHECK(std::abs(est.skewPpm - 50.0) < 5.0);
    CHECK(est.residualRms > 0.0);
}

TEST_CASE("skew estimation filters by arbitration id") {
    MessageTrace a = synthetic_trace(0x10, 0.010, 120.0, 60);
    MessageTrace b = synthetic_trace(0x20, 0.007, -80.0, 60);
    MessageTrace mixed;
    mixed.records.insert(mixed.records.end(), a.records.begin(), a.records.end());
    mixed.records.insert(mixed.records.end(), b.records.begin(), b.records.end());
    std::sort(mixed.records.begin(), mixed.records.end(),
              [](const TraceRecord& x, const TraceRecord& y) { return x.timestamp < y.timestamp; });
    CHECK(std::abs(estimate_clock_skew(mixed, 0x10, 0.010).skewPpm - 120.0) < 1e-6);
    CHECK(std::abs(estimate_clock_skew(mixed, 0x20, 0.007).skewPpm + 80.0) < 1e-6);
}

TEST_CASE("without a nominal period the median inter-arrival absorbs pure drift") {
    MessageTrace trace = synthetic_trace(0x10, 0.010, 120.0, 60);
    ClockSkewEstimate est = estimate_clock_skew(trace, 0x10);
    CHECK(std::abs(est.skewPpm) < 1e-6);
}

TEST_CASE("skew estimation preconditions") {
    MessageTrace nine = synthetic_trace(0x10, 0.01, 0.0, 9);
    CHECK_THROWS_AS(estimate_clock_skew(nine, 0x10), InsufficientSamples);
    MessageTrace other = synthetic_trace(0x99, 0.01, 0.0, 50);
    CHECK_THROWS_AS(estimate_clock_skew(other, 0x10), InsufficientSamples);
    MessageTrace ten = synthetic_trace(0x10, 0.01, 0.0, 10);
    CHECK_NOTHROW(estimate_clock_skew(ten, 0x10));
    CHECK_THROWS_AS(estimate_clock_skew(ten, 0x10, 0.0), ZeroPeriod);
    CHECK_THROWS_AS(estimate_clock_skew(ten, 0x10, -1.0), ZeroPeriod);
    // all records share one timestamp -> median inter-arrival is zero
    MessageTrace flat;
    for (int i = 0; i < 12; ++i)
        flat.records.push_back({1.0, 0x10, {}});
    CHECK_THROWS_AS(estimate_clock_skew(flat, 0x10), ZeroPeriod);
}

TEST_CASE("fixture trace matches its generator parameters") {
    MessageTrace t = load_trace(kFixtures + "/skew_mixed.log");
    ClockSkewEstimate est = estimate_clock_skew(t, 0x123, 0.010);
    CHECK(std::abs(est.skewPpm - 120.0) < 1e-3); // fixture stores 9 decimal places
    CHECK(est.sampleCount == 60);
}

// ----------------------------------------------------------------- features

TEST_CASE("features of 1,2,3,4 match hand computation") {
    FeatureVector f = extract_features({{1, 2, 3, 4}, 0});
    CHECK(f.mean == Catch::Approx(2.5));
    CHECK(f.stddev == Catch::Approx(std::sqrt(1.25)));
    CHECK(f.meanAbsDev == Catch::Approx(1.0));
    CHECK(f.rms == Catch::Approx(std::sqrt(7.5)));
    CHECK(f.skewness == Catch::Approx(0.0).margin(1e-12));
    CHECK(f.excessKurtosis == Catch::Approx(-1.36));
    CHECK(f.min == 1.0);
    CHECK(f.max == 4.0);
}

TEST_CASE("constant series has zero spread and zero shape") {
    FeatureVector f = extract_features({{3.3, 3.3, 3.3}, 0});
    CHECK(f.stddev == 0.0);
    CHECK(f.meanAbsDev == 0.0);
    CHECK(f.skewness == 0.0);
    CHECK(f.excessKurtosis == 0.0);
    CHECK(f.mean == Catch::Approx(3.3));
}

TEST_CASE("empty series is rejected") {
    CHECK_THROWS_AS(extract_features({{}, 0}), EmptySeries);
}

TEST_CASE("sample series loader skips comments and blanks") {
    SignalSampleSeries s = load_sample_series(kFixtures + "/samples_a.txt");
    CHECK(s.values == std::vector<double>{1, 2, 3, 4});
}

// ----------------------------------------------------------------- matching

TEST_CASE("signature matching scores by fraction of satisfied intervals") {
    SignatureDb db = load_signature_db(kFixtures + "/ecu.sigdb");
    Observation obs;
    obs.features = extract_features({{1, 2, 3, 4}, 0});
    obs.skewPpm = 120.0;
    auto matches = match_signature(obs, db);
    REQUIRE(matches.size() == 3);
    // two perfect scores; the narrower total interval width wins the tie
    CHECK(matches[0].identity.vendor == "renesas");
    CHECK(matches[0].score == Catch::Approx(1.0));
    CHECK(matches[1].identity.vendor == "vector");
    CHECK(matches[1].score == Catch::Approx(1.0));
    CHECK(matches[2].identity.vendor == "nxp");
    CHECK(matches[2].score == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("declared intervals without an observed value count against the score") {
    SignatureDb db = parse_signature_db("signature vendor=v product=p skew=0:10 mean=0:10\n", "t");
    Observation obs;
    obs.features = extract_features({{5, 5}, 0}); // no skew observed
    auto matches = match_signature(obs, db);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].score == Catch::Approx(0.5));
}

TEST_CASE("zero-score candidates are omitted and empty observations rejected") {
    SignatureDb db = parse_signature_db("signature vendor=v product=p skew=0:10\n", "t");
    Observation none;
    CHECK_THROWS_AS(match_signature(none, db), EmptyObservation);
    Observation off;
    off.skewPpm = 99.0;
    CHECK(match_signature(off, db).empty());
}

TEST_CASE("signature db parsing rejects defects") {
    CHECK_THROWS_AS(parse_signature_db("signature vendor=v product=p\n", "t"), ParseError); // no intervals
    CHECK_THROWS_AS(parse_signature_db("signature vendor=v product=p skew=10:0\n", "t"), ParseError);
    CHECK_THROWS_AS(parse_signature_db("signature vendor=v product=p skew=1:2\n"
                                       "signature vendor=v product=p mean=0:1\n",
                                       "t"),
                    ParseError); // duplicate identity
}

// --------------------------------------------------------------- probe plans

TEST_CASE("probe plans cover all tuples at strengths one to three") {
    std::vector<ProbeParameter> params = parse_probe_parameters(read_text_file(kFixtures + "/probe_params.txt"),
                                                                "probe_params.txt");
    REQUIRE(params.size() == 3);
    std::size_t product = 1;
    for (const auto& p : params)
        product *= p.values.size();

    for (int t = 1; t <= 3; ++t) {
        ProbePlan plan = generate_probe_plan(params, t);
        INFO("strength " << t);
        CHECK(oracles::covers_all_tuples(params, plan, t));
        CHECK(plan.rows.size() <= product);
        if (t < 3)
            CHECK(plan.rows.size() < product); // strictly below the full product
        else
            CHECK(plan.rows.size() == product); // t == k degenerates to the product
    }
}

TEST_CASE("probe plan over a single parameter lists each value once") {
    ProbePlan plan = generate_probe_plan({{"p", {"a", "b", "c"}}}, 1);
    REQUIRE(plan.rows.size() == 3);
    CHECK(plan.rows[0] == std::vector<std::string>{"a"});
    CHECK(plan.rows[2] == std::vector<std::string>{"c"});
}

TEST_CASE("probe plan input validation") {
    std::vector<ProbeParameter> params{{"a", {"1", "2"}}, {"b", {"x"}}};
    CHECK_THROWS_AS(generate_probe_plan(params, 0), InvalidStrength);
    CHECK_THROWS_AS(generate_probe_plan(params, 3), InvalidStrength);
    CHECK_THROWS_AS(generate_probe_plan({}, 1), InvalidStrength);
    CHECK_THROWS_AS(generate_probe_plan({{"a", {}}}, 1), ValidationError);
    CHECK_THROWS_AS(generate_probe_plan({{"a", {"1", "1"}}}, 1), ValidationError);
    CHECK_THROWS_AS(generate_probe_plan({{"a", {"1"}}, {"a", {"2"}}}, 1), ValidationError);
}

TEST_CASE("probe plan generation is deterministic") {
    std::vector<ProbeParameter> params{{"a", {"1", "2", "3"}}, {"b", {"x", "y"}}, {"c", {"p", "q"}}};
    ProbePlan p1 = generate_probe_plan(params, 2);
    ProbePlan p2 = generate_probe_plan(params, 2);
    CHECK(p1.rows == p2.rows);
    CHECK(serialize_probe_plan(p1) == serialize_probe_plan(p2));
}

// ------------------------------------------------------------- fingerprint diff

TEST_CASE("fingerprint diff classifies added, removed, and changed") {
    FingerprintReport before = load_fingerprint_report(kFixtures + "/fp_before.fpr");
    FingerprintReport after = load_fingerprint_report(kFixtures + "/fp_after.fpr");
    FingerprintDelta d = diff_fingerprints(before, after);
    CHECK(d.added == std::vector<std::string>{"z"});
    CHECK(d.removed == std::vector<std::string>{"x"});
    REQUIRE(d.changed.size() == 1);
    CHECK(d.changed[0].first == "gw");
    CHECK(d.changed[0].second == std::vector<std::string>{"mean"});
}

TEST_CASE("fingerprint diff respects epsilon and one-sided keys") {
    FingerprintReport a, b;
    a.subjects["s"] = {{"mean", 1.0}, {"rms", 2.0}};
    b.subjects["s"] = {{"mean", 1.0 + 1e-12}, {"stddev", 3.0}};
    FingerprintDelta d = diff_fingerprints(a, b);
    REQUIRE(d.changed.size() == 1);
    // mean is within epsilon; rms vanished and stddev appeared
    CHECK(d.changed[0].second == std::vector<std::string>{"rms", "stddev"});
    FingerprintDelta strict = diff_fingerprints(a, b, 1e-13);
    CHECK(strict.changed[0].second == std::vector<std::string>{"mean", "rms", "stddev"});
}

TEST_CASE("identical reports produce an empty delta") {
    FingerprintReport r = load_fingerprint_report(kFixtures + "/fp_before.fpr");
    FingerprintDelta d = diff_fingerprints(r, r);
    CHECK(d.added.empty());
    CHECK(d.removed.empty());
    CHECK(d.changed.empty());
}
