#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "forge/detection.hpp"
#include "forge/errors.hpp"
#include "forge/plant_sim.hpp"
#include "forge/util.hpp"

using namespace forge;
using namespace forge::detect;
using invariant::Assessment;
using invariant::InvariantTable;

static const std::filesystem::path kData = FORGE_DATA_DIR;

namespace {

ml::StateExpression expr(std::initializer_list<std::pair<std::string, std::string>> a) {
    ml::StateExpression e;
    for (const auto& [c, s] : a) e.assignments.emplace_back(c, s);
    return e;
}

// Stage-1 checker: the four-row table, decision tree, plant thresholds.
ml::Checker stage1_checker() {
    auto t = InvariantTable::enumerate(
        {{"MV-101", {"Closed", "Open"}}, {"LIT-101", {"Low", "High"}}}, "invariant-1", "FR7.1.1");
    t = t.labeled(expr({{"MV-101", "Closed"}, {"LIT-101", "Low"}}), Assessment::Anomaly);
    t = t.labeled(expr({{"MV-101", "Closed"}, {"LIT-101", "High"}}), Assessment::Normal);
    t = t.labeled(expr({{"MV-101", "Open"}, {"LIT-101", "Low"}}), Assessment::Normal);
    t = t.labeled(expr({{"MV-101", "Open"}, {"LIT-101", "High"}}), Assessment::Anomaly);

    ml::Checker c;
    c.invariantId = "invariant-1";
    c.features = t.variables();
    c.model = ml::train_decision_tree(ml::TrainingSet::from_table(t));
    c.discretizers = {detect::make_switch("MV-101", "Closed", "Open"),
                      detect::make_binary_level("LIT-101", 800)};
    return c;
}

} // namespace

TEST_CASE("ladder and binary discretization") {
    const auto ladder = make_ladder("LIT-101", 250, 500, 800, 1200);
    CHECK(ladder.discretize_value(100) == "LowLow");
    CHECK(ladder.discretize_value(250) == "LowLow");
    CHECK(ladder.discretize_value(251) == "Low");
    CHECK(ladder.discretize_value(500) == "Low");
    CHECK(ladder.discretize_value(650) == "Mid");
    CHECK(ladder.discretize_value(799.999) == "Mid");
    CHECK(ladder.discretize_value(800) == "High");
    CHECK(ladder.discretize_value(1199) == "High");
    CHECK(ladder.discretize_value(1200) == "HighHigh");

    const auto binary = make_binary_level("LIT-101", 800);
    CHECK(binary.discretize_value(850) == "High");
    CHECK(binary.discretize_value(800) == "High"); // boundary leans high
    CHECK(binary.discretize_value(799.999) == "Low");

    CHECK_THROWS_AS((void)make_ladder("X", 500, 250, 800, 1200), ValidationError);
}

TEST_CASE("switch discretization and error paths") {
    const auto sw = make_switch("MV-101", "Closed", "Open");
    CHECK(sw.discretize("2") == "Open");
    CHECK(sw.discretize("1") == "Closed");
    CHECK(sw.discretize(" 2 ") == "Open");
    CHECK_THROWS_AS((void)sw.discretize("0"), ValidationError);
    CHECK_THROWS_AS((void)sw.discretize("7"), ValidationError);

    const auto binary = make_binary_level("LIT-101", 800);
    CHECK_THROWS_AS((void)binary.discretize("n/a"), ValidationError);
}

TEST_CASE("trace parsing matches columns loosely and labels tolerantly") {
    const std::string csv =
        " Timestamp , FIT 101 ,LIT101,MV101, P101 ,Normal/Attack\n"
        "2026-01-01T00:00:00,2.000,500.100,2,2,Normal\n"
        "2026-01-01T00:00:01,2.000,502.200,2,2,A ttack\n"
        "2026-01-01T00:00:02,2.000,504.100,2,2,ATTACK\n";
    const auto trace = parse_trace(csv, "t");
    CHECK(trace.size() == 3);
    CHECK(trace.find_column("LIT-101").has_value());
    CHECK(trace.find_column("FIT-101").has_value());
    CHECK(!trace.find_column("LIT-301").has_value());
    CHECK(trace.labelColumn == 5);
    CHECK(!trace.is_attack(0));
    CHECK(trace.is_attack(1)); // the dataset's split-word quirk
    CHECK(trace.is_attack(2));

    CHECK_THROWS_AS((void)parse_trace("", "t"), ParseError);
    CHECK_THROWS_AS((void)parse_trace("A,B\n1\n", "t"), ParseError); // ragged row
}

TEST_CASE("check_stream on a handwritten trace") {
    const std::string csv = "Timestamp,LIT101,MV101,Normal/Attack\n"
                            "t0,500.0,2,Normal\n"  // open, low: fine
                            "t1,820.0,1,Normal\n"  // closed, high: fine
                            "t2,820.0,2,Attack\n"  // open, high: alarm
                            "t3,400.0,1,Attack\n"; // closed, low: alarm
    const auto trace = parse_trace(csv, "t");
    const auto [alerts, report] = check_stream({stage1_checker()}, trace);

    REQUIRE(alerts.size() == 2);
    CHECK(alerts[0].recordIndex == 2);
    CHECK(alerts[0].timestamp == "t2");
    CHECK(alerts[0].invariantId == "invariant-1");
    CHECK(alerts[0].expression.to_string() == "MV-101=Open LIT-101=High");
    CHECK(alerts[1].recordIndex == 3);

    REQUIRE(report.checkers.size() == 1);
    const auto& r = report.checkers[0];
    CHECK(r.records == 4);
    CHECK(r.alerts == 2);
    CHECK(r.truePositives == 2);
    CHECK(r.trueNegatives == 2);
    CHECK(r.falsePositives == 0);
    CHECK(r.falseNegatives == 0);
    CHECK(r.accuracy == doctest::Approx(1.0));
    CHECK(r.attackWindowAccuracy == doctest::Approx(1.0));
    REQUIRE(r.detectionLatency.has_value());
    CHECK(*r.detectionLatency == 0);

    CHECK(latency(alerts, trace) == std::optional<std::int64_t>(0));
}

TEST_CASE("confusion counts always sum to the record count") {
    const auto config = sim::default_config();
    const auto records = sim::simulate(config, sim::load_scenario(kData / "attack1.json"), 7000, 5);
    const auto trace = parse_trace(sim::trace_to_csv(records, config.dt), "t");
    const auto [alerts, report] = check_stream({stage1_checker()}, trace);
    const auto& r = report.checkers[0];
    CHECK(r.truePositives + r.trueNegatives + r.falsePositives + r.falseNegatives == r.records);
    const double errorRate =
        static_cast<double>(r.falsePositives + r.falseNegatives) / r.records;
    CHECK(r.accuracy + errorRate == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("statelessness: checking a concatenation equals concatenating the checks") {
    const std::string head = "Timestamp,LIT101,MV101,Normal/Attack\n";
    const std::string part1 = "t0,500.0,2,Normal\nt1,820.0,2,Attack\n";
    const std::string part2 = "t2,400.0,1,Normal\nt3,820.0,1,Normal\n";

    const auto checker = stage1_checker();
    const auto [alerts1, r1] = check_stream({checker}, parse_trace(head + part1, "t"));
    const auto [alerts2, r2] = check_stream({checker}, parse_trace(head + part2, "t"));
    const auto [alertsAll, rAll] = check_stream({checker}, parse_trace(head + part1 + part2, "t"));

    REQUIRE(alertsAll.size() == alerts1.size() + alerts2.size());
    for (size_t i = 0; i < alerts1.size(); ++i)
        CHECK(alertsAll[i].recordIndex == alerts1[i].recordIndex);
    for (size_t i = 0; i < alerts2.size(); ++i)
        CHECK(alertsAll[alerts1.size() + i].recordIndex == alerts2[i].recordIndex + 2);
    CHECK(rAll.checkers[0].alerts == r1.checkers[0].alerts + r2.checkers[0].alerts);
}

TEST_CASE("missing column for a checker component") {
    const auto trace = parse_trace("Timestamp,LIT101,Normal/Attack\nt0,500.0,Normal\n", "t");
    CHECK_THROWS_WITH_AS((void)check_stream({stage1_checker()}, trace),
                         "trace has no column for component MV-101", ValidationError);
}

TEST_CASE("latency without attacks or without alerts") {
    const auto trace = parse_trace("Timestamp,LIT101,MV101,Normal/Attack\nt0,500.0,2,Normal\n", "t");
    const auto [alerts, report] = check_stream({stage1_checker()}, trace);
    CHECK(alerts.empty());
    CHECK(!report.checkers[0].detectionLatency.has_value());
    CHECK(!latency(alerts, trace).has_value());

    const auto undetected =
        parse_trace("Timestamp,LIT101,MV101,Normal/Attack\nt0,820.0,1,Attack\n", "t");
    const auto [a2, r2] = check_stream({stage1_checker()}, undetected);
    CHECK(a2.empty());
    CHECK(!r2.checkers[0].detectionLatency.has_value());
}

TEST_CASE("alerts csv and report json round-trip") {
    const std::string csv = "Timestamp,LIT101,MV101,Normal/Attack\n"
                            "t0,820.0,2,Attack\n"
                            "t1,500.0,2,Normal\n";
    const auto trace = parse_trace(csv, "t");
    const auto [alerts, report] = check_stream({stage1_checker()}, trace);

    const auto alertCsv = alerts_to_csv(alerts);
    CHECK(alertCsv.find("timestamp,invariantId,expression,recordIndex") == 0);
    CHECK(alertCsv.find("t0,invariant-1,MV-101=Open LIT-101=High,0") != std::string::npos);

    const auto tmp = std::filesystem::temp_directory_path() / "forge_report.json";
    write_report(report, tmp);
    const auto reloaded = load_report(tmp);
    CHECK(reloaded.records == report.records);
    REQUIRE(reloaded.checkers.size() == 1);
    CHECK(reloaded.checkers[0].accuracy == doctest::Approx(report.checkers[0].accuracy));
    CHECK(reloaded.checkers[0].alerts == report.checkers[0].alerts);
    CHECK(reloaded.checkers[0].detectionLatency == report.checkers[0].detectionLatency);
    std::filesystem::remove(tmp);
}

TEST_CASE("a real historian-layout header parses and checks end to end") {
    // Layout mirroring the public dataset: padded names, full column set.
    std::string csv =
        " Timestamp,FIT101,LIT101,MV101,P101,P102,AIT201,AIT202,AIT203,FIT201,MV201,P201,"
        "P202,P203,P204,P205,P206,DPIT301,FIT301,LIT301,MV301,MV302,MV303,MV304,P301,P302,"
        "AIT401,AIT402,FIT401,LIT401,P401,P402,P403,P404,UV401,AIT501,AIT502,AIT503,AIT504,"
        "FIT501,FIT502,FIT503,FIT504,P501,P502,PIT501,PIT502,PIT503,FIT601,P601,P602,P603,"
        "Normal/Attack\n";
    for (int i = 0; i < 4; ++i) {
        csv += "28/12/2015 10:00:0" + std::to_string(i) + " AM";
        csv += ",2.47,523.8," + std::string(i % 2 ? "2" : "1") + ",2,1,244.3,8.19,306.1,2.45,2";
        for (int k = 0; k < 6; ++k) csv += ",1";
        csv += ",2.6,2.44,831.1,1,2,1,1,2,1,148.8,172.9,2.43,801.2,2,1,1,1,2,7.2,189.5,260.3,";
        csv += "11.3,1.72,1.28,0.63,0.31,2,1,10.0,2.1,1.1,0.0001,1,1,1,Normal\n";
    }
    const auto trace = parse_trace(csv, "swat-sample");
    CHECK(trace.size() == 4);
    const auto [alerts, report] = check_stream({stage1_checker()}, trace);
    CHECK(report.checkers[0].records == 4);
    // 523.8 is below the high marker: open rows are fine, closed rows alarm.
    CHECK(report.checkers[0].alerts == 2);
}
