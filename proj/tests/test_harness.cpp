#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qkdlab/harness.hpp"

using qkd::ScenarioReport;
using qkd::SessionConfig;

namespace {

SessionConfig quiet_config(std::uint64_t pulses, std::uint64_t seed, const std::string& extra = "") {
    std::string text = R"({"num_pulses": )" + std::to_string(pulses) +
                       R"(, "seed": )" + std::to_string(seed) + R"(,
        "detectors": {"d0": {"dark_count_prob": 0.0, "efficiency": {"peak": 1.0},
                             "jitter_sigma": 0.1},
                      "d1": {"dark_count_prob": 0.0, "efficiency": {"peak": 1.0},
                             "jitter_sigma": 0.1}})" +
                       extra + "}";
    return qkd::parse_config(text);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool same_aggregate(const qkd::Aggregate& a, const qkd::Aggregate& b) {
    return a.mean_qber == b.mean_qber && a.mean_detection_rate == b.mean_detection_rate &&
           a.mean_sift_fraction == b.mean_sift_fraction &&
           a.mean_eve_known_fraction == b.mean_eve_known_fraction &&
           a.mean_timing_info_bits == b.mean_timing_info_bits &&
           a.mean_final_key_bits == b.mean_final_key_bits && a.qber_trials == b.qber_trials &&
           a.aborted_trials == b.aborted_trials;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("reports do not depend on the number of worker threads") {
    const SessionConfig cfg = quiet_config(4000, 8801, R"(,
        "eve": {"strategy": "intercept_resend"})");
    const ScenarioReport serial = qkd::run_scenario(cfg, 6, 1);
    const ScenarioReport parallel = qkd::run_scenario(cfg, 6, 4);

    REQUIRE(serial.per_trial.size() == 6);
    REQUIRE(parallel.per_trial.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(serial.per_trial[i].trial == i);
        CHECK(serial.per_trial[i].stats.qber == parallel.per_trial[i].stats.qber);
        CHECK(serial.per_trial[i].stats.eve_known_fraction ==
              parallel.per_trial[i].stats.eve_known_fraction);
        CHECK(serial.per_trial[i].stats.pulses_detected ==
              parallel.per_trial[i].stats.pulses_detected);
        CHECK(serial.per_trial[i].timing_info_bits == parallel.per_trial[i].timing_info_bits);
    }
    CHECK(same_aggregate(serial.aggregate, parallel.aggregate));
    CHECK(serial.config_hash == parallel.config_hash);
    CHECK(serial.first.sifted.size() == parallel.first.sifted.size());

    // an intercept-resend run aborts every trial
    CHECK(serial.any_abort);
    CHECK(serial.aggregate.aborted_trials == 6);
    CHECK(serial.aggregate.qber_trials == 6);
}

TEST_CASE("summary files are byte-identical across reruns") {
    const SessionConfig cfg = quiet_config(2000, 8802);
    qkd::write_summary_json("harness_test_summary_a.json", qkd::run_scenario(cfg, 3, 2));
    qkd::write_summary_json("harness_test_summary_b.json", qkd::run_scenario(cfg, 3, 3));
    const std::string a = slurp("harness_test_summary_a.json");
    CHECK(a == slurp("harness_test_summary_b.json"));

    // and the provenance block pins what produced the numbers
    const nlohmann::json j = nlohmann::json::parse(a);
    CHECK(j.at("provenance").at("config_hash") == qkd::config_hash(cfg));
    CHECK(j.at("provenance").at("seed") == 8802);
    CHECK(j.at("provenance").at("trials") == 3);
    CHECK(j.at("provenance").at("version") == qkd::kVersion);
    CHECK(j.at("aggregate").at("any_abort") == false);
    CHECK(j.at("trials").size() == 3);
}

TEST_CASE("event dumps round-trip through the csv reader") {
    const SessionConfig cfg = quiet_config(1500, 8803);
    const ScenarioReport report = qkd::run_scenario(cfg, 1, 1);
    qkd::write_events_csv("harness_test_events.csv", report.first);

    const auto expected = qkd::events_from_bob(report.first.bob);
    const auto loaded = qkd::read_events_csv("harness_test_events.csv");
    REQUIRE(loaded.size() == expected.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].slot == expected[i].slot);
        CHECK(loaded[i].basis == expected[i].basis);
        CHECK(loaded[i].detector == expected[i].detector);
        // the file stores nine decimals
        CHECK(std::fabs(loaded[i].timestamp - expected[i].timestamp) < 1e-9);
    }

    CHECK_THROWS_AS((void)qkd::read_events_csv("harness_test_missing.csv"), std::exception);
}

TEST_CASE("eve log dumps carry one row per touched slot") {
    const SessionConfig cfg = quiet_config(500, 8804, R"(,
        "eve": {"strategy": "intercept_resend"})");
    const ScenarioReport report = qkd::run_scenario(cfg, 1, 1);
    qkd::write_eve_csv("harness_test_eve.csv", report.first.eve_log);
    const std::string text = slurp("harness_test_eve.csv");
    std::istringstream lines(text);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "slot,action,basis,guess,aux");
    std::size_t rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == report.first.eve_log.entries().size());
    CHECK(rows == 500); // lossless channel, every slot intercepted
}

TEST_CASE("sweeping a parameter at its current value reproduces the baseline") {
    const SessionConfig base = quiet_config(2000, 8805);
    const auto points =
        qkd::run_sweep(base, "schedule.gate_offset_d1", {0.0, 0.6}, 2, 2);
    REQUIRE(points.size() == 2);
    CHECK(points[0].value == 0.0);
    CHECK(same_aggregate(points[0].aggregate, qkd::run_scenario(base, 2, 2).aggregate));
    // moving the D1 gate off the light costs detections
    CHECK(points[1].aggregate.mean_detection_rate < points[0].aggregate.mean_detection_rate);
}

TEST_CASE("sweeps keep unsigned fields unsigned") {
    const SessionConfig base = quiet_config(2000, 8806);
    const auto points = qkd::run_sweep(base, "num_pulses", {250.0}, 1, 1);
    REQUIRE(points.size() == 1);
    // the mutated config passed the strict parser, so the run really used
    // 250 pulses
    CHECK(points[0].aggregate.mean_detection_rate == 1.0);
    CHECK(points[0].aggregate.mean_final_key_bits < 250.0);
}

TEST_CASE("bad sweep paths and values fail loudly") {
    const SessionConfig base = quiet_config(100, 8807);
    try {
        (void)qkd::run_sweep(base, "schedule.bogus", {0.1}, 1, 1);
        FAIL("expected ConfigError");
    } catch (const qkd::ConfigError& e) {
        CHECK(std::string(e.what()).find("does not name a field") != std::string::npos);
    }
    CHECK_THROWS_AS((void)qkd::run_sweep(base, "channel.loss_prob", {2.0}, 1, 1),
                    qkd::ConfigError);
    CHECK_THROWS_AS((void)qkd::run_sweep(base, "", {0.1}, 1, 1), std::invalid_argument);
}

TEST_CASE("sweep csv lists one row per point under a parameter header") {
    const SessionConfig base = quiet_config(400, 8808);
    const auto points = qkd::run_sweep(base, "channel.loss_prob", {0.0, 0.5}, 1, 1);
    qkd::write_sweep_csv("harness_test_sweep.csv", "channel.loss_prob", points);
    const std::string text = slurp("harness_test_sweep.csv");
    std::istringstream lines(text);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "channel.loss_prob,mean_qber,mean_eve_known_fraction,mean_detection_rate,"
                  "mean_timing_info_bits,aborted_trials");
    std::size_t rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("calibration json round-trips into a gate schedule") {
    qkd::CalibrationResult res;
    res.offset_d0 = -0.2;
    res.offset_d1 = 0.2;
    res.offsets = {-0.2, 0.0, 0.2};
    res.expected_d0 = {1.0, 2.0, 3.0};
    res.expected_d1 = {3.0, 2.0, 1.0};
    qkd::write_calibration_json("harness_test_calibration.json", res);
    qkd::write_calibration_scan_csv("harness_test_scan.csv", res);

    qkd::GateSchedule sched;
    qkd::load_gate_offsets("harness_test_calibration.json", sched);
    CHECK(sched.gate_offset_d0 == -0.2);
    CHECK(sched.gate_offset_d1 == 0.2);

    const nlohmann::json j = nlohmann::json::parse(slurp("harness_test_calibration.json"));
    CHECK(j.at("separation").get<double>() == doctest::Approx(0.4).epsilon(1e-12));

    std::istringstream lines(slurp("harness_test_scan.csv"));
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "offset,expected_d0,expected_d1");
}

TEST_CASE("timing artifacts use the documented layouts") {
    const SessionConfig cfg = quiet_config(800, 8809);
    const ScenarioReport report = qkd::run_scenario(cfg, 1, 1);
    const auto events = qkd::events_from_bob(report.first.bob);

    qkd::write_histograms_csv("harness_test_hist.csv", qkd::build_histograms(events, 0.05));
    std::istringstream lines(slurp("harness_test_hist.csv"));
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "bin_start,z_d0,z_d1,x_d0,x_d1");

    qkd::write_analysis_json("harness_test_analysis.json", qkd::analyze_timing(events), 0.0);
    const nlohmann::json j = nlohmann::json::parse(slurp("harness_test_analysis.json"));
    CHECK(j.at("events").get<std::size_t>() == events.size());
    CHECK(j.at("basis").contains("Z"));
    CHECK(j.at("basis").contains("X"));
    CHECK(j.at("basis").at("Z").contains("info_bits"));
}

} // TEST_SUITE
