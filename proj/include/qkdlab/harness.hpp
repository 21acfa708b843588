#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkdlab/calibration.hpp"
#include "qkdlab/config.hpp"
#include "qkdlab/protocol.hpp"
#include "qkdlab/timing.hpp"

namespace qkd {

inline constexpr const char* kVersion = "1.0.0";

struct TrialResult {
    std::uint64_t trial = 0;
    RunStats stats;
    double timing_info_bits = 0.0;
};

struct Aggregate {
    double mean_qber = 0.0; // over the trials where a QBER existed
    double mean_detection_rate = 0.0;
    double mean_sift_fraction = 0.0;
    double mean_eve_known_fraction = 0.0;
    double mean_timing_info_bits = 0.0;
    double mean_final_key_bits = 0.0;
    std::uint64_t qber_trials = 0;
    std::uint64_t aborted_trials = 0;
};

struct ScenarioReport {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    std::vector<TrialResult> per_trial;
    Aggregate aggregate;
    bool any_abort = false;
    SessionResult first; // full trace of trial 0, for the event dumps
};

// Run `trials` independent sessions of one scenario across `jobs` threads.
// Every trial builds its own strategy instance (strategies carry per-session
// state) and its own seed-derived streams, so the report is identical for
// any job count.
ScenarioReport run_scenario(const SessionConfig& cfg, std::uint64_t trials, unsigned jobs);

struct SweepPoint {
    double value = 0.0;
    Aggregate aggregate;
};

// Re-run the scenario with the field at `param_path` (dot separated, e.g.
// "schedule.gate_offset_d1") set to each value. The mutated config passes
// through the strict parser again, so a bad path or an out-of-range value
// fails loudly instead of running the baseline.
std::vector<SweepPoint> run_sweep(const SessionConfig& base, const std::string& param_path,
                                  const std::vector<double>& values, std::uint64_t trials,
                                  unsigned jobs);

void write_events_csv(const std::string& path, const SessionResult& result);
void write_eve_csv(const std::string& path, const EveLog& log);
void write_summary_json(const std::string& path, const ScenarioReport& report);
void write_sweep_csv(const std::string& path, const std::string& param_path,
                     const std::vector<SweepPoint>& points);
void write_calibration_json(const std::string& path, const CalibrationResult& result);
void write_calibration_scan_csv(const std::string& path, const CalibrationResult& result);
void write_histograms_csv(const std::string& path, const TimingHistograms& h);
void write_analysis_json(const std::string& path, const TimingAnalysis& analysis,
                         double truncation_resolution);

// events.csv reader for offline timing analysis; rows without a click are
// skipped
std::vector<TimingEvent> read_events_csv(const std::string& path);

// calibration.json reader used by `run --gates`
void load_gate_offsets(const std::string& path, GateSchedule& schedule);

} // namespace qkd
