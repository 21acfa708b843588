#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "qkdlab/detector.hpp"

namespace qkd {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChannelConfig {
    double loss_prob = 0.0; // Bernoulli pulse loss, applied before Eve
    double delay = 0.0;     // fixed propagation delay, ns
};

struct EveSpec {
    enum class Kind {
        None,
        InterceptResend,
        Breidbart,
        FakedStates,
        TimeShift,
        AfterGate,
        CalibrationSpoof,
    };
    Kind kind = Kind::None;

    // breidbart
    double analyzer_angle = 22.5;
    // faked_states: strict refuses to run without a fully blind emission time
    bool strict = true;
    double search_step = 0.01;
    // time_shift: slot-local target arrival times; which bit each shift
    // reveals follows from the configured mismatch
    double t_early = -0.5;
    double t_late = 1.0;
    // after_gate
    double pulse_power = 1500.0;
    double pulse_time_offset = 1.0;
    // calibration_spoof: induced mismatch, ns
    double delta = 0.4;
};

const char* eve_kind_name(EveSpec::Kind k);

struct CalibrationConfig {
    double pulse_intensity = 1000.0; // photons per calibration pulse
    double pulse_duration = 2.0;     // ns, uniform photon spread
    std::uint64_t pulses_per_step = 1000;
    double scan_min = -2.0; // gate-offset scan range, slot-local ns
    double scan_max = 2.0;
    double scan_step = 0.05;
};

struct AnalysisConfig {
    double histogram_bin = 0.05; // ns, presentation only
};

struct SessionConfig {
    int schema_version = 1;
    std::string name;
    std::uint64_t num_pulses = 0;
    std::uint64_t seed = 0;
    double qber_threshold = 0.11;  // abort iff estimated QBER > threshold
    double sample_fraction = 0.5;  // fraction of sifted bits revealed for QBER
    double timestamp_resolution = 0.0; // ns; 0 reveals full-precision timestamps
    ChannelConfig channel;
    GateSchedule schedule;
    DetectorParams detectors[2];
    EveSpec eve;
    CalibrationConfig calibration;
    AnalysisConfig analysis;
};

// Strict parse: unknown keys are rejected, every violated bound names the
// offending field path. `num_pulses` and `seed` are required, everything else
// has the documented defaults.
SessionConfig parse_config(const std::string& json_text);
SessionConfig load_config(const std::string& path);

// canonical serialization; parse(serialize(c)) == c
std::string serialize_config(const SessionConfig& cfg);

// FNV-1a over the canonical serialization, for report provenance
std::string config_hash(const SessionConfig& cfg);

} // namespace qkd
