#pragma once

#include <stdexcept>
#include <vector>

#include "qkdlab/config.hpp"
#include "qkdlab/detector.hpp"
#include "qkdlab/eve.hpp"

namespace qkd {

struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One gate-delay scan: expected click counts per candidate offset and the
// chosen offset per detector (earliest offset within 1e-9 relative of the
// maximum, which pins the choice inside flat plateau bands).
struct CalibrationResult {
    double offset_d0 = 0.0;
    double offset_d1 = 0.0;
    std::vector<double> offsets;
    std::vector<double> expected_d0;
    std::vector<double> expected_d1;
};

// Simulate the gate-delay calibration: Alice fires bright H-polarized pulses
// of the configured duration, Bob analyzes in X (so a clean pulse splits
// 50/50) and slides each detector's gate across [scan_min, scan_max],
// keeping the offset that maximizes the expected count. Counts are the
// closed-form expectation pulses * intensity * sum_seg f * p_det * mean
// efficiency, so the scan is deterministic. An attached strategy transforms
// the probe pulse first (its session hooks are not run); `rng` feeds that
// transformation only.
CalibrationResult run_calibration(const CalibrationConfig& cfg,
                                  const DetectorParams detectors[2], double channel_delay,
                                  EveStrategy* eve, RandomStream& rng);

// schedule with the scanned offsets installed
GateSchedule apply_calibration(const CalibrationResult& result, GateSchedule schedule);

} // namespace qkd
