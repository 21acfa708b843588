#include "qkdlab/calibration.hpp"

#include <cmath>

#include "qkdlab/kernels.hpp"
#include "qkdlab/optics.hpp"

namespace qkd {

namespace {

// expected clicks for one detector with its gate slid to `offset`
double expected_count(const CalibrationConfig& cfg, const kernels::CurveParams& curve,
                      int detector, double offset, const std::vector<OpticalPulse>& pulses) {
    double per_pulse = 0.0;
    for (const OpticalPulse& p : pulses) {
        std::vector<PulseSegment> segs = p.segments;
        if (segs.empty()) segs.push_back({1.0, p.polarization});
        const double start = p.arrival_time - p.duration * 0.5;
        double cum = 0.0;
        for (const PulseSegment& s : segs) {
            const double a = start + cum * p.duration;
            cum += s.fraction;
            const double b = start + cum * p.duration;
            const RoutingProbs route = detection_probabilities(s.pol, Basis::X);
            const double p_det = detector == 0 ? route.d0 : route.d1;
            const double eta = b > a ? kernels::efficiency_mean(curve, a - offset, b - offset)
                                     : kernels::efficiency_at(curve, a - offset);
            per_pulse += p.intensity * s.fraction * p_det * eta;
        }
    }
    return static_cast<double>(cfg.pulses_per_step) * per_pulse;
}

// earliest offset whose count is within 1e-9 relative of the maximum; flat
// plateau bands only differ by float noise, so a strict argmax would pick an
// arbitrary ulp winner
std::size_t pick_offset(const std::vector<double>& counts) {
    double best = 0.0;
    for (double c : counts) best = std::max(best, c);
    if (!(best > 0.0))
        throw CalibrationError("calibration scan saw no light anywhere; widen the scan range");
    const double threshold = best * (1.0 - 1e-9);
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] >= threshold) return i;
    return 0;
}

} // namespace

CalibrationResult run_calibration(const CalibrationConfig& cfg,
                                  const DetectorParams detectors[2], double channel_delay,
                                  EveStrategy* eve, RandomStream& rng) {
    OpticalPulse probe;
    probe.slot = 0;
    probe.emission_time = 0.0;
    probe.arrival_time = channel_delay;
    probe.intensity = cfg.pulse_intensity;
    probe.duration = cfg.pulse_duration;
    probe.polarization = {0.0};

    std::vector<OpticalPulse> arriving = eve ? eve->intercept(probe, rng)
                                             : std::vector<OpticalPulse>{probe};

    CalibrationResult result;
    const auto steps =
        static_cast<std::size_t>(std::floor((cfg.scan_max - cfg.scan_min) / cfg.scan_step + 1e-9));
    const kernels::CurveParams curves[2] = {detectors[0].curve.params(),
                                            detectors[1].curve.params()};
    for (std::size_t i = 0; i <= steps; ++i) {
        const double offset = cfg.scan_min + static_cast<double>(i) * cfg.scan_step;
        result.offsets.push_back(offset);
        result.expected_d0.push_back(expected_count(cfg, curves[0], 0, offset, arriving));
        result.expected_d1.push_back(expected_count(cfg, curves[1], 1, offset, arriving));
    }
    result.offset_d0 = result.offsets[pick_offset(result.expected_d0)];
    result.offset_d1 = result.offsets[pick_offset(result.expected_d1)];
    return result;
}

GateSchedule apply_calibration(const CalibrationResult& result, GateSchedule schedule) {
    schedule.gate_offset_d0 = result.offset_d0;
    schedule.gate_offset_d1 = result.offset_d1;
    return schedule;
}

} // namespace qkd
