#include "qkdlab/detector.hpp"

#include <limits>
#include <stdexcept>

namespace qkd {

namespace {

struct Candidate {
    bool present = false;
    double true_time = 0.0;
    std::uint8_t cause = 0;
};

// keep the earliest avalanche per detector; a detector fires once per gate
void offer(Candidate& c, double t, std::uint8_t cause) {
    if (!c.present || t < c.true_time) {
        c.present = true;
        c.true_time = t;
        c.cause = cause;
    } else if (t == c.true_time) {
        c.cause |= cause;
    }
}

} // namespace

BrightResult detect_bright(const DetectorParams& params, double power) {
    if (power >= params.bright_threshold) return {true, false};
    if (power > 0.0) return {false, true};
    return {false, false};
}

double stamp_timestamp(const DetectorParams& params, double true_time, RandomStream& rng) {
    double t = true_time + params.centroid_offset;
    if (params.jitter_sigma > 0.0) t += rng.normal(0.0, params.jitter_sigma);
    return t;
}

DetectorPair::DetectorPair(const DetectorParams& d0, const DetectorParams& d1,
                           const GateSchedule& schedule)
    : sched_(schedule) {
    det_[0] = d0;
    det_[1] = d1;
    curve_[0] = d0.curve.params();
    curve_[1] = d1.curve.params();
}

void DetectorPair::reset() {
    dead_until_[0] = dead_until_[1] = -1e300;
    armed_[0] = armed_[1] = false;
}

double DetectorPair::window_start(int det, std::uint64_t slot) const {
    return static_cast<double>(slot) * sched_.period + sched_.offset(det) +
           curve_[det].window_start;
}

double DetectorPair::window_end(int det, std::uint64_t slot) const {
    return window_start(det, slot) + curve_[det].window_len;
}

ClickOutcome DetectorPair::process_gate(std::uint64_t slot, const OpticalPulse& pulse, Basis basis,
                                        RandomStream& rng) {
    return process_gate(slot, std::span<const OpticalPulse>(&pulse, 1), basis, rng);
}

ClickOutcome DetectorPair::process_gate(std::uint64_t slot, std::span<const OpticalPulse> pulses,
                                        Basis basis, RandomStream& rng) {
    const double slot_base = static_cast<double>(slot) * sched_.period;
    Candidate cand[2];

    // pending afterpulses land uniformly inside this gate; the flags are
    // one-shot whether or not they fire
    for (int det = 0; det < 2; ++det) {
        if (!armed_[det]) continue;
        armed_[det] = false;
        if (!rng.bernoulli(det_[det].afterpulse_prob)) continue;
        const double t = rng.uniform(window_start(det, slot), window_end(det, slot));
        if (t >= dead_until_[det]) offer(cand[det], t, kCauseAfterpulse);
    }

    for (const OpticalPulse& pulse : pulses) {
        if (pulse.intensity < 0.0) throw std::invalid_argument("pulse intensity is negative");
        if (pulse.intensity == 0.0) continue;

        if (pulse.intensity <= 1.0) {
            // single-photon regime
            double t = pulse.arrival_time;
            Polarization pol = pulse.polarization;
            if (pulse.duration > 0.0) {
                const double u = rng.uniform();
                t += (u - 0.5) * pulse.duration;
                pol = pulse.polarization_at(u);
            }
            if (pulse.intensity < 1.0 && !rng.bernoulli(pulse.intensity)) continue;
            const RoutingProbs route = detection_probabilities(pol, basis);
            const int det = rng.uniform() < route.d0 ? 0 : 1;
            const double eta =
                kernels::efficiency_at(curve_[det], t - slot_base - sched_.offset(det));
            const bool clicked = rng.bernoulli(eta);
            if (clicked && t >= dead_until_[det]) offer(cand[det], t, kCausePhoton);
        } else {
            // classical bright pulse: threshold response, gate-independent
            double power[2] = {0.0, 0.0};
            if (pulse.segments.empty()) {
                const RoutingProbs route = detection_probabilities(pulse.polarization, basis);
                power[0] = pulse.intensity * route.d0;
                power[1] = pulse.intensity * route.d1;
            } else {
                for (const PulseSegment& seg : pulse.segments) {
                    const RoutingProbs route = detection_probabilities(seg.pol, basis);
                    power[0] += pulse.intensity * seg.fraction * route.d0;
                    power[1] += pulse.intensity * seg.fraction * route.d1;
                }
            }
            for (int det = 0; det < 2; ++det) {
                const BrightResult br = detect_bright(det_[det], power[det]);
                if (br.click) offer(cand[det], pulse.arrival_time, kCauseBright);
                if (br.arm_afterpulse) armed_[det] = true;
            }
        }
    }

    // dark counts: always two draws per gate, uniform position if they fire
    for (int det = 0; det < 2; ++det) {
        if (!rng.bernoulli(det_[det].dark_count_prob)) continue;
        const double t = rng.uniform(window_start(det, slot), window_end(det, slot));
        offer(cand[det], t, kCauseDark);
    }

    ClickOutcome out;
    for (int det = 0; det < 2; ++det) {
        if (!cand[det].present) continue;
        out.clicked[det] = true;
        out.cause[det] = cand[det].cause;
        out.stamps[det] = stamp_timestamp(det_[det], cand[det].true_time, rng);
        dead_until_[det] = cand[det].true_time + det_[det].dead_time;
    }
    if (out.clicked[0] && out.clicked[1]) {
        out.kind = ClickKind::Both;
        out.timestamp = out.stamps[0] < out.stamps[1] ? out.stamps[0] : out.stamps[1];
    } else if (out.clicked[0]) {
        out.kind = ClickKind::D0;
        out.timestamp = out.stamps[0];
    } else if (out.clicked[1]) {
        out.kind = ClickKind::D1;
        out.timestamp = out.stamps[1];
    }
    return out;
}

} // namespace qkd
