#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "qkdlab/kernels.hpp"
#include "qkdlab/optics.hpp"
#include "qkdlab/pulse.hpp"
#include "qkdlab/rng.hpp"

namespace qkd {

// Gated efficiency window, expressed in slot-local time before the
// per-detector gate offset is applied. center is the middle of the plateau.
struct EfficiencyCurve {
    double center = 0.0;
    double rise = 0.5;
    double plateau = 1.0;
    double fall = 0.5;
    double peak = 0.10;

    kernels::CurveParams params() const {
        kernels::CurveParams p;
        p.window_start = center - plateau * 0.5 - rise;
        p.rise = rise;
        p.rise_plateau = rise + plateau;
        p.window_len = rise + plateau + fall;
        p.fall = fall;
        p.peak = peak;
        return p;
    }
};

struct DetectorParams {
    EfficiencyCurve curve;
    double dead_time = 1000.0;         // ns a click blinds the detector
    double dark_count_prob = 1e-6;     // per gate
    double bright_threshold = 1000.0;  // photons; >= always clicks, gate-independent
    double afterpulse_prob = 0.0;      // one-shot, next gate after sub-threshold bright light
    double jitter_sigma = 0.0;         // ns, Gaussian timestamp noise
    double centroid_offset = 0.0;      // ns, fixed electronics delay on timestamps
};

// Slot clock plus independent per-detector gate positions. Detector i
// evaluates its curve at (slot-local time - gate_offset(i)); offsets that
// differ create detector efficiency mismatch.
struct GateSchedule {
    double period = 5000.0;
    double gate_offset_d0 = 0.0;
    double gate_offset_d1 = 0.0;
    // Uncontrolled drift of the relative window position: each session
    // displaces gate_offset_d1 by a uniform draw in [-spread/2, spread/2].
    // Attackers plan against the nominal offsets, so a nonzero spread
    // degrades timing attacks the way drifting hardware would.
    double offset_spread = 0.0;

    double offset(int det) const { return det == 0 ? gate_offset_d0 : gate_offset_d1; }
};

enum class ClickKind : std::uint8_t { None = 0, D0 = 1, D1 = 2, Both = 3 };

// Click provenance bits, per detector
enum : std::uint8_t {
    kCausePhoton = 1,
    kCauseDark = 2,
    kCauseAfterpulse = 4,
    kCauseBright = 8,
};

struct ClickOutcome {
    ClickKind kind = ClickKind::None;
    // earliest stamped time among clicking detectors (jitter + centroid
    // offset applied); meaningless when kind == None
    double timestamp = 0.0;
    std::array<bool, 2> clicked{false, false};
    std::array<double, 2> stamps{0.0, 0.0};
    std::array<std::uint8_t, 2> cause{0, 0};
};

struct BrightResult {
    bool click = false;
    bool arm_afterpulse = false;
};

// Threshold response to classical power: at or above threshold the detector
// clicks regardless of gate or dead time; below it, any nonzero power arms
// the one-shot afterpulse for the next gate.
BrightResult detect_bright(const DetectorParams& params, double power);

// timestamp as reported by the electronics
double stamp_timestamp(const DetectorParams& params, double true_time, RandomStream& rng);

// Stateful detector pair behind the basis waveplate + PBS. Dead times and
// afterpulse arming persist across gates, which is why a session processes
// slots strictly in order.
class DetectorPair {
  public:
    DetectorPair(const DetectorParams& d0, const DetectorParams& d1, const GateSchedule& schedule);

    void reset();

    // Full gate for one slot: resolve pending afterpulses, process every
    // pulse arriving in the slot, sample dark counts, merge clicks.
    // Draw order per gate: afterpulse draws for armed detectors (D0 then D1),
    // then per pulse (position, presence, routing, click, jitter as needed),
    // then dark draws for D0 and D1.
    ClickOutcome process_gate(std::uint64_t slot, std::span<const OpticalPulse> pulses, Basis basis,
                              RandomStream& rng);
    ClickOutcome process_gate(std::uint64_t slot, const OpticalPulse& pulse, Basis basis,
                              RandomStream& rng);

    const DetectorParams& params(int det) const { return det_[det]; }
    const GateSchedule& schedule() const { return sched_; }

    // gate window of detector `det` in slot `slot`, global time
    double window_start(int det, std::uint64_t slot) const;
    double window_end(int det, std::uint64_t slot) const;

    bool afterpulse_armed(int det) const { return armed_[det]; }
    double dead_until(int det) const { return dead_until_[det]; }

  private:
    DetectorParams det_[2];
    kernels::CurveParams curve_[2];
    GateSchedule sched_;
    double dead_until_[2] = {-1e300, -1e300};
    bool armed_[2] = {false, false};
};

} // namespace qkd
