#pragma once

#include <cstdint>
#include <vector>

#include "qkdlab/optics.hpp"

namespace qkd {

// Piece of a structured pulse: `fraction` of the pulse duration carries this
// polarization. Fractions over a pulse sum to 1.
struct PulseSegment {
    double fraction = 1.0;
    Polarization pol;
};

// One optical pulse in flight. Times are global nanoseconds; slot-local time
// is (t - slot * period). intensity is the expected photon number: values in
// (0, 1] are the single-photon regime (presence is Bernoulli(intensity)),
// values > 1 are classical bright pulses. Photons of a pulse with duration > 0
// are spread uniformly over [arrival - duration/2, arrival + duration/2];
// `segments`, when non-empty, assigns polarization by position within that
// span and overrides `polarization`.
struct OpticalPulse {
    std::uint64_t slot = 0;
    double emission_time = 0.0;
    double arrival_time = 0.0;
    double intensity = 1.0;
    double duration = 0.0;
    Polarization polarization;
    std::vector<PulseSegment> segments;

    // polarization at position u in [0, 1) of the duration span
    Polarization polarization_at(double u) const {
        if (segments.empty()) return polarization;
        double cum = 0.0;
        for (const auto& s : segments) {
            cum += s.fraction;
            if (u < cum) return s.pol;
        }
        return segments.back().pol;
    }
};

} // namespace qkd
