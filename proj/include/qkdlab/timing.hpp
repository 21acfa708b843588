#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qkdlab/optics.hpp"
#include "qkdlab/protocol.hpp"

namespace qkd {

// one publicly visible click: which slot, when (slot-local, as revealed),
// Bob's announced basis and which detector fired
struct TimingEvent {
    std::uint64_t slot = 0;
    double timestamp = 0.0;
    Basis basis = Basis::Z;
    int detector = 0;
};

// single-click slots only; Both-clicks carry no usable bit
std::vector<TimingEvent> events_from_bob(const std::vector<BobSlotRecord>& records);

// class layout: index = basis * 2 + detector (Z-D0, Z-D1, X-D0, X-D1)
struct TimingHistograms {
    double bin_width = 0.0;
    double origin = 0.0; // left edge of bin 0
    std::size_t bins = 0;
    std::array<std::vector<std::uint64_t>, 4> counts;
};

TimingHistograms build_histograms(const std::vector<TimingEvent>& events, double bin_width);

// What an eavesdropper learns from timestamps within one announced basis:
// the two detector populations' centroids, their pooled spread, and the
// resulting per-click guessing accuracy. `accuracy` is the Gaussian model
// value Phi(|separation| / (2 sigma)); `empirical_accuracy` classifies the
// actual sample at the centroid midpoint.
struct BasisAnalysis {
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    double centroid0 = 0.0;
    double centroid1 = 0.0;
    double separation = 0.0; // centroid1 - centroid0
    double sigma_pooled = 0.0;
    double accuracy = 0.5;
    double info_bits = 0.0;
    double empirical_accuracy = 0.5;
    bool perfect_separation = false; // zero spread, nonzero separation
    bool defined = false;            // both detectors produced clicks
};

struct TimingAnalysis {
    std::array<BasisAnalysis, 2> per_basis; // [Z, X]
    std::size_t events = 0;
    // event-count weighted mean info over the defined bases; the headline
    // "bits per sifted bit leaked through timing"
    double info_per_bit = 0.0;
};

TimingAnalysis analyze_timing(const std::vector<TimingEvent>& events);

// timestamps rounded to multiples of `resolution` (<= 0 leaves them alone)
std::vector<TimingEvent> truncate_events(std::vector<TimingEvent> events, double resolution);

double normal_cdf(double x);
double binary_entropy(double p);
double info_from_accuracy(double accuracy);

// Expected distinguishing power when two Gaussian populations `separation`
// apart with common `sigma` are rounded to multiples of `resolution` and
// classified cell-by-cell by maximum likelihood. resolution <= 0 gives the
// continuous limit Phi(separation / (2 sigma)).
double truncated_accuracy_model(double separation, double sigma, double resolution);
double truncated_info_model(double separation, double sigma, double resolution);

} // namespace qkd
