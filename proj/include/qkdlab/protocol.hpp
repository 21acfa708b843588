#pragma once

#include <cstdint>
#include <vector>

#include "qkdlab/config.hpp"
#include "qkdlab/detector.hpp"
#include "qkdlab/eve.hpp"
#include "qkdlab/optics.hpp"
#include "qkdlab/rng.hpp"

namespace qkd {

struct AliceSlotRecord {
    std::uint64_t slot = 0;
    int bit = 0;
    Basis basis = Basis::Z;
    double emission_time = 0.0;
};

struct BobSlotRecord {
    std::uint64_t slot = 0;
    Basis basis = Basis::Z;
    ClickOutcome outcome;
    // slot-local click time, rounded to the configured resolution; this is
    // the value the public discussion exposes. Meaningless without a click.
    double revealed_timestamp = 0.0;
};

struct SiftedEntry {
    std::uint64_t slot = 0;
    int alice_bit = 0;
    int bob_bit = 0;
};

struct SiftedKey {
    std::vector<SiftedEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

struct QberEstimate {
    bool defined = false; // false when there was nothing to sample
    double qber = 0.0;
    std::uint64_t sampled = 0;
    std::uint64_t disagreements = 0;
    SiftedKey remaining; // sampled bits are spent and removed
};

struct RunStats {
    std::uint64_t pulses_sent = 0;     // M
    std::uint64_t pulses_detected = 0; // W, slots with any click
    std::uint64_t sifted_bits = 0;
    std::uint64_t final_key_bits = 0;
    double detection_rate = 0.0; // W / M
    double sift_fraction = 0.0;  // sifted / W
    bool qber_defined = false;
    double qber = 0.0;
    bool abort = false;
    double eve_known_fraction = 0.0;
};

struct SessionResult {
    RunStats stats;
    std::vector<AliceSlotRecord> alice;
    std::vector<BobSlotRecord> bob;
    SiftedKey sifted;    // before the public QBER sample is spent
    SiftedKey final_key; // what survives the estimate
    EveLog eve_log;      // copy of the strategy's log, empty without Eve
};

// keep slots where the bases match and exactly one detector clicked
SiftedKey sift(const std::vector<AliceSlotRecord>& alice, const std::vector<BobSlotRecord>& bob);

// Publicly compare a random sample (without replacement) of the sifted key.
// The sample size is round(fraction * size), at least 1 when the key is
// non-empty; the compared bits are removed from the surviving key.
QberEstimate estimate_qber(const SiftedKey& key, double sample_fraction, RandomStream& rng);

// abort iff the estimate is undefined or strictly exceeds the threshold
bool abort_decision(const QberEstimate& est, double threshold);

// Fraction of sifted bits Eve got right: her logged guess where she touched
// the slot, an explicit fair guess from her stream where she did not.
// 0.5 by convention for an empty key.
double eve_info_accounting(const SiftedKey& key, const EveLog& log, RandomStream& guess_rng);

// One full session: per slot Alice draws (bit, basis) and emits; the channel
// applies Bernoulli loss and fixed delay; the strategy (optional) replaces
// the pulse; Bob draws a basis and gates the detector pair. Afterwards:
// sifting, QBER sampling, abort decision, Eve accounting. Stream seeds are
// derived from (config.seed, trial) per stream label, so trials are
// order-independent.
SessionResult run_session(const SessionConfig& cfg, EveStrategy* strategy, std::uint64_t trial);

} // namespace qkd
