#pragma once

#include <cstdint>
#include <vector>

#include "qkdlab/detector.hpp"
#include "qkdlab/optics.hpp"
#include "qkdlab/pulse.hpp"
#include "qkdlab/rng.hpp"

namespace qkd {

enum class EveAction : std::uint8_t {
    Pass = 0,
    Resend,
    FakedState,
    ShiftEarly,
    ShiftLate,
    BrightPulse,
    SpoofCalibration,
};

const char* eve_action_name(EveAction a);

struct EveLogEntry {
    std::uint64_t slot = 0;
    bool has_basis = false;
    Basis basis = Basis::Z;
    bool has_guess = false;
    int guess = 0;
    EveAction action = EveAction::Pass;
    double aux = 0.0; // action parameter (emission time, shift target, power)
};

// Per-slot record of what Eve did and what she believes. Entries are appended
// in slot order; slots without an entry were not touched.
class EveLog {
  public:
    void add(EveLogEntry e) { entries_.push_back(e); }
    const std::vector<EveLogEntry>& entries() const { return entries_; }

    // entry for a slot, or nullptr; entries are slot-sorted by construction
    const EveLogEntry* find(std::uint64_t slot) const;

  private:
    std::vector<EveLogEntry> entries_;
};

// What Eve is assumed to know about the installation: Bob's detector build
// and gate schedule, and the channel constants.
struct SessionContext {
    DetectorParams detectors[2];
    GateSchedule schedule;
    double channel_delay = 0.0;
    double channel_loss = 0.0;
    std::uint64_t num_pulses = 0;
};

// An attack transforms each surviving pulse into 0..N replacement pulses.
// Eve's own apparatus is ideal (unit efficiency, no dark counts); all her
// randomness comes from the supplied stream.
class EveStrategy {
  public:
    virtual ~EveStrategy() = default;
    virtual const char* name() const = 0;

    // called once before slot 0; configuration errors surface here
    virtual void session_start(const SessionContext&) {}

    virtual std::vector<OpticalPulse> intercept(const OpticalPulse& in, RandomStream& rng) = 0;

    const EveLog& log() const { return log_; }

  protected:
    EveLog log_;
};

} // namespace qkd
