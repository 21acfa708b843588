#pragma once

#include <memory>
#include <stdexcept>

#include "qkdlab/config.hpp"
#include "qkdlab/eve.hpp"

namespace qkd {

// attack precondition failures (no exploitable mismatch, no blind emission
// time, power outside the threshold sandwich)
struct EveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ideal projective measurement in a protocol basis; 0 means transmitted (D0)
int measure_ideal(Polarization pol, Basis basis, RandomStream& rng);

// polarizer at a fixed angle: outcome 0 projects onto `angle`, 1 onto
// angle + 90
int measure_analyzer(Polarization pol, double angle_deg, RandomStream& rng);

// forwards every pulse untouched; baseline for "Eve present but idle"
class PassiveStrategy : public EveStrategy {
  public:
    const char* name() const override { return "passive"; }
    std::vector<OpticalPulse> intercept(const OpticalPulse& in, RandomStream&) override {
        return {in};
    }
};

// measure in a random protocol basis, resend the result at the nominal time
class InterceptResendStrategy : public EveStrategy {
  public:
    const char* name() const override { return "intercept_resend"; }
    std::vector<OpticalPulse> intercept(const OpticalPulse& in, RandomStream& rng) override;
};

// fixed intermediate analyzer; resends the post-measurement state
class BreidbartStrategy : public EveStrategy {
  public:
    explicit BreidbartStrategy(double analyzer_angle) : angle_(analyzer_angle) {}
    const char* name() const override { return "breidbart"; }
    std::vector<OpticalPulse> intercept(const OpticalPulse& in, RandomStream& rng) override;

  private:
    double angle_;
};

// Measure bit x in random basis b, re-emit NOT(x) in NOT(b) at a time where
// the detector for NOT(x) is blind and the detector for x still fires.
// session_start scans the configured curves for such a time per bit value.
class FakedStatesStrategy : public EveStrategy {
  public:
    FakedStatesStrategy(bool strict, double search_step)
        : strict_(strict), step_(search_step) {}
    const char* name() const override { return "faked_states"; }
    void session_start(const SessionContext& ctx) override;
    std::vector<OpticalPulse> intercept(const OpticalPulse& in, RandomStream& rng) override;

    // slot-local emission time used when Eve's measured bit is `bit`
    double emit_time(int bit) const { return emit_time_[bit]; }
    bool blind_exact() const { return exact_; }
    // smallest blind/live efficiency ratio seen (0 when fully blind)
    double best_ratio() const { return best_ratio_; }

  private:
    bool strict_;
    double step_;
    double period_ = 0.0;
    double emit_time_[2] = {0.0, 0.0};
    bool exact_ = false;
    double best_ratio_ = 0.0;
};

// Forward the pulse unmeasured, re-timed to t_early or t_late (fair pick);
// the shift direction plus the configured mismatch is Eve's guess.
class TimeShiftStrategy : public EveStrategy {
  public:
    TimeShiftStrategy(double t_early, double t_late) : t_early_(t_early), t_late_(t_late) {}
    const char* name() const override { return "time_shift"; }
    void session_start(const SessionContext& ctx) override;
    std::vector<OpticalPulse> intercept(const OpticalPulse& in, RandomStream& rng) override;

    // bit the early/late shift points to, derived from the nominal curves
    int guess_for_early() const { return guess_early_; }
    int guess_for_late() const { return guess_late_; }

  private:
    double t_early_;
    double t_late_;
    double period_ = 0.0;
    int guess_early_ = 0;
    int guess_late_ = 1;
};

// Measure like intercept-resend, then re-emit a bright pulse encoding the
// result, timed after both gates have closed. Same-basis slots divert the
// full power to one detector (forced click); cross-basis slots split it
// below threshold (no click, afterpulses armed).
class AfterGateStrategy : public EveStrategy {
  public:
    AfterGateStrategy(double pulse_power, double pulse_time_offset)
        : power_(pulse_power), offset_(pulse_time_offset) {}
    const char* name() const override { return "after_gate"; }
    void session_start(const SessionContext& ctx) override;
    std::vector<OpticalPulse> intercept(const OpticalPulse& in, RandomStream& rng) override;

    // slot-local arrival of the bright pulse
    double bright_time() const { return bright_time_; }

  private:
    double power_;
    double offset_;
    double period_ = 0.0;
    double bright_time_ = 0.0;
};

// Restructure bright calibration pulses so the first temporal half is D and
// the second half A polarized, separating the per-detector click centroids
// by delta. Single-photon pulses pass through untouched.
class CalibrationSpoofStrategy : public EveStrategy {
  public:
    explicit CalibrationSpoofStrategy(double delta) : delta_(delta) {}
    const char* name() const override { return "calibration_spoof"; }
    std::vector<OpticalPulse> intercept(const OpticalPulse& in, RandomStream& rng) override;

    static OpticalPulse spoof(const OpticalPulse& in, double delta);

  private:
    double delta_;
};

// nullptr for Kind::None
std::unique_ptr<EveStrategy> make_strategy(const EveSpec& spec);

} // namespace qkd
