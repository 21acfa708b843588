#include "qkdlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qkdlab/kernels.hpp"

namespace qkd {

const char* eve_action_name(EveAction a) {
    switch (a) {
        case EveAction::Pass: return "pass";
        case EveAction::Resend: return "resend";
        case EveAction::FakedState: return "faked_state";
        case EveAction::ShiftEarly: return "shift_early";
        case EveAction::ShiftLate: return "shift_late";
        case EveAction::BrightPulse: return "bright_pulse";
        case EveAction::SpoofCalibration: return "spoof_calibration";
    }
    return "pass";
}

const EveLogEntry* EveLog::find(std::uint64_t slot) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), slot,
                               [](const EveLogEntry& e, std::uint64_t s) { return e.slot < s; });
    if (it == entries_.end() || it->slot != slot) return nullptr;
    return &*it;
}

int measure_ideal(Polarization pol, Basis basis, RandomStream& rng) {
    const RoutingProbs p = detection_probabilities(pol, basis);
    return rng.uniform() < p.d0 ? 0 : 1;
}

int measure_analyzer(Polarization pol, double angle_deg, RandomStream& rng) {
    const double p0 = cos2_deg(pol.angle - angle_deg);
    return rng.uniform() < p0 ? 0 : 1;
}

std::vector<OpticalPulse> InterceptResendStrategy::intercept(const OpticalPulse& in,
                                                             RandomStream& rng) {
    const Basis b = rng.bit() ? Basis::X : Basis::Z;
    const int x = measure_ideal(in.polarization, b, rng);
    OpticalPulse out = in;
    out.intensity = 1.0;
    out.polarization = encode_bit(x, b);
    log_.add({in.slot, true, b, true, x, EveAction::Resend, 0.0});
    return {out};
}

std::vector<OpticalPulse> BreidbartStrategy::intercept(const OpticalPulse& in, RandomStream& rng) {
    const int x = measure_analyzer(in.polarization, angle_, rng);
    OpticalPulse out = in;
    out.intensity = 1.0;
    out.polarization = {normalize_angle(x == 0 ? angle_ : angle_ + 90.0)};
    log_.add({in.slot, false, Basis::Z, true, x, EveAction::Resend, angle_});
    return {out};
}

void FakedStatesStrategy::session_start(const SessionContext& ctx) {
    period_ = ctx.schedule.period;
    const kernels::CurveParams cp[2] = {ctx.detectors[0].curve.params(),
                                        ctx.detectors[1].curve.params()};
    const double off[2] = {ctx.schedule.offset(0), ctx.schedule.offset(1)};

    const double lo = std::min(off[0] + cp[0].window_start, off[1] + cp[1].window_start);
    const double hi = std::max(off[0] + cp[0].window_start + cp[0].window_len,
                               off[1] + cp[1].window_start + cp[1].window_len);
    const std::size_t steps = static_cast<std::size_t>(std::floor((hi - lo) / step_ + 1e-9));

    exact_ = true;
    best_ratio_ = 0.0;
    for (int bit = 0; bit < 2; ++bit) {
        const int live = bit, blind = 1 - bit;
        double exact_eta = -1.0, exact_t = 0.0;
        double min_ratio = HUGE_VAL, ratio_eta = -1.0, ratio_t = 0.0;
        for (std::size_t i = 0; i <= steps; ++i) {
            const double t = lo + static_cast<double>(i) * step_;
            const double el = kernels::efficiency_at(cp[live], t - off[live]);
            if (!(el > 0.0)) continue;
            const double eb = kernels::efficiency_at(cp[blind], t - off[blind]);
            if (eb == 0.0 && el > exact_eta) {
                exact_eta = el;
                exact_t = t;
            }
            const double ratio = eb / el;
            if (ratio < min_ratio || (ratio == min_ratio && el > ratio_eta)) {
                min_ratio = ratio;
                ratio_eta = el;
                ratio_t = t;
            }
        }
        if (ratio_eta < 0.0)
            throw EveError("faked states: search grid never hit a live window; decrease search_step");
        if (exact_eta > 0.0) {
            emit_time_[bit] = exact_t;
        } else {
            emit_time_[bit] = ratio_t;
            exact_ = false;
            best_ratio_ = std::max(best_ratio_, min_ratio);
        }
    }
    if (!exact_ && strict_) {
        std::ostringstream os;
        os << "faked states: no fully blind emission time with this mismatch; best achievable "
              "blind/live efficiency ratio is "
           << best_ratio_;
        throw EveError(os.str());
    }
}

std::vector<OpticalPulse> FakedStatesStrategy::intercept(const OpticalPulse& in,
                                                         RandomStream& rng) {
    const Basis b = rng.bit() ? Basis::X : Basis::Z;
    const int x = measure_ideal(in.polarization, b, rng);
    OpticalPulse out = in;
    out.intensity = 1.0;
    out.polarization = encode_bit(1 - x, other(b));
    out.arrival_time = static_cast<double>(in.slot) * period_ + emit_time_[x];
    log_.add({in.slot, true, b, true, x, EveAction::FakedState, emit_time_[x]});
    return {out};
}

void TimeShiftStrategy::session_start(const SessionContext& ctx) {
    period_ = ctx.schedule.period;
    if (ctx.schedule.gate_offset_d0 == ctx.schedule.gate_offset_d1)
        throw EveError("time shift: both gates sit at the same offset, nothing to exploit");
    if (!(t_early_ < ctx.channel_delay && ctx.channel_delay < t_late_))
        throw EveError("time shift: shift targets must straddle the nominal arrival time");

    const kernels::CurveParams cp[2] = {ctx.detectors[0].curve.params(),
                                        ctx.detectors[1].curve.params()};
    const auto guess_at = [&](double t) {
        const double e0 = kernels::efficiency_at(cp[0], t - ctx.schedule.offset(0));
        const double e1 = kernels::efficiency_at(cp[1], t - ctx.schedule.offset(1));
        return e0 >= e1 ? 0 : 1;
    };
    guess_early_ = guess_at(t_early_);
    guess_late_ = guess_at(t_late_);
}

std::vector<OpticalPulse> TimeShiftStrategy::intercept(const OpticalPulse& in, RandomStream& rng) {
    const bool early = rng.bit() == 0;
    const double t = early ? t_early_ : t_late_;
    OpticalPulse out = in;
    out.arrival_time = static_cast<double>(in.slot) * period_ + t;
    log_.add({in.slot, false, Basis::Z, true, early ? guess_early_ : guess_late_,
              early ? EveAction::ShiftEarly : EveAction::ShiftLate, t});
    return {out};
}

void AfterGateStrategy::session_start(const SessionContext& ctx) {
    period_ = ctx.schedule.period;
    const double thr0 = ctx.detectors[0].bright_threshold;
    const double thr1 = ctx.detectors[1].bright_threshold;
    const double lo = std::max(thr0, thr1);
    const double hi = 2.0 * std::min(thr0, thr1);
    if (!(power_ >= lo && power_ < hi)) {
        std::ostringstream os;
        os << "after gate: pulse power " << power_ << " outside [" << lo << ", " << hi
           << "); a full pulse must click and a half pulse must not";
        throw EveError(os.str());
    }
    const kernels::CurveParams cp[2] = {ctx.detectors[0].curve.params(),
                                        ctx.detectors[1].curve.params()};
    const double end0 = ctx.schedule.offset(0) + cp[0].window_start + cp[0].window_len;
    const double end1 = ctx.schedule.offset(1) + cp[1].window_start + cp[1].window_len;
    bright_time_ = std::max(end0, end1) + offset_;
}

std::vector<OpticalPulse> AfterGateStrategy::intercept(const OpticalPulse& in, RandomStream& rng) {
    const Basis b = rng.bit() ? Basis::X : Basis::Z;
    const int x = measure_ideal(in.polarization, b, rng);
    OpticalPulse out;
    out.slot = in.slot;
    out.emission_time = in.emission_time;
    out.arrival_time = static_cast<double>(in.slot) * period_ + bright_time_;
    out.intensity = power_;
    out.polarization = encode_bit(x, b);
    log_.add({in.slot, true, b, true, x, EveAction::BrightPulse, power_});
    return {out};
}

OpticalPulse CalibrationSpoofStrategy::spoof(const OpticalPulse& in, double delta) {
    OpticalPulse out = in;
    out.duration = 2.0 * delta;
    out.segments = {{0.5, Polarization{45.0}}, {0.5, Polarization{135.0}}};
    return out;
}

std::vector<OpticalPulse> CalibrationSpoofStrategy::intercept(const OpticalPulse& in,
                                                              RandomStream&) {
    if (!(in.intensity > 1.0)) return {in};
    log_.add({in.slot, false, Basis::Z, false, 0, EveAction::SpoofCalibration, delta_});
    return {spoof(in, delta_)};
}

std::unique_ptr<EveStrategy> make_strategy(const EveSpec& spec) {
    switch (spec.kind) {
        case EveSpec::Kind::None: return nullptr;
        case EveSpec::Kind::InterceptResend: return std::make_unique<InterceptResendStrategy>();
        case EveSpec::Kind::Breidbart:
            return std::make_unique<BreidbartStrategy>(spec.analyzer_angle);
        case EveSpec::Kind::FakedStates:
            return std::make_unique<FakedStatesStrategy>(spec.strict, spec.search_step);
        case EveSpec::Kind::TimeShift:
            return std::make_unique<TimeShiftStrategy>(spec.t_early, spec.t_late);
        case EveSpec::Kind::AfterGate:
            return std::make_unique<AfterGateStrategy>(spec.pulse_power, spec.pulse_time_offset);
        case EveSpec::Kind::CalibrationSpoof:
            return std::make_unique<CalibrationSpoofStrategy>(spec.delta);
    }
    return nullptr;
}

} // namespace qkd
