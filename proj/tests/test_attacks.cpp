#include <doctest.h>

#include <cmath>
#include <string>

#include "qkdlab/attacks.hpp"
#include "qkdlab/protocol.hpp"

using qkd::Basis;
using qkd::EveAction;
using qkd::EveError;
using qkd::OpticalPulse;
using qkd::SessionContext;

namespace {

OpticalPulse probe(std::uint64_t slot, int bit, Basis basis, double period = 5000.0) {
    OpticalPulse p;
    p.slot = slot;
    p.emission_time = static_cast<double>(slot) * period;
    p.arrival_time = p.emission_time;
    p.intensity = 1.0;
    p.polarization = qkd::encode_bit(bit, basis);
    return p;
}

// a context with ideal bookkeeping defaults and a chosen mismatch
SessionContext mismatch_context(double offset_d1) {
    SessionContext ctx;
    ctx.schedule.gate_offset_d1 = offset_d1;
    return ctx;
}

qkd::SessionConfig attack_config(const std::string& eve_block, std::uint64_t seed) {
    const std::string text = R"({"num_pulses": 20000, "seed": )" + std::to_string(seed) + R"(,
        "detectors": {"d0": {"dark_count_prob": 0.0, "efficiency": {"peak": 1.0}},
                      "d1": {"dark_count_prob": 0.0, "efficiency": {"peak": 1.0}}},
        "eve": )" + eve_block + "}";
    return qkd::parse_config(text);
}

qkd::SessionResult run_attack(const qkd::SessionConfig& cfg) {
    auto strategy = qkd::make_strategy(cfg.eve);
    REQUIRE(strategy != nullptr);
    return qkd::run_session(cfg, strategy.get(), 0);
}

} // namespace

TEST_SUITE("attacks") {

TEST_CASE("ideal measurement is deterministic in the matched basis") {
    qkd::RandomStream rng(1);
    for (int i = 0; i < 50; ++i) {
        CHECK(qkd::measure_ideal(qkd::encode_bit(0, Basis::Z), Basis::Z, rng) == 0);
        CHECK(qkd::measure_ideal(qkd::encode_bit(1, Basis::Z), Basis::Z, rng) == 1);
        CHECK(qkd::measure_ideal(qkd::encode_bit(0, Basis::X), Basis::X, rng) == 0);
        CHECK(qkd::measure_ideal(qkd::encode_bit(1, Basis::X), Basis::X, rng) == 1);
    }
    // conjugate basis: a fair coin
    int ones = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
        ones += qkd::measure_ideal(qkd::encode_bit(0, Basis::Z), Basis::X, rng);
    CHECK(std::fabs(ones / double(n) - 0.5) < 0.015); // 4 sigma
}

TEST_CASE("fixed analyzer projects with the cosine-squared law") {
    qkd::RandomStream rng(2);
    for (int i = 0; i < 50; ++i) {
        CHECK(qkd::measure_analyzer({22.5}, 22.5, rng) == 0);
        CHECK(qkd::measure_analyzer({112.5}, 22.5, rng) == 1);
    }
    int zeros = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) zeros += qkd::measure_analyzer({0.0}, 22.5, rng) == 0;
    const double overlap = qkd::cos2_deg(22.5); // (2 + sqrt 2) / 4
    CHECK(std::fabs(zeros / double(n) - overlap) < 0.011); // ~4.4 sigma
}

TEST_CASE("intercept-resend re-encodes its measurement at the nominal time") {
    qkd::InterceptResendStrategy eve;
    qkd::RandomStream rng(3);
    for (std::uint64_t slot = 0; slot < 200; ++slot) {
        const OpticalPulse in = probe(slot, static_cast<int>(slot % 2), Basis::Z);
        const auto out = eve.intercept(in, rng);
        REQUIRE(out.size() == 1);
        CHECK(out[0].arrival_time == in.arrival_time);
        CHECK(out[0].intensity == 1.0);
        const qkd::EveLogEntry* e = eve.log().find(slot);
        REQUIRE(e != nullptr);
        CHECK(e->has_basis);
        CHECK(e->has_guess);
        CHECK(e->action == EveAction::Resend);
        // the resent state encodes exactly her logged result
        CHECK(out[0].polarization.angle == qkd::encode_bit(e->guess, e->basis).angle);
        // matched-basis slots are read perfectly
        if (e->basis == Basis::Z) CHECK(e->guess == static_cast<int>(slot % 2));
    }
}

TEST_CASE("intercept-resend session shows the textbook quarter error rate") {
    const auto res = run_attack(attack_config(R"({"strategy": "intercept_resend"})", 6100));
    REQUIRE(res.stats.qber_defined);
    CHECK(std::fabs(res.stats.qber - 0.25) < 0.025);
    CHECK(std::fabs(res.stats.eve_known_fraction - 0.75) < 0.02);
    CHECK(res.stats.abort); // 0.25 is far above the 0.11 threshold
}

TEST_CASE("breidbart analyzer sits between the bases and reads both at 85 percent") {
    qkd::BreidbartStrategy eve(22.5);
    qkd::RandomStream rng(4);
    for (std::uint64_t slot = 0; slot < 100; ++slot) {
        const auto out = eve.intercept(probe(slot, 0, Basis::X), rng);
        REQUIRE(out.size() == 1);
        const double a = out[0].polarization.angle;
        CHECK((a == 22.5 || a == 112.5));
    }

    const auto res = run_attack(
        attack_config(R"({"strategy": "breidbart", "analyzer_angle": 22.5})", 6200));
    REQUIRE(res.stats.qber_defined);
    const double overlap = qkd::cos2_deg(22.5);
    CHECK(std::fabs(res.stats.eve_known_fraction - overlap) < 0.015);
    CHECK(std::fabs(res.stats.qber - 0.25) < 0.025);
    CHECK(res.stats.abort);
}

TEST_CASE("a basis-aligned intermediate analyzer reads only one basis") {
    const auto res = run_attack(
        attack_config(R"({"strategy": "breidbart", "analyzer_angle": 0.0})", 6300));
    REQUIRE(res.stats.qber_defined);
    CHECK(std::fabs(res.stats.eve_known_fraction - 0.75) < 0.02);
    CHECK(std::fabs(res.stats.qber - 0.25) < 0.025);
}

TEST_CASE("faked states finds the blind emission times for a gross mismatch") {
    qkd::FakedStatesStrategy eve(true, 0.01);
    eve.session_start(mismatch_context(3.0));
    CHECK(eve.blind_exact());
    CHECK(eve.best_ratio() == 0.0);
    // D1 moved to [2, 4]: bit 0 emits on D0's plateau start, bit 1 on D1's
    CHECK(std::fabs(eve.emit_time(0) - (-0.5)) < 0.011);
    CHECK(std::fabs(eve.emit_time(1) - 2.5) < 0.011);

    qkd::RandomStream rng(5);
    const auto out = eve.intercept(probe(7, 1, Basis::X), rng);
    REQUIRE(out.size() == 1);
    const qkd::EveLogEntry* e = eve.log().find(7);
    REQUIRE(e != nullptr);
    CHECK(e->action == EveAction::FakedState);
    // she emits the opposite bit in the opposite basis, timed for her result
    CHECK(out[0].polarization.angle ==
          qkd::encode_bit(1 - e->guess, qkd::other(e->basis)).angle);
    CHECK(out[0].arrival_time == 7.0 * 5000.0 + eve.emit_time(e->guess));
    CHECK(e->aux == eve.emit_time(e->guess));
}

TEST_CASE("strict faked states refuses to run without any mismatch") {
    qkd::FakedStatesStrategy eve(true, 0.01);
    try {
        eve.session_start(mismatch_context(0.0));
        FAIL("expected EveError");
    } catch (const EveError& err) {
        CHECK(std::string(err.what()).find("ratio is 1") != std::string::npos);
    }
}

TEST_CASE("non-strict faked states against identical gates just causes noise") {
    qkd::FakedStatesStrategy eve(false, 0.01);
    eve.session_start(mismatch_context(0.0));
    CHECK_FALSE(eve.blind_exact());
    CHECK(eve.best_ratio() == 1.0);

    const auto res = run_attack(attack_config(
        R"({"strategy": "faked_states", "strict": false, "search_step": 0.01})", 6400));
    REQUIRE(res.stats.qber_defined);
    CHECK(std::fabs(res.stats.qber - 0.5) < 0.03);
    CHECK(res.stats.abort);
}

TEST_CASE("time shift needs a mismatch and a straddled arrival") {
    qkd::TimeShiftStrategy flat(-0.5, 1.0);
    CHECK_THROWS_AS(flat.session_start(mismatch_context(0.0)), EveError);

    qkd::TimeShiftStrategy late(-0.5, 1.0);
    SessionContext far = mismatch_context(0.4);
    far.channel_delay = 2.0; // both targets land before the arrival
    CHECK_THROWS_AS(late.session_start(far), EveError);
}

TEST_CASE("time shift derives its guesses from the curve heads and tails") {
    qkd::TimeShiftStrategy eve(-0.5, 1.0);
    SessionContext ctx = mismatch_context(0.4);
    ctx.channel_delay = 0.3;
    eve.session_start(ctx);
    // at -0.5 only D0's window has opened; at 1.0 only D1's is still open
    CHECK(eve.guess_for_early() == 0);
    CHECK(eve.guess_for_late() == 1);

    qkd::RandomStream rng(6);
    int early_count = 0;
    const int n = 4000;
    for (std::uint64_t slot = 0; slot < n; ++slot) {
        OpticalPulse in = probe(slot, 1, Basis::X);
        in.arrival_time += 0.3;
        const auto out = eve.intercept(in, rng);
        REQUIRE(out.size() == 1);
        // polarization untouched, only the timing moves
        CHECK(out[0].polarization.angle == in.polarization.angle);
        const qkd::EveLogEntry* e = eve.log().find(slot);
        REQUIRE(e != nullptr);
        const bool early = e->action == EveAction::ShiftEarly;
        if (early) ++early_count;
        const double target = early ? -0.5 : 1.0;
        CHECK(out[0].arrival_time == static_cast<double>(slot) * 5000.0 + target);
        CHECK(e->aux == target);
        CHECK(e->guess == (early ? eve.guess_for_early() : eve.guess_for_late()));
    }
    CHECK(std::fabs(early_count / double(n) - 0.5) < 0.032); // 4 sigma
}

TEST_CASE("after-gate pulses land after both windows close") {
    qkd::AfterGateStrategy eve(1500.0, 1.0);
    eve.session_start(mismatch_context(0.4));
    CHECK(eve.bright_time() == doctest::Approx(2.4)); // latest window end 1.4 + offset

    qkd::RandomStream rng(7);
    const auto out = eve.intercept(probe(3, 0, Basis::Z), rng);
    REQUIRE(out.size() == 1);
    const qkd::EveLogEntry* e = eve.log().find(3);
    REQUIRE(e != nullptr);
    CHECK(e->action == EveAction::BrightPulse);
    CHECK(e->aux == 1500.0);
    CHECK(out[0].intensity == 1500.0);
    CHECK(out[0].duration == 0.0);
    CHECK(out[0].arrival_time == 3.0 * 5000.0 + eve.bright_time());
    // the bright pulse encodes her measured bit in her measurement basis
    CHECK(out[0].polarization.angle == qkd::encode_bit(e->guess, e->basis).angle);
}

TEST_CASE("after-gate power must make a full pulse click and a half pulse not") {
    for (double power : {500.0, 2000.0, 4000.0}) {
        qkd::AfterGateStrategy eve(power, 1.0);
        CHECK_THROWS_AS(eve.session_start(mismatch_context(0.0)), EveError);
    }
    qkd::AfterGateStrategy ok(1999.0, 1.0);
    CHECK_NOTHROW(ok.session_start(mismatch_context(0.0)));
}

TEST_CASE("after-gate session stays under the abort threshold") {
    const std::string text = R"({"num_pulses": 20000, "seed": 6500,
        "detectors": {"d0": {"dark_count_prob": 0.0, "afterpulse_prob": 0.05},
                      "d1": {"dark_count_prob": 0.0, "afterpulse_prob": 0.05}},
        "eve": {"strategy": "after_gate", "pulse_power": 1500.0, "pulse_time_offset": 1.0}})";
    const qkd::SessionConfig cfg = qkd::parse_config(text);
    const auto res = run_attack(cfg);
    REQUIRE(res.stats.qber_defined);
    CHECK_FALSE(res.stats.abort);
    CHECK(res.stats.qber < 0.07); // analytic value is about 0.023
    CHECK(res.stats.eve_known_fraction > 0.92);
    CHECK(std::fabs(res.stats.detection_rate - 0.524) < 0.016);
}

TEST_CASE("calibration spoofing restructures bright pulses only") {
    OpticalPulse bright;
    bright.slot = 0;
    bright.arrival_time = 100.0;
    bright.intensity = 1000.0;
    bright.duration = 2.0;
    bright.polarization = {0.0};

    const OpticalPulse spoofed = qkd::CalibrationSpoofStrategy::spoof(bright, 0.4);
    CHECK(spoofed.arrival_time == 100.0);
    CHECK(spoofed.intensity == 1000.0);
    CHECK(spoofed.duration == 0.8); // the halves sit delta apart
    REQUIRE(spoofed.segments.size() == 2);
    CHECK(spoofed.segments[0].fraction == 0.5);
    CHECK(spoofed.segments[0].pol.angle == 45.0);
    CHECK(spoofed.segments[1].fraction == 0.5);
    CHECK(spoofed.segments[1].pol.angle == 135.0);

    qkd::CalibrationSpoofStrategy eve(0.4);
    qkd::RandomStream rng(8);
    auto out = eve.intercept(bright, rng);
    REQUIRE(out.size() == 1);
    CHECK(out[0].duration == 0.8);
    CHECK(eve.log().entries().size() == 1);
    CHECK(eve.log().entries()[0].action == EveAction::SpoofCalibration);

    // single photons pass untouched and unlogged
    const OpticalPulse photon = probe(1, 0, Basis::Z);
    out = eve.intercept(photon, rng);
    REQUIRE(out.size() == 1);
    CHECK(out[0].polarization.angle == photon.polarization.angle);
    CHECK(out[0].duration == photon.duration);
    CHECK(out[0].segments.empty());
    CHECK(eve.log().entries().size() == 1); // unchanged
}

TEST_CASE("strategy factory matches the configured kinds") {
    qkd::EveSpec spec;
    CHECK(qkd::make_strategy(spec) == nullptr);

    using Kind = qkd::EveSpec::Kind;
    const std::pair<Kind, const char*> expect[] = {
        {Kind::InterceptResend, "intercept_resend"}, {Kind::Breidbart, "breidbart"},
        {Kind::FakedStates, "faked_states"},         {Kind::TimeShift, "time_shift"},
        {Kind::AfterGate, "after_gate"},             {Kind::CalibrationSpoof, "calibration_spoof"},
    };
    for (const auto& [kind, name] : expect) {
        spec.kind = kind;
        auto s = qkd::make_strategy(spec);
        REQUIRE(s != nullptr);
        CHECK(std::string(s->name()) == name);
    }
}

TEST_CASE("action names are stable for the logs") {
    CHECK(std::string(qkd::eve_action_name(EveAction::Pass)) == "pass");
    CHECK(std::string(qkd::eve_action_name(EveAction::Resend)) == "resend");
    CHECK(std::string(qkd::eve_action_name(EveAction::FakedState)) == "faked_state");
    CHECK(std::string(qkd::eve_action_name(EveAction::ShiftEarly)) == "shift_early");
    CHECK(std::string(qkd::eve_action_name(EveAction::ShiftLate)) == "shift_late");
    CHECK(std::string(qkd::eve_action_name(EveAction::BrightPulse)) == "bright_pulse");
    CHECK(std::string(qkd::eve_action_name(EveAction::SpoofCalibration)) == "spoof_calibration");
}

} // TEST_SUITE
