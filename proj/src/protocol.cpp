#include "qkdlab/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "qkdlab/kernels.hpp"

namespace qkd {

SiftedKey sift(const std::vector<AliceSlotRecord>& alice, const std::vector<BobSlotRecord>& bob) {
    SiftedKey key;
    const std::size_t n = std::min(alice.size(), bob.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = alice[i];
        const auto& b = bob[i];
        if (a.basis != b.basis) continue;
        if (b.outcome.kind != ClickKind::D0 && b.outcome.kind != ClickKind::D1) continue;
        key.entries.push_back({a.slot, a.bit, b.outcome.kind == ClickKind::D0 ? 0 : 1});
    }
    return key;
}

QberEstimate estimate_qber(const SiftedKey& key, double sample_fraction, RandomStream& rng) {
    QberEstimate est;
    const std::size_t n = key.size();
    if (n == 0) return est;

    std::size_t k = static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, 1, n);

    // partial Fisher-Yates: the first k positions become the public sample
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - i));
        std::swap(idx[i], idx[j]);
    }

    std::vector<bool> spent(n, false);
    for (std::size_t i = 0; i < k; ++i) {
        const SiftedEntry& e = key.entries[idx[i]];
        if (e.alice_bit != e.bob_bit) ++est.disagreements;
        spent[idx[i]] = true;
    }
    est.sampled = k;
    est.qber = static_cast<double>(est.disagreements) / static_cast<double>(k);
    est.defined = true;
    for (std::size_t i = 0; i < n; ++i)
        if (!spent[i]) est.remaining.entries.push_back(key.entries[i]);
    return est;
}

bool abort_decision(const QberEstimate& est, double threshold) {
    return !est.defined || est.qber > threshold;
}

double eve_info_accounting(const SiftedKey& key, const EveLog& log, RandomStream& guess_rng) {
    if (key.empty()) return 0.5;
    std::uint64_t correct = 0;
    for (const SiftedEntry& e : key.entries) {
        const EveLogEntry* entry = log.find(e.slot);
        const int guess = (entry && entry->has_guess) ? entry->guess : guess_rng.bit();
        if (guess == e.alice_bit) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(key.size());
}

SessionResult run_session(const SessionConfig& cfg, EveStrategy* strategy, std::uint64_t trial) {
    SessionResult res;

    RandomStream alice_rng(cfg.seed, trial, "alice");
    RandomStream bob_rng(cfg.seed, trial, "bob");
    RandomStream channel_rng(cfg.seed, trial, "channel");
    RandomStream detector_rng(cfg.seed, trial, "detector");
    RandomStream eve_rng(cfg.seed, trial, "eve");
    RandomStream qber_rng(cfg.seed, trial, "qber");
    RandomStream guess_rng(cfg.seed, trial, "eve-guess");

    if (strategy) {
        SessionContext ctx;
        ctx.detectors[0] = cfg.detectors[0];
        ctx.detectors[1] = cfg.detectors[1];
        ctx.schedule = cfg.schedule;
        ctx.channel_delay = cfg.channel.delay;
        ctx.channel_loss = cfg.channel.loss_prob;
        ctx.num_pulses = cfg.num_pulses;
        strategy->session_start(ctx);
    }

    // the strategy planned against the nominal schedule above; the hardware
    // the session actually runs may have drifted
    GateSchedule schedule = cfg.schedule;
    if (schedule.offset_spread > 0.0) {
        RandomStream sched_rng(cfg.seed, trial, "schedule");
        schedule.gate_offset_d1 +=
            sched_rng.uniform(-0.5 * schedule.offset_spread, 0.5 * schedule.offset_spread);
    }
    DetectorPair pair(cfg.detectors[0], cfg.detectors[1], schedule);
    const double period = cfg.schedule.period;
    const auto& round = *kernels::active().round_multiple;

    res.alice.reserve(cfg.num_pulses);
    res.bob.reserve(cfg.num_pulses);

    for (std::uint64_t slot = 0; slot < cfg.num_pulses; ++slot) {
        AliceSlotRecord a;
        a.slot = slot;
        a.bit = alice_rng.bit();
        a.basis = alice_rng.bit() ? Basis::X : Basis::Z;
        a.emission_time = static_cast<double>(slot) * period;
        res.alice.push_back(a);

        OpticalPulse pulse;
        pulse.slot = slot;
        pulse.emission_time = a.emission_time;
        pulse.arrival_time = a.emission_time + cfg.channel.delay;
        pulse.intensity = 1.0;
        pulse.polarization = encode_bit(a.bit, a.basis);

        const bool lost = channel_rng.bernoulli(cfg.channel.loss_prob);
        std::vector<OpticalPulse> arriving;
        if (!lost) {
            if (strategy)
                arriving = strategy->intercept(pulse, eve_rng);
            else
                arriving.push_back(pulse);
        }

        BobSlotRecord b;
        b.slot = slot;
        b.basis = bob_rng.bit() ? Basis::X : Basis::Z;
        b.outcome = pair.process_gate(slot, arriving, b.basis, detector_rng);
        if (b.outcome.kind != ClickKind::None) {
            const double local = b.outcome.timestamp - static_cast<double>(slot) * period;
            double revealed = local;
            round(&local, &revealed, 1, cfg.timestamp_resolution);
            b.revealed_timestamp = revealed;
            ++res.stats.pulses_detected;
        }
        res.bob.push_back(b);
    }

    res.stats.pulses_sent = cfg.num_pulses;
    res.stats.detection_rate =
        cfg.num_pulses ? static_cast<double>(res.stats.pulses_detected) /
                             static_cast<double>(cfg.num_pulses)
                       : 0.0;

    res.sifted = sift(res.alice, res.bob);
    res.stats.sifted_bits = res.sifted.size();
    res.stats.sift_fraction =
        res.stats.pulses_detected ? static_cast<double>(res.stats.sifted_bits) /
                                        static_cast<double>(res.stats.pulses_detected)
                                  : 0.0;

    QberEstimate est = estimate_qber(res.sifted, cfg.sample_fraction, qber_rng);
    res.stats.qber_defined = est.defined;
    res.stats.qber = est.qber;
    res.stats.abort = abort_decision(est, cfg.qber_threshold);
    res.final_key = std::move(est.remaining);
    res.stats.final_key_bits = res.final_key.size();

    const EveLog empty;
    const EveLog& log = strategy ? strategy->log() : empty;
    res.stats.eve_known_fraction = eve_info_accounting(res.sifted, log, guess_rng);
    if (strategy) res.eve_log = strategy->log();

    return res;
}

} // namespace qkd
