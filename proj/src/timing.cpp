#include "qkdlab/timing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qkdlab/kernels.hpp"

namespace qkd {

std::vector<TimingEvent> events_from_bob(const std::vector<BobSlotRecord>& records) {
    std::vector<TimingEvent> events;
    for (const BobSlotRecord& r : records) {
        if (r.outcome.kind != ClickKind::D0 && r.outcome.kind != ClickKind::D1) continue;
        events.push_back({r.slot, r.revealed_timestamp, r.basis,
                          r.outcome.kind == ClickKind::D0 ? 0 : 1});
    }
    return events;
}

TimingHistograms build_histograms(const std::vector<TimingEvent>& events, double bin_width) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("histogram bin width must be positive");
    TimingHistograms h;
    h.bin_width = bin_width;
    if (events.empty()) return h;

    double lo = events.front().timestamp, hi = lo;
    for (const TimingEvent& e : events) {
        lo = std::min(lo, e.timestamp);
        hi = std::max(hi, e.timestamp);
    }
    h.origin = std::floor(lo / bin_width) * bin_width;
    h.bins = static_cast<std::size_t>(std::floor((hi - h.origin) / bin_width)) + 1;
    for (auto& c : h.counts) c.assign(h.bins, 0);
    for (const TimingEvent& e : events) {
        auto idx = static_cast<std::size_t>(std::floor((e.timestamp - h.origin) / bin_width));
        idx = std::min(idx, h.bins - 1);
        h.counts[static_cast<int>(e.basis) * 2 + e.detector][idx]++;
    }
    return h;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double info_from_accuracy(double accuracy) { return 1.0 - binary_entropy(accuracy); }

namespace {

BasisAnalysis analyze_basis(const std::vector<double>& t0, const std::vector<double>& t1) {
    const kernels::Ops& ops = kernels::active();
    BasisAnalysis a;
    a.n0 = t0.size();
    a.n1 = t1.size();
    double sum0 = 0.0, sumsq0 = 0.0, sum1 = 0.0, sumsq1 = 0.0;
    ops.sum_sumsq(t0.data(), t0.size(), &sum0, &sumsq0);
    ops.sum_sumsq(t1.data(), t1.size(), &sum1, &sumsq1);
    if (a.n0 > 0) a.centroid0 = sum0 / static_cast<double>(a.n0);
    if (a.n1 > 0) a.centroid1 = sum1 / static_cast<double>(a.n1);
    if (a.n0 == 0 || a.n1 == 0) return a;
    a.defined = true;
    a.separation = a.centroid1 - a.centroid0;

    // pooled population sigma from per-class second moments about each
    // class's own centroid
    const double dev0 = std::max(0.0, sumsq0 - sum0 * sum0 / static_cast<double>(a.n0));
    const double dev1 = std::max(0.0, sumsq1 - sum1 * sum1 / static_cast<double>(a.n1));
    a.sigma_pooled = std::sqrt((dev0 + dev1) / static_cast<double>(a.n0 + a.n1));

    const double d = std::fabs(a.separation);
    if (a.sigma_pooled > 0.0) {
        a.accuracy = normal_cdf(d / (2.0 * a.sigma_pooled));
    } else if (d > 0.0) {
        a.perfect_separation = true;
        a.accuracy = 1.0;
    }
    a.info_bits = info_from_accuracy(a.accuracy);

    if (d > 0.0) {
        const double mid = 0.5 * (a.centroid0 + a.centroid1);
        const std::size_t below0 = ops.count_below(t0.data(), t0.size(), mid);
        const std::size_t below1 = ops.count_below(t1.data(), t1.size(), mid);
        const std::size_t correct = a.centroid0 < a.centroid1
                                        ? below0 + (a.n1 - below1)
                                        : below1 + (a.n0 - below0);
        a.empirical_accuracy =
            static_cast<double>(correct) / static_cast<double>(a.n0 + a.n1);
    }
    return a;
}

} // namespace

TimingAnalysis analyze_timing(const std::vector<TimingEvent>& events) {
    std::vector<double> ts[2][2];
    for (const TimingEvent& e : events)
        ts[static_cast<int>(e.basis)][e.detector].push_back(e.timestamp);

    TimingAnalysis out;
    out.events = events.size();
    double weighted = 0.0;
    std::size_t weight = 0;
    for (int b = 0; b < 2; ++b) {
        out.per_basis[b] = analyze_basis(ts[b][0], ts[b][1]);
        if (!out.per_basis[b].defined) continue;
        const std::size_t n = out.per_basis[b].n0 + out.per_basis[b].n1;
        weighted += out.per_basis[b].info_bits * static_cast<double>(n);
        weight += n;
    }
    if (weight > 0) out.info_per_bit = weighted / static_cast<double>(weight);
    return out;
}

std::vector<TimingEvent> truncate_events(std::vector<TimingEvent> events, double resolution) {
    std::vector<double> t(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) t[i] = events[i].timestamp;
    std::vector<double> rounded(t.size());
    kernels::active().round_multiple(t.data(), rounded.data(), t.size(), resolution);
    for (std::size_t i = 0; i < events.size(); ++i) events[i].timestamp = rounded[i];
    return events;
}

double truncated_accuracy_model(double separation, double sigma, double resolution) {
    const double d = std::fabs(separation);
    if (resolution <= 0.0) {
        if (sigma > 0.0) return normal_cdf(d / (2.0 * sigma));
        return d > 0.0 ? 1.0 : 0.5;
    }
    if (sigma <= 0.0) {
        const double k0 = std::nearbyint(0.0);
        const double k1 = std::nearbyint(d / resolution);
        return k0 == k1 ? 0.5 : 1.0;
    }
    // populations at 0 and d; cell k covers [kr - r/2, kr + r/2)
    const double r = resolution;
    const auto kmin = static_cast<long>(std::floor((-9.0 * sigma) / r)) - 1;
    const auto kmax = static_cast<long>(std::ceil((d + 9.0 * sigma) / r)) + 1;
    double acc = 0.0;
    for (long k = kmin; k <= kmax; ++k) {
        const double lo = (static_cast<double>(k) - 0.5) * r;
        const double hi = (static_cast<double>(k) + 0.5) * r;
        const double p0 = normal_cdf(hi / sigma) - normal_cdf(lo / sigma);
        const double p1 = normal_cdf((hi - d) / sigma) - normal_cdf((lo - d) / sigma);
        acc += std::max(p0, p1);
    }
    // open tails: the left tail belongs to population 0, the right to 1
    acc += normal_cdf((static_cast<double>(kmin) - 0.5) * r / sigma);
    acc += 1.0 - normal_cdf(((static_cast<double>(kmax) + 0.5) * r - d) / sigma);
    return 0.5 * acc;
}

double truncated_info_model(double separation, double sigma, double resolution) {
    return info_from_accuracy(truncated_accuracy_model(separation, sigma, resolution));
}

} // namespace qkd
