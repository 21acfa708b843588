#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qkdlab/rng.hpp"
#include "qkdlab/timing.hpp"

using qkd::Basis;
using qkd::TimingEvent;

namespace {

TimingEvent ev(double t, Basis basis, int detector) {
    static std::uint64_t slot = 0;
    return {slot++, t, basis, detector};
}

} // namespace

TEST_SUITE("timing") {

TEST_CASE("normal cdf hits the tabulated values") {
    CHECK(qkd::normal_cdf(0.0) == 0.5);
    CHECK(std::fabs(qkd::normal_cdf(1.0) - 0.841344746069) < 1e-9);
    CHECK(std::fabs(qkd::normal_cdf(-1.0) - (1.0 - 0.841344746069)) < 1e-9);
    for (double x : {-3.0, -0.7, 0.3, 2.5})
        CHECK(qkd::normal_cdf(x) + qkd::normal_cdf(-x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("binary entropy and the information map") {
    CHECK(qkd::binary_entropy(0.5) == 1.0);
    CHECK(qkd::binary_entropy(0.0) == 0.0);
    CHECK(qkd::binary_entropy(1.0) == 0.0);
    CHECK(std::fabs(qkd::binary_entropy(0.25) - 0.8112781244591328) < 1e-12);
    CHECK(qkd::info_from_accuracy(0.5) == 0.0);
    CHECK(qkd::info_from_accuracy(1.0) == 1.0);
    CHECK(std::fabs(qkd::info_from_accuracy(0.75) - 0.1887218755408672) < 1e-12);
}

TEST_CASE("a two-sigma separation yields the tabulated leak") {
    // centroids 0 and 0.2, per-class deviations give pooled sigma 0.1, so
    // the model accuracy is Phi(1)
    const std::vector<TimingEvent> events = {
        ev(-0.1, Basis::Z, 0), ev(0.1, Basis::Z, 0),
        ev(0.1, Basis::Z, 1), ev(0.3, Basis::Z, 1),
    };
    const qkd::TimingAnalysis an = qkd::analyze_timing(events);
    const qkd::BasisAnalysis& z = an.per_basis[0];
    REQUIRE(z.defined);
    CHECK(z.n0 == 2);
    CHECK(z.n1 == 2);
    CHECK(z.centroid0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(z.centroid1 == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(z.separation == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(z.sigma_pooled == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(std::fabs(z.accuracy - 0.841344746069) < 1e-9);
    CHECK(std::fabs(z.info_bits - 0.368917232594) < 1e-9);
    // midpoint classification: of the four samples, only the D0 point at the
    // midpoint itself is misread
    CHECK(z.empirical_accuracy == 0.75);
    CHECK_FALSE(z.perfect_separation);
    CHECK_FALSE(an.per_basis[1].defined);
    CHECK(an.events == 4);
    CHECK(an.info_per_bit == z.info_bits);
}

TEST_CASE("zero spread with distinct centroids is a total leak") {
    const std::vector<TimingEvent> events = {
        ev(0.0, Basis::X, 0), ev(0.0, Basis::X, 0), ev(0.0, Basis::X, 0),
        ev(0.4, Basis::X, 1), ev(0.4, Basis::X, 1),
    };
    const qkd::BasisAnalysis& x = qkd::analyze_timing(events).per_basis[1];
    REQUIRE(x.defined);
    CHECK(x.perfect_separation);
    CHECK(x.sigma_pooled == 0.0);
    CHECK(x.accuracy == 1.0);
    CHECK(x.info_bits == 1.0);
    CHECK(x.empirical_accuracy == 1.0);
}

TEST_CASE("identical populations leak nothing") {
    const std::vector<TimingEvent> events = {
        ev(0.0, Basis::Z, 0), ev(1.0, Basis::Z, 0),
        ev(0.0, Basis::Z, 1), ev(1.0, Basis::Z, 1),
    };
    const qkd::BasisAnalysis& z = qkd::analyze_timing(events).per_basis[0];
    REQUIRE(z.defined);
    CHECK(z.separation == 0.0);
    CHECK(z.accuracy == 0.5);
    CHECK(z.info_bits == 0.0);
    CHECK(z.empirical_accuracy == 0.5);
}

TEST_CASE("headline leak averages the bases by event count") {
    std::vector<TimingEvent> events = {
        ev(-0.1, Basis::Z, 0), ev(0.1, Basis::Z, 0),
        ev(0.1, Basis::Z, 1), ev(0.3, Basis::Z, 1), // 4 events at Phi(1)
        ev(0.0, Basis::X, 0), ev(0.0, Basis::X, 0), ev(0.0, Basis::X, 0),
        ev(0.4, Basis::X, 1), ev(0.4, Basis::X, 1), // 5 events, total leak
    };
    const qkd::TimingAnalysis an = qkd::analyze_timing(events);
    REQUIRE(an.per_basis[0].defined);
    REQUIRE(an.per_basis[1].defined);
    const double expect =
        (4.0 * an.per_basis[0].info_bits + 5.0 * an.per_basis[1].info_bits) / 9.0;
    CHECK(an.info_per_bit == doctest::Approx(expect).epsilon(1e-12));

    // a basis with a single silent detector contributes nothing
    events.push_back(ev(9.0, Basis::X, 1));
    events.erase(events.begin() + 4, events.begin() + 9); // drop all other X events
    const qkd::TimingAnalysis only_z = qkd::analyze_timing(events);
    CHECK_FALSE(only_z.per_basis[1].defined);
    CHECK(only_z.info_per_bit == only_z.per_basis[0].info_bits);
}

TEST_CASE("no events at all is a defined zero") {
    const qkd::TimingAnalysis an = qkd::analyze_timing({});
    CHECK(an.events == 0);
    CHECK(an.info_per_bit == 0.0);
    CHECK_FALSE(an.per_basis[0].defined);
    CHECK_FALSE(an.per_basis[1].defined);
}

TEST_CASE("large synthetic populations recover the model constants") {
    // the reference geometry: separation 0.5 ns, sigma 0.15 ns
    qkd::RandomStream rng(4242);
    std::vector<TimingEvent> events;
    const int n = 50000;
    for (int i = 0; i < n; ++i) events.push_back(ev(rng.normal(0.0, 0.15), Basis::Z, 0));
    for (int i = 0; i < n; ++i) events.push_back(ev(rng.normal(0.5, 0.15), Basis::Z, 1));

    const qkd::BasisAnalysis& z = qkd::analyze_timing(events).per_basis[0];
    REQUIRE(z.defined);
    CHECK(std::fabs(z.centroid0 - 0.0) < 0.003);
    CHECK(std::fabs(z.centroid1 - 0.5) < 0.003);
    CHECK(std::fabs(z.sigma_pooled - 0.15) < 0.002);
    CHECK(std::fabs(z.accuracy - 0.952209647727) < 0.003);
    CHECK(std::fabs(z.info_bits - 0.723064672183) < 0.015);
    CHECK(std::fabs(z.empirical_accuracy - z.accuracy) < 0.005);
}

TEST_CASE("the truncation model starts at the continuous limit and decays") {
    const double d = 0.5, s = 0.15;
    CHECK(std::fabs(qkd::truncated_accuracy_model(d, s, 0.0) - 0.952209647727) < 1e-9);
    CHECK(std::fabs(qkd::truncated_info_model(d, s, 0.0) - 0.723064672183) < 1e-9);

    // frozen quadrature values for the reference geometry
    const std::pair<double, double> frozen[] = {
        {0.05, 0.71321298}, {0.2, 0.68465914},       {0.4, 0.68465914},
        {0.8, 0.44762567},  {1.6, 0.00037337739},
    };
    for (const auto& [r, info] : frozen) {
        INFO("resolution ", r);
        CHECK(qkd::truncated_info_model(d, s, r) == doctest::Approx(info).epsilon(1e-6));
    }
    CHECK(qkd::truncated_info_model(d, s, 3.2) < 1e-9);

    // Rounding to r = d/5 puts the decision boundary d/2 on a cell edge, so
    // the cell-level ML rule matches the continuous threshold and nothing is
    // lost. Truncation grids are not refinements of each other, which is why
    // the model is not monotone between arbitrary resolutions.
    CHECK(std::fabs(qkd::truncated_info_model(d, s, 0.1) -
                    qkd::truncated_info_model(d, s, 0.0)) < 1e-12);

    // along the octave sweep the loss only ever grows
    double prev = qkd::truncated_info_model(d, s, 0.0);
    for (double r : {0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
        const double cur = qkd::truncated_info_model(d, s, r);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("the truncation model handles degenerate spreads") {
    // zero sigma: everything depends on whether the rounded cells differ
    CHECK(qkd::truncated_accuracy_model(0.5, 0.0, 0.2) == 1.0);
    CHECK(qkd::truncated_accuracy_model(0.5, 0.0, 2.0) == 0.5);
    CHECK(qkd::truncated_accuracy_model(0.0, 0.0, 0.2) == 0.5);
}

TEST_CASE("event truncation rounds to the grid, ties to even") {
    std::vector<TimingEvent> events = {
        ev(0.25, Basis::Z, 0), ev(0.75, Basis::Z, 0), ev(-0.75, Basis::Z, 1),
        ev(0.30, Basis::Z, 1), ev(1.10, Basis::X, 0),
    };
    const auto out = qkd::truncate_events(events, 0.5);
    REQUIRE(out.size() == events.size());
    CHECK(out[0].timestamp == 0.0);  // 0.5 cell tie, even neighbor 0
    CHECK(out[1].timestamp == 1.0);  // 1.5 cell tie, even neighbor 2
    CHECK(out[2].timestamp == -1.0);
    CHECK(out[3].timestamp == 0.5);
    CHECK(out[4].timestamp == 1.0);
    // identity when the resolution is switched off
    const auto same = qkd::truncate_events(events, 0.0);
    for (std::size_t i = 0; i < events.size(); ++i)
        CHECK(same[i].timestamp == events[i].timestamp);
    // metadata rides along untouched
    CHECK(out[4].basis == Basis::X);
    CHECK(out[2].detector == 1);
}

TEST_CASE("histograms bin by basis and detector") {
    // timestamps at bin centers so float noise cannot move them
    const std::vector<TimingEvent> events = {
        ev(-0.025, Basis::Z, 0), ev(0.025, Basis::Z, 1),
        ev(0.075, Basis::X, 0), ev(0.125, Basis::X, 1), ev(0.125, Basis::X, 1),
    };
    const qkd::TimingHistograms h = qkd::build_histograms(events, 0.05);
    CHECK(h.bin_width == 0.05);
    CHECK(h.origin == doctest::Approx(-0.05).epsilon(1e-12));
    REQUIRE(h.bins == 4);
    CHECK(h.counts[0][0] == 1); // Z-D0 at -0.025
    CHECK(h.counts[1][1] == 1); // Z-D1 at 0.025
    CHECK(h.counts[2][2] == 1); // X-D0 at 0.075
    CHECK(h.counts[3][3] == 2); // X-D1 at 0.125, twice
    std::uint64_t total = 0;
    for (const auto& c : h.counts)
        for (std::uint64_t v : c) total += v;
    CHECK(total == events.size());

    CHECK_THROWS_AS((void)qkd::build_histograms(events, 0.0), std::invalid_argument);
    const qkd::TimingHistograms empty = qkd::build_histograms({}, 0.05);
    CHECK(empty.bins == 0);
}

TEST_CASE("bob records convert to events without ambiguous clicks") {
    std::vector<qkd::BobSlotRecord> records(4);
    records[0].slot = 0;
    records[0].basis = Basis::Z;
    records[0].outcome.kind = qkd::ClickKind::D0;
    records[0].revealed_timestamp = 0.125;
    records[1].slot = 1;
    records[1].outcome.kind = qkd::ClickKind::None;
    records[2].slot = 2;
    records[2].basis = Basis::X;
    records[2].outcome.kind = qkd::ClickKind::Both;
    records[3].slot = 3;
    records[3].basis = Basis::X;
    records[3].outcome.kind = qkd::ClickKind::D1;
    records[3].revealed_timestamp = -0.5;

    const auto events = qkd::events_from_bob(records);
    REQUIRE(events.size() == 2);
    CHECK(events[0].slot == 0);
    CHECK(events[0].detector == 0);
    CHECK(events[0].timestamp == 0.125);
    CHECK(events[0].basis == Basis::Z);
    CHECK(events[1].slot == 3);
    CHECK(events[1].detector == 1);
    CHECK(events[1].basis == Basis::X);
}

} // TEST_SUITE
