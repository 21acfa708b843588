#include "qkdlab/harness.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qkdlab/attacks.hpp"

namespace qkd {

namespace {

using nlohmann::json;

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

TrialResult summarize_trial(std::uint64_t trial, const SessionResult& result) {
    TrialResult t;
    t.trial = trial;
    t.stats = result.stats;
    t.timing_info_bits = analyze_timing(events_from_bob(result.bob)).info_per_bit;
    return t;
}

} // namespace

ScenarioReport run_scenario(const SessionConfig& cfg, std::uint64_t trials, unsigned jobs) {
    if (trials == 0) throw std::invalid_argument("need at least one trial");
    ScenarioReport report;
    report.config_hash = config_hash(cfg);
    report.seed = cfg.seed;
    report.trials = trials;
    report.per_trial.resize(trials);

    const auto run_one = [&](std::uint64_t trial) {
        std::unique_ptr<EveStrategy> strategy = make_strategy(cfg.eve);
        SessionResult result = run_session(cfg, strategy.get(), trial);
        report.per_trial[trial] = summarize_trial(trial, result);
        if (trial == 0) report.first = std::move(result);
    };

    unsigned workers = jobs == 0 ? std::thread::hardware_concurrency() : jobs;
    if (workers == 0) workers = 1;
    if (static_cast<std::uint64_t>(workers) > trials) workers = static_cast<unsigned>(trials);

    if (workers <= 1) {
        for (std::uint64_t i = 0; i < trials; ++i) run_one(i);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::uint64_t i = next.fetch_add(1);
                    if (i >= trials) return;
                    try {
                        run_one(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    Aggregate& agg = report.aggregate;
    for (const TrialResult& t : report.per_trial) {
        if (t.stats.qber_defined) {
            agg.mean_qber += t.stats.qber;
            agg.qber_trials++;
        }
        agg.mean_detection_rate += t.stats.detection_rate;
        agg.mean_sift_fraction += t.stats.sift_fraction;
        agg.mean_eve_known_fraction += t.stats.eve_known_fraction;
        agg.mean_timing_info_bits += t.timing_info_bits;
        agg.mean_final_key_bits += static_cast<double>(t.stats.final_key_bits);
        if (t.stats.abort) agg.aborted_trials++;
    }
    const auto n = static_cast<double>(trials);
    if (agg.qber_trials > 0) agg.mean_qber /= static_cast<double>(agg.qber_trials);
    agg.mean_detection_rate /= n;
    agg.mean_sift_fraction /= n;
    agg.mean_eve_known_fraction /= n;
    agg.mean_timing_info_bits /= n;
    agg.mean_final_key_bits /= n;
    report.any_abort = agg.aborted_trials > 0;
    return report;
}

std::vector<SweepPoint> run_sweep(const SessionConfig& base, const std::string& param_path,
                                  const std::vector<double>& values, std::uint64_t trials,
                                  unsigned jobs) {
    if (param_path.empty()) throw std::invalid_argument("sweep needs a parameter path");
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");

    std::string pointer = "/" + param_path;
    for (char& c : pointer)
        if (c == '.') c = '/';

    std::vector<SweepPoint> points;
    for (double value : values) {
        json j = json::parse(serialize_config(base));
        const json::json_pointer ptr(pointer);
        if (!j.contains(ptr)) {
            throw ConfigError("sweep parameter " + param_path +
                              " does not name a field of this scenario");
        }
        json& node = j[ptr];
        if (node.is_number_unsigned() && value >= 0.0 && value == std::floor(value))
            node = static_cast<std::uint64_t>(value);
        else if (node.is_number_integer() && value == std::floor(value))
            node = static_cast<std::int64_t>(value);
        else
            node = value;
        const SessionConfig cfg = parse_config(j.dump());
        SweepPoint p;
        p.value = value;
        p.aggregate = run_scenario(cfg, trials, jobs).aggregate;
        points.push_back(p);
    }
    return points;
}

void write_events_csv(const std::string& path, const SessionResult& result) {
    std::ofstream out = open_out(path);
    out << "slot,alice_bit,alice_basis,bob_basis,outcome,timestamp\n";
    for (std::size_t i = 0; i < result.alice.size(); ++i) {
        const AliceSlotRecord& a = result.alice[i];
        const BobSlotRecord& b = result.bob[i];
        const char* outcome = "none";
        bool clicked = true;
        switch (b.outcome.kind) {
            case ClickKind::None: outcome = "none"; clicked = false; break;
            case ClickKind::D0: outcome = "D0"; break;
            case ClickKind::D1: outcome = "D1"; break;
            case ClickKind::Both: outcome = "both"; break;
        }
        out << a.slot << ',' << a.bit << ',' << basis_name(a.basis) << ',' << basis_name(b.basis)
            << ',' << outcome << ',';
        if (clicked) out << format_double("%.9f", b.revealed_timestamp);
        out << '\n';
    }
}

void write_eve_csv(const std::string& path, const EveLog& log) {
    std::ofstream out = open_out(path);
    out << "slot,action,basis,guess,aux\n";
    for (const EveLogEntry& e : log.entries()) {
        out << e.slot << ',' << eve_action_name(e.action) << ',';
        if (e.has_basis) out << basis_name(e.basis);
        out << ',';
        if (e.has_guess) out << e.guess;
        out << ',' << format_double("%.9g", e.aux) << '\n';
    }
}

void write_summary_json(const std::string& path, const ScenarioReport& report) {
    json agg;
    agg["mean_qber"] = report.aggregate.mean_qber;
    agg["qber_trials"] = report.aggregate.qber_trials;
    agg["mean_detection_rate"] = report.aggregate.mean_detection_rate;
    agg["mean_sift_fraction"] = report.aggregate.mean_sift_fraction;
    agg["mean_eve_known_fraction"] = report.aggregate.mean_eve_known_fraction;
    agg["mean_timing_info_bits"] = report.aggregate.mean_timing_info_bits;
    agg["mean_final_key_bits"] = report.aggregate.mean_final_key_bits;
    agg["aborted_trials"] = report.aggregate.aborted_trials;
    agg["any_abort"] = report.any_abort;

    json trials = json::array();
    for (const TrialResult& t : report.per_trial) {
        json row;
        row["trial"] = t.trial;
        row["pulses_detected"] = t.stats.pulses_detected;
        row["detection_rate"] = t.stats.detection_rate;
        row["sifted_bits"] = t.stats.sifted_bits;
        row["sift_fraction"] = t.stats.sift_fraction;
        row["qber_defined"] = t.stats.qber_defined;
        row["qber"] = t.stats.qber;
        row["abort"] = t.stats.abort;
        row["final_key_bits"] = t.stats.final_key_bits;
        row["eve_known_fraction"] = t.stats.eve_known_fraction;
        row["timing_info_bits"] = t.timing_info_bits;
        trials.push_back(row);
    }

    json j;
    j["provenance"] = {{"config_hash", report.config_hash},
                       {"seed", report.seed},
                       {"trials", report.trials},
                       {"version", kVersion}};
    j["aggregate"] = agg;
    j["trials"] = trials;
    open_out(path) << j.dump(2) << '\n';
}

void write_sweep_csv(const std::string& path, const std::string& param_path,
                     const std::vector<SweepPoint>& points) {
    std::ofstream out = open_out(path);
    out << param_path
        << ",mean_qber,mean_eve_known_fraction,mean_detection_rate,mean_timing_info_bits,"
           "aborted_trials\n";
    for (const SweepPoint& p : points) {
        out << format_double("%.9g", p.value) << ','
            << format_double("%.9g", p.aggregate.mean_qber) << ','
            << format_double("%.9g", p.aggregate.mean_eve_known_fraction) << ','
            << format_double("%.9g", p.aggregate.mean_detection_rate) << ','
            << format_double("%.9g", p.aggregate.mean_timing_info_bits) << ','
            << p.aggregate.aborted_trials << '\n';
    }
}

void write_calibration_json(const std::string& path, const CalibrationResult& result) {
    json j;
    j["offset_d0"] = result.offset_d0;
    j["offset_d1"] = result.offset_d1;
    j["separation"] = result.offset_d1 - result.offset_d0;
    open_out(path) << j.dump(2) << '\n';
}

void write_calibration_scan_csv(const std::string& path, const CalibrationResult& result) {
    std::ofstream out = open_out(path);
    out << "offset,expected_d0,expected_d1\n";
    for (std::size_t i = 0; i < result.offsets.size(); ++i) {
        out << format_double("%.9g", result.offsets[i]) << ','
            << format_double("%.9g", result.expected_d0[i]) << ','
            << format_double("%.9g", result.expected_d1[i]) << '\n';
    }
}

void write_histograms_csv(const std::string& path, const TimingHistograms& h) {
    std::ofstream out = open_out(path);
    out << "bin_start,z_d0,z_d1,x_d0,x_d1\n";
    for (std::size_t i = 0; i < h.bins; ++i) {
        out << format_double("%.9f", h.origin + static_cast<double>(i) * h.bin_width);
        for (const auto& c : h.counts) out << ',' << c[i];
        out << '\n';
    }
}

void write_analysis_json(const std::string& path, const TimingAnalysis& analysis,
                         double truncation_resolution) {
    json j;
    j["events"] = analysis.events;
    j["info_per_bit"] = analysis.info_per_bit;
    j["truncation_resolution"] = truncation_resolution;
    const char* names[2] = {"Z", "X"};
    for (int b = 0; b < 2; ++b) {
        const BasisAnalysis& a = analysis.per_basis[b];
        json jb;
        jb["defined"] = a.defined;
        jb["n_d0"] = a.n0;
        jb["n_d1"] = a.n1;
        jb["centroid_d0"] = a.centroid0;
        jb["centroid_d1"] = a.centroid1;
        jb["separation"] = a.separation;
        jb["sigma_pooled"] = a.sigma_pooled;
        jb["accuracy"] = a.accuracy;
        jb["empirical_accuracy"] = a.empirical_accuracy;
        jb["info_bits"] = a.info_bits;
        jb["perfect_separation"] = a.perfect_separation;
        j["basis"][names[b]] = jb;
    }
    open_out(path) << j.dump(2) << '\n';
}

std::vector<TimingEvent> read_events_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<TimingEvent> events;
    std::string line;
    if (!std::getline(in, line) || line.rfind("slot,", 0) != 0)
        throw std::runtime_error(path + ": not an events csv (missing header)");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::array<std::string, 6> field;
        std::size_t start = 0, col = 0;
        for (; col < 6; ++col) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                field[col] = line.substr(start);
                ++col;
                break;
            }
            field[col] = line.substr(start, comma - start);
            start = comma + 1;
        }
        if (col != 6)
            throw std::runtime_error(path + ": bad row at line " + std::to_string(lineno));
        if (field[4] != "D0" && field[4] != "D1") continue;
        TimingEvent e;
        e.slot = std::stoull(field[0]);
        e.basis = field[3] == "X" ? Basis::X : Basis::Z;
        e.detector = field[4] == "D1" ? 1 : 0;
        e.timestamp = std::stod(field[5]);
        events.push_back(e);
    }
    return events;
}

void load_gate_offsets(const std::string& path, GateSchedule& schedule) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j = json::parse(in);
    schedule.gate_offset_d0 = j.at("offset_d0").get<double>();
    schedule.gate_offset_d1 = j.at("offset_d1").get<double>();
}

} // namespace qkd
