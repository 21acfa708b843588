#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkdlab/attacks.hpp"
#include "qkdlab/harness.hpp"
#include "qkdlab/mbp.hpp"

namespace fs = std::filesystem;

namespace {

void print_aggregate(const qkd::ScenarioReport& report) {
    const qkd::Aggregate& a = report.aggregate;
    std::printf("trials %llu  seed %llu  config %s\n",
                static_cast<unsigned long long>(report.trials),
                static_cast<unsigned long long>(report.seed), report.config_hash.c_str());
    std::printf("mean detection rate    %.6f\n", a.mean_detection_rate);
    std::printf("mean sift fraction     %.6f\n", a.mean_sift_fraction);
    if (a.qber_trials > 0)
        std::printf("mean QBER              %.6f  (defined in %llu trials)\n", a.mean_qber,
                    static_cast<unsigned long long>(a.qber_trials));
    else
        std::printf("mean QBER              undefined (no sifted bits)\n");
    std::printf("mean eve known frac    %.6f\n", a.mean_eve_known_fraction);
    std::printf("mean timing info       %.6f bits/bit\n", a.mean_timing_info_bits);
    std::printf("mean final key bits    %.1f\n", a.mean_final_key_bits);
    std::printf("aborted trials         %llu of %llu\n",
                static_cast<unsigned long long>(a.aborted_trials),
                static_cast<unsigned long long>(report.trials));
}

int cmd_run(const std::string& scenario, std::uint64_t trials, unsigned jobs, bool seed_set,
            std::uint64_t seed, const std::string& gates, const fs::path& out) {
    qkd::SessionConfig cfg = qkd::load_config(scenario);
    if (seed_set) cfg.seed = seed;
    if (!gates.empty()) qkd::load_gate_offsets(gates, cfg.schedule);
    qkd::ScenarioReport report = qkd::run_scenario(cfg, trials, jobs);
    fs::create_directories(out);
    qkd::write_events_csv((out / "events.csv").string(), report.first);
    if (cfg.eve.kind != qkd::EveSpec::Kind::None)
        qkd::write_eve_csv((out / "eve.csv").string(), report.first.eve_log);
    qkd::write_summary_json((out / "summary.json").string(), report);
    print_aggregate(report);
    std::printf("wrote %s\n", (out / "summary.json").string().c_str());
    return report.any_abort ? 2 : 0;
}

int cmd_sweep(const std::string& scenario, const std::string& param,
              const std::vector<double>& values, std::uint64_t trials, unsigned jobs,
              const fs::path& out) {
    qkd::SessionConfig cfg = qkd::load_config(scenario);
    std::vector<qkd::SweepPoint> points = qkd::run_sweep(cfg, param, values, trials, jobs);
    fs::create_directories(out);
    qkd::write_sweep_csv((out / "sweep.csv").string(), param, points);
    std::printf("%-14s %-10s %-10s %-10s %-10s %s\n", param.c_str(), "qber", "eve_frac", "det_rate",
                "timing", "aborts");
    for (const qkd::SweepPoint& p : points)
        std::printf("%-14.6g %-10.6f %-10.6f %-10.6f %-10.6f %llu\n", p.value,
                    p.aggregate.mean_qber, p.aggregate.mean_eve_known_fraction,
                    p.aggregate.mean_detection_rate, p.aggregate.mean_timing_info_bits,
                    static_cast<unsigned long long>(p.aggregate.aborted_trials));
    std::printf("wrote %s\n", (out / "sweep.csv").string().c_str());
    return 0;
}

int cmd_calibrate(const std::string& scenario, bool spoof_flag, bool delta_set, double delta_arg,
                  const fs::path& out) {
    qkd::SessionConfig cfg = qkd::load_config(scenario);
    const bool spoof = spoof_flag || cfg.eve.kind == qkd::EveSpec::Kind::CalibrationSpoof;
    const double delta = delta_set ? delta_arg : cfg.eve.delta;
    std::unique_ptr<qkd::EveStrategy> strategy;
    if (spoof) strategy = std::make_unique<qkd::CalibrationSpoofStrategy>(delta);
    qkd::RandomStream rng(cfg.seed, 0, "calibration");
    qkd::CalibrationResult result =
        qkd::run_calibration(cfg.calibration, cfg.detectors, cfg.channel.delay, strategy.get(), rng);
    fs::create_directories(out);
    qkd::write_calibration_json((out / "calibration.json").string(), result);
    qkd::write_calibration_scan_csv((out / "calibration_scan.csv").string(), result);
    std::printf("offset_d0 %.6f\noffset_d1 %.6f\nseparation %.6f\n", result.offset_d0,
                result.offset_d1, result.offset_d1 - result.offset_d0);
    if (spoof) std::printf("spoof active, delta %.6f\n", delta);
    std::printf("wrote %s\n", (out / "calibration.json").string().c_str());
    return 0;
}

int cmd_analyze(const std::string& events_path, double truncate, double bin, const fs::path& out) {
    std::vector<qkd::TimingEvent> events = qkd::read_events_csv(events_path);
    if (truncate > 0.0) events = qkd::truncate_events(events, truncate);
    const qkd::TimingAnalysis analysis = qkd::analyze_timing(events);
    const qkd::TimingHistograms hist = qkd::build_histograms(events, bin);
    fs::create_directories(out);
    qkd::write_histograms_csv((out / "histograms.csv").string(), hist);
    qkd::write_analysis_json((out / "analysis.json").string(), analysis, truncate);
    const char* names[2] = {"Z", "X"};
    for (int b = 0; b < 2; ++b) {
        const qkd::BasisAnalysis& a = analysis.per_basis[b];
        if (!a.defined) {
            std::printf("basis %s: not enough clicks\n", names[b]);
            continue;
        }
        std::printf("basis %s: n=%zu/%zu separation %.4f sigma %.4f accuracy %.4f "
                    "(empirical %.4f) info %.4f bits\n",
                    names[b], a.n0, a.n1, a.separation, a.sigma_pooled, a.accuracy,
                    a.empirical_accuracy, a.info_bits);
    }
    std::printf("timing leakage %.6f bits per sifted bit over %zu events\n", analysis.info_per_bit,
                analysis.events);
    std::printf("wrote %s\n", (out / "analysis.json").string().c_str());
    return 0;
}

int cmd_tables() {
    const qkd::mbp::TablesReport report = qkd::mbp::reproduce_tables();
    std::fputs(report.text.c_str(), stdout);
    if (!report.ok) {
        for (const std::string& m : report.mismatches)
            std::fprintf(stderr, "mismatch: %s\n", m.c_str());
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qkdlab: gated-detector BB84 eavesdropping laboratory"};
    app.require_subcommand(1);

    std::string run_scenario, run_gates;
    fs::path run_out = "out";
    std::uint64_t run_trials = 10, run_seed = 0;
    unsigned run_jobs = 0;
    CLI::App* run = app.add_subcommand("run", "run a scenario, write events/eve/summary");
    run->add_option("scenario", run_scenario, "scenario json")->required()->check(CLI::ExistingFile);
    run->add_option("--trials", run_trials, "independent trials")->capture_default_str();
    CLI::Option* run_seed_opt = run->add_option("--seed", run_seed, "override the scenario seed");
    run->add_option("--jobs", run_jobs, "worker threads, 0 = all cores")->capture_default_str();
    run->add_option("--out", run_out, "output directory")->capture_default_str();
    run->add_option("--gates", run_gates, "calibration.json whose offsets to install")
        ->check(CLI::ExistingFile);

    std::string sweep_scenario, sweep_param;
    std::vector<double> sweep_values;
    fs::path sweep_out = "out";
    std::uint64_t sweep_trials = 10;
    unsigned sweep_jobs = 0;
    CLI::App* sweep = app.add_subcommand("sweep", "re-run a scenario over parameter values");
    sweep->add_option("scenario", sweep_scenario, "scenario json")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--param", sweep_param, "dot path, e.g. schedule.gate_offset_d1")->required();
    sweep->add_option("--values", sweep_values, "comma separated values")
        ->required()
        ->delimiter(',');
    sweep->add_option("--trials", sweep_trials, "trials per value")->capture_default_str();
    sweep->add_option("--jobs", sweep_jobs, "worker threads, 0 = all cores")->capture_default_str();
    sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();

    std::string cal_scenario;
    fs::path cal_out = "out";
    bool cal_spoof = false;
    double cal_delta = 0.0;
    CLI::App* cal = app.add_subcommand("calibrate", "simulate the gate-delay calibration scan");
    cal->add_option("scenario", cal_scenario, "scenario json")->required()->check(CLI::ExistingFile);
    cal->add_flag("--spoof", cal_spoof, "force the calibration-spoof attack on");
    CLI::Option* cal_delta_opt =
        cal->add_option("--delta", cal_delta, "spoof separation, default from the scenario");
    cal->add_option("--out", cal_out, "output directory")->capture_default_str();

    std::string an_events;
    fs::path an_out = "out";
    double an_truncate = 0.0, an_bin = 0.05;
    CLI::App* an = app.add_subcommand("analyze-timing", "timing side channel from an events.csv");
    an->add_option("events", an_events, "events.csv from a run")
        ->required()
        ->check(CLI::ExistingFile);
    an->add_option("--truncate", an_truncate, "round timestamps to this resolution first")
        ->capture_default_str();
    an->add_option("--bin", an_bin, "histogram bin width")->capture_default_str();
    an->add_option("--out", an_out, "output directory")->capture_default_str();

    CLI::App* tables =
        app.add_subcommand("reproduce-tables", "print the worked ball-protocol example");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run))
            return cmd_run(run_scenario, run_trials, run_jobs, run_seed_opt->count() > 0, run_seed,
                           run_gates, run_out);
        if (app.got_subcommand(sweep))
            return cmd_sweep(sweep_scenario, sweep_param, sweep_values, sweep_trials, sweep_jobs,
                             sweep_out);
        if (app.got_subcommand(cal))
            return cmd_calibrate(cal_scenario, cal_spoof, cal_delta_opt->count() > 0, cal_delta,
                                 cal_out);
        if (app.got_subcommand(an)) return cmd_analyze(an_events, an_truncate, an_bin, an_out);
        if (app.got_subcommand(tables)) return cmd_tables();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
