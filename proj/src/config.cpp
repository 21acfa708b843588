#include "qkdlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "qkdlab/rng.hpp"

namespace qkd {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

// Strict object view: every key must be consumed exactly once, leftovers are
// reported with their full path.
class ObjReader {
  public:
    ObjReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    std::string key_path(const char* key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json* take(const char* key) {
        consumed_.push_back(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    double number(const char* key, double def) {
        const json* v = take(key);
        if (!v) return def;
        if (!v->is_number()) fail(key_path(key), "expected a number");
        return v->get<double>();
    }

    std::uint64_t uinteger(const char* key, std::uint64_t def, bool* present = nullptr) {
        const json* v = take(key);
        if (present) *present = v != nullptr;
        if (!v) return def;
        if (!v->is_number_unsigned()) fail(key_path(key), "expected a non-negative integer");
        return v->get<std::uint64_t>();
    }

    bool boolean(const char* key, bool def) {
        const json* v = take(key);
        if (!v) return def;
        if (!v->is_boolean()) fail(key_path(key), "expected a boolean");
        return v->get<bool>();
    }

    std::string text(const char* key, const std::string& def) {
        const json* v = take(key);
        if (!v) return def;
        if (!v->is_string()) fail(key_path(key), "expected a string");
        return v->get<std::string>();
    }

    // nullptr when the key is absent
    const json* object(const char* key) {
        const json* v = take(key);
        if (v && !v->is_object()) fail(key_path(key), "expected an object");
        return v;
    }

    void finish() {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool known = false;
            for (const char* k : consumed_)
                if (it.key() == k) known = true;
            if (!known) fail(path_.empty() ? it.key() : path_ + "." + it.key(), "unknown key");
        }
    }

  private:
    const json& j_;
    std::string path_;
    std::vector<const char*> consumed_;
};

void check_range(double v, double lo, double hi, const std::string& path) {
    if (!(v >= lo && v <= hi)) {
        std::ostringstream os;
        os << "value " << v << " outside [" << lo << ", " << hi << "]";
        fail(path, os.str());
    }
}

void check_positive(double v, const std::string& path) {
    if (!(v > 0.0)) fail(path, "must be > 0");
}

void check_nonnegative(double v, const std::string& path) {
    if (!(v >= 0.0)) fail(path, "must be >= 0");
}

void check_finite(double v, const std::string& path) {
    if (!std::isfinite(v)) fail(path, "must be finite");
}

DetectorParams parse_detector(const json& j, const std::string& path) {
    DetectorParams d;
    ObjReader r(j, path);
    if (const json* cj = r.object("efficiency")) {
        ObjReader c(*cj, r.key_path("efficiency"));
        d.curve.center = c.number("center", d.curve.center);
        d.curve.rise = c.number("rise", d.curve.rise);
        d.curve.plateau = c.number("plateau", d.curve.plateau);
        d.curve.fall = c.number("fall", d.curve.fall);
        d.curve.peak = c.number("peak", d.curve.peak);
        c.finish();
    }
    d.dead_time = r.number("dead_time", d.dead_time);
    d.dark_count_prob = r.number("dark_count_prob", d.dark_count_prob);
    d.bright_threshold = r.number("bright_threshold", d.bright_threshold);
    d.afterpulse_prob = r.number("afterpulse_prob", d.afterpulse_prob);
    d.jitter_sigma = r.number("jitter_sigma", d.jitter_sigma);
    d.centroid_offset = r.number("centroid_offset", d.centroid_offset);
    r.finish();

    check_finite(d.curve.center, path + ".efficiency.center");
    check_positive(d.curve.rise, path + ".efficiency.rise");
    check_nonnegative(d.curve.plateau, path + ".efficiency.plateau");
    check_positive(d.curve.fall, path + ".efficiency.fall");
    if (!(d.curve.peak > 0.0 && d.curve.peak <= 1.0)) fail(path + ".efficiency.peak", "must be in (0, 1]");
    check_nonnegative(d.dead_time, path + ".dead_time");
    check_range(d.dark_count_prob, 0.0, 1.0, path + ".dark_count_prob");
    if (!(d.bright_threshold > 1.0)) fail(path + ".bright_threshold", "must be > 1 photon");
    check_range(d.afterpulse_prob, 0.0, 1.0, path + ".afterpulse_prob");
    check_nonnegative(d.jitter_sigma, path + ".jitter_sigma");
    check_finite(d.centroid_offset, path + ".centroid_offset");
    return d;
}

EveSpec parse_eve(const json& j, const std::string& path) {
    EveSpec e;
    ObjReader r(j, path);
    const std::string kind = r.text("strategy", "none");
    if (kind == "none") {
        e.kind = EveSpec::Kind::None;
    } else if (kind == "intercept_resend") {
        e.kind = EveSpec::Kind::InterceptResend;
    } else if (kind == "breidbart") {
        e.kind = EveSpec::Kind::Breidbart;
        e.analyzer_angle = r.number("analyzer_angle", e.analyzer_angle);
        check_finite(e.analyzer_angle, path + ".analyzer_angle");
    } else if (kind == "faked_states") {
        e.kind = EveSpec::Kind::FakedStates;
        e.strict = r.boolean("strict", e.strict);
        e.search_step = r.number("search_step", e.search_step);
        check_positive(e.search_step, path + ".search_step");
    } else if (kind == "time_shift") {
        e.kind = EveSpec::Kind::TimeShift;
        e.t_early = r.number("t_early", e.t_early);
        e.t_late = r.number("t_late", e.t_late);
        check_finite(e.t_early, path + ".t_early");
        check_finite(e.t_late, path + ".t_late");
        if (!(e.t_early < e.t_late)) fail(path + ".t_early", "must be < eve.t_late");
    } else if (kind == "after_gate") {
        e.kind = EveSpec::Kind::AfterGate;
        e.pulse_power = r.number("pulse_power", e.pulse_power);
        e.pulse_time_offset = r.number("pulse_time_offset", e.pulse_time_offset);
        check_positive(e.pulse_power, path + ".pulse_power");
        check_finite(e.pulse_time_offset, path + ".pulse_time_offset");
    } else if (kind == "calibration_spoof") {
        e.kind = EveSpec::Kind::CalibrationSpoof;
        e.delta = r.number("delta", e.delta);
        check_nonnegative(e.delta, path + ".delta");
    } else {
        fail(path + ".strategy", "unknown strategy '" + kind + "'");
    }
    r.finish();
    return e;
}

} // namespace

const char* eve_kind_name(EveSpec::Kind k) {
    switch (k) {
        case EveSpec::Kind::None: return "none";
        case EveSpec::Kind::InterceptResend: return "intercept_resend";
        case EveSpec::Kind::Breidbart: return "breidbart";
        case EveSpec::Kind::FakedStates: return "faked_states";
        case EveSpec::Kind::TimeShift: return "time_shift";
        case EveSpec::Kind::AfterGate: return "after_gate";
        case EveSpec::Kind::CalibrationSpoof: return "calibration_spoof";
    }
    return "none";
}

SessionConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }

    SessionConfig cfg;
    ObjReader r(j, "");

    const std::uint64_t sv = r.uinteger("schema_version", 1);
    if (sv != 1) fail("schema_version", "unsupported version (expected 1)");
    cfg.schema_version = 1;
    cfg.name = r.text("name", "");

    bool have_pulses = false, have_seed = false;
    cfg.num_pulses = r.uinteger("num_pulses", 0, &have_pulses);
    cfg.seed = r.uinteger("seed", 0, &have_seed);
    if (!have_pulses) fail("num_pulses", "required");
    if (!have_seed) fail("seed", "required");
    if (cfg.num_pulses == 0) fail("num_pulses", "must be >= 1");

    cfg.qber_threshold = r.number("qber_threshold", cfg.qber_threshold);
    check_range(cfg.qber_threshold, 0.0, 1.0, "qber_threshold");
    cfg.sample_fraction = r.number("sample_fraction", cfg.sample_fraction);
    check_range(cfg.sample_fraction, 0.0, 1.0, "sample_fraction");
    cfg.timestamp_resolution = r.number("timestamp_resolution", cfg.timestamp_resolution);
    check_nonnegative(cfg.timestamp_resolution, "timestamp_resolution");

    if (const json* cj = r.object("channel")) {
        ObjReader c(*cj, "channel");
        cfg.channel.loss_prob = c.number("loss_prob", cfg.channel.loss_prob);
        cfg.channel.delay = c.number("delay", cfg.channel.delay);
        c.finish();
    }
    check_range(cfg.channel.loss_prob, 0.0, 1.0, "channel.loss_prob");
    check_nonnegative(cfg.channel.delay, "channel.delay");

    if (const json* sj = r.object("schedule")) {
        ObjReader s(*sj, "schedule");
        cfg.schedule.period = s.number("period", cfg.schedule.period);
        cfg.schedule.gate_offset_d0 = s.number("gate_offset_d0", cfg.schedule.gate_offset_d0);
        cfg.schedule.gate_offset_d1 = s.number("gate_offset_d1", cfg.schedule.gate_offset_d1);
        cfg.schedule.offset_spread = s.number("offset_spread", cfg.schedule.offset_spread);
        s.finish();
    }
    check_positive(cfg.schedule.period, "schedule.period");
    check_finite(cfg.schedule.gate_offset_d0, "schedule.gate_offset_d0");
    check_finite(cfg.schedule.gate_offset_d1, "schedule.gate_offset_d1");
    check_nonnegative(cfg.schedule.offset_spread, "schedule.offset_spread");

    if (const json* dj = r.object("detectors")) {
        ObjReader d(*dj, "detectors");
        if (const json* d0 = d.object("d0")) cfg.detectors[0] = parse_detector(*d0, "detectors.d0");
        if (const json* d1 = d.object("d1")) cfg.detectors[1] = parse_detector(*d1, "detectors.d1");
        d.finish();
    }

    if (const json* ej = r.object("eve")) cfg.eve = parse_eve(*ej, "eve");

    if (const json* kj = r.object("calibration")) {
        ObjReader k(*kj, "calibration");
        cfg.calibration.pulse_intensity = k.number("pulse_intensity", cfg.calibration.pulse_intensity);
        cfg.calibration.pulse_duration = k.number("pulse_duration", cfg.calibration.pulse_duration);
        cfg.calibration.pulses_per_step = k.uinteger("pulses_per_step", cfg.calibration.pulses_per_step);
        cfg.calibration.scan_min = k.number("scan_min", cfg.calibration.scan_min);
        cfg.calibration.scan_max = k.number("scan_max", cfg.calibration.scan_max);
        cfg.calibration.scan_step = k.number("scan_step", cfg.calibration.scan_step);
        k.finish();
        check_nonnegative(cfg.calibration.pulse_intensity, "calibration.pulse_intensity");
        check_nonnegative(cfg.calibration.pulse_duration, "calibration.pulse_duration");
        if (cfg.calibration.pulses_per_step == 0) fail("calibration.pulses_per_step", "must be >= 1");
        check_positive(cfg.calibration.scan_step, "calibration.scan_step");
        if (!(cfg.calibration.scan_min < cfg.calibration.scan_max))
            fail("calibration.scan_min", "must be < calibration.scan_max");
    }

    if (const json* aj = r.object("analysis")) {
        ObjReader a(*aj, "analysis");
        cfg.analysis.histogram_bin = a.number("histogram_bin", cfg.analysis.histogram_bin);
        a.finish();
        check_positive(cfg.analysis.histogram_bin, "analysis.histogram_bin");
    }

    r.finish();

    // cross-field attack preconditions, checked before any slot executes
    if (cfg.eve.kind == EveSpec::Kind::TimeShift) {
        if (!(cfg.eve.t_early < cfg.channel.delay))
            fail("eve.t_early", "must be earlier than the nominal arrival (channel.delay)");
        if (!(cfg.eve.t_late > cfg.channel.delay))
            fail("eve.t_late", "must be later than the nominal arrival (channel.delay)");
    }
    if (cfg.eve.kind == EveSpec::Kind::AfterGate) {
        const double t0 = cfg.detectors[0].bright_threshold;
        const double t1 = cfg.detectors[1].bright_threshold;
        const double lo = t0 > t1 ? t0 : t1;
        const double hi = 2.0 * (t0 < t1 ? t0 : t1);
        if (!(cfg.eve.pulse_power >= lo && cfg.eve.pulse_power < hi))
            fail("eve.pulse_power",
                 "must be >= every bright_threshold and < twice the smaller one");
    }

    return cfg;
}

SessionConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

json detector_json(const DetectorParams& d) {
    return json{
        {"efficiency",
         {{"center", d.curve.center},
          {"rise", d.curve.rise},
          {"plateau", d.curve.plateau},
          {"fall", d.curve.fall},
          {"peak", d.curve.peak}}},
        {"dead_time", d.dead_time},
        {"dark_count_prob", d.dark_count_prob},
        {"bright_threshold", d.bright_threshold},
        {"afterpulse_prob", d.afterpulse_prob},
        {"jitter_sigma", d.jitter_sigma},
        {"centroid_offset", d.centroid_offset},
    };
}

json eve_json(const EveSpec& e) {
    json j{{"strategy", eve_kind_name(e.kind)}};
    switch (e.kind) {
        case EveSpec::Kind::Breidbart: j["analyzer_angle"] = e.analyzer_angle; break;
        case EveSpec::Kind::FakedStates:
            j["strict"] = e.strict;
            j["search_step"] = e.search_step;
            break;
        case EveSpec::Kind::TimeShift:
            j["t_early"] = e.t_early;
            j["t_late"] = e.t_late;
            break;
        case EveSpec::Kind::AfterGate:
            j["pulse_power"] = e.pulse_power;
            j["pulse_time_offset"] = e.pulse_time_offset;
            break;
        case EveSpec::Kind::CalibrationSpoof: j["delta"] = e.delta; break;
        default: break;
    }
    return j;
}

} // namespace

std::string serialize_config(const SessionConfig& cfg) {
    json j{
        {"schema_version", cfg.schema_version},
        {"num_pulses", cfg.num_pulses},
        {"seed", cfg.seed},
        {"qber_threshold", cfg.qber_threshold},
        {"sample_fraction", cfg.sample_fraction},
        {"timestamp_resolution", cfg.timestamp_resolution},
        {"channel", {{"loss_prob", cfg.channel.loss_prob}, {"delay", cfg.channel.delay}}},
        {"schedule",
         {{"period", cfg.schedule.period},
          {"gate_offset_d0", cfg.schedule.gate_offset_d0},
          {"gate_offset_d1", cfg.schedule.gate_offset_d1},
          {"offset_spread", cfg.schedule.offset_spread}}},
        {"detectors", {{"d0", detector_json(cfg.detectors[0])}, {"d1", detector_json(cfg.detectors[1])}}},
        {"eve", eve_json(cfg.eve)},
        {"calibration",
         {{"pulse_intensity", cfg.calibration.pulse_intensity},
          {"pulse_duration", cfg.calibration.pulse_duration},
          {"pulses_per_step", cfg.calibration.pulses_per_step},
          {"scan_min", cfg.calibration.scan_min},
          {"scan_max", cfg.calibration.scan_max},
          {"scan_step", cfg.calibration.scan_step}}},
        {"analysis", {{"histogram_bin", cfg.analysis.histogram_bin}}},
    };
    if (!cfg.name.empty()) j["name"] = cfg.name;
    return j.dump(2) + "\n";
}

std::string config_hash(const SessionConfig& cfg) {
    const std::uint64_t h = fnv1a64(serialize_config(cfg));
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace qkd
