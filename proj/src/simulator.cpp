#include "synckit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace synckit::sim {

namespace {

// Deterministic across platforms: raw engine bits only, distributions are
// hand-rolled (std:: distribution output is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    double exponential(double rate) {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return -std::log(u) / rate;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct Telegraph {
    std::vector<std::size_t> switches;
    std::int8_t initial = 1;
};

Telegraph make_telegraph(Rng& rng, std::size_t duration, double rate) {
    Telegraph t;
    t.initial = rng.uniform() < 0.5 ? static_cast<std::int8_t>(-1) : static_cast<std::int8_t>(1);
    double pos = rng.exponential(rate);
    while (pos < static_cast<double>(duration)) {
        t.switches.push_back(static_cast<std::size_t>(pos));
        pos += rng.exponential(rate);
    }
    return t;
}

// Expands flip indices into a per-sample +-1 state stream.
std::vector<double> telegraph_states(const Telegraph& t, std::size_t duration) {
    std::vector<double> s(duration);
    double state = t.initial;
    std::size_t next = 0;
    for (std::size_t i = 0; i < duration; ++i) {
        while (next < t.switches.size() && t.switches[next] == i) {
            state = -state;
            ++next;
        }
        s[i] = state;
    }
    return s;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += '/';
        out += std::to_string(v[i]);
    }
    return out;
}

void validate_event(const WaveEvent& e, std::size_t duration, int n_cells) {
    if (e.duration == 0) throw config_error("wave event duration must be > 0");
    if (e.cells.empty()) throw config_error("wave event must involve at least one cell");
    if (e.t0 + e.duration > duration)
        throw config_error("wave event [" + std::to_string(e.t0) + ", +" +
                           std::to_string(e.duration) + ") extends past the session end");
    if (e.period < 2.0) throw config_error("wave carrier period must be >= 2 samples");
    if (e.amplitude < 0.0) throw config_error("wave amplitude must be >= 0");
    if (!e.phase_sign.empty() && e.phase_sign.size() != e.cells.size())
        throw config_error("phase_sign must match the cell list length");
    for (int c : e.cells)
        if (c < 0 || c >= n_cells)
            throw config_error("wave event references cell " + std::to_string(c) +
                               " outside [0, " + std::to_string(n_cells) + ")");
    for (int s : e.phase_sign)
        if (s != 1 && s != -1) throw config_error("phase signs must be +1 or -1");
}

}  // namespace

std::string WaveEvent::key() const {
    std::ostringstream os;
    os << "wave:" << t0 << ':' << duration << ':' << join_ints(cells) << ':'
       << format_double(amplitude) << ':' << format_double(period) << ':'
       << join_ints(phase_sign) << ':' << format_double(temp_amplitude) << ':' << temp_sign
       << ':' << (kind == WaveKind::sync_wave ? "sync" : "selfosc");
    return os.str();
}

std::vector<double> wave_samples(const WaveEvent& event) {
    std::vector<double> out(event.duration);
    const double d = static_cast<double>(event.duration);
    for (std::size_t k = 0; k < event.duration; ++k) {
        double u = static_cast<double>(k) / d;
        double envelope;
        if (event.kind == WaveKind::sync_wave) {
            envelope = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u));
        } else {
            // flat top with raised-cosine ramps over 10% at each edge
            constexpr double ramp = 0.1;
            if (u < ramp)
                envelope = 0.5 * (1.0 - std::cos(std::numbers::pi * u / ramp));
            else if (u > 1.0 - ramp)
                envelope = 0.5 * (1.0 - std::cos(std::numbers::pi * (1.0 - u) / ramp));
            else
                envelope = 1.0;
        }
        double carrier = std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / event.period);
        out[k] = envelope * carrier;
    }
    return out;
}

SimResult simulate(const SimConfig& cfg) {
    if (cfg.n_cells < 2) throw config_error("simulation needs at least 2 cells");
    if (cfg.duration == 0) throw config_error("simulation duration must be > 0");
    if (cfg.sample_period <= 0) throw config_error("sample period must be > 0");
    if (cfg.telegraph_rate <= 0) throw config_error("telegraph rate must be > 0");
    if (cfg.noise_rms < 0) throw config_error("noise RMS must be >= 0");
    if (cfg.coupling < 0.0 || cfg.coupling > 1.0)
        throw config_error("coupling must be in [0, 1]");
    if (!cfg.drift.empty() && cfg.drift.size() != static_cast<std::size_t>(cfg.n_cells))
        throw config_error("explicit drift coefficients must cover every cell");
    for (const auto& e : cfg.events) validate_event(e, cfg.duration, cfg.n_cells);

    // Overlapping events on the same cell would superpose into a waveform
    // with no single ground-truth phase; reject them.
    for (std::size_t a = 0; a < cfg.events.size(); ++a)
        for (std::size_t b = a + 1; b < cfg.events.size(); ++b) {
            const auto& ea = cfg.events[a];
            const auto& eb = cfg.events[b];
            if (ea.t0 + ea.duration <= eb.t0 || eb.t0 + eb.duration <= ea.t0) continue;
            for (int c : ea.cells)
                if (std::find(eb.cells.begin(), eb.cells.end(), c) != eb.cells.end())
                    throw config_error("overlapping events on cell " + std::to_string(c));
        }

    Rng rng(cfg.seed);
    const std::size_t n = cfg.duration;
    const auto cells = static_cast<std::size_t>(cfg.n_cells);

    // drift polynomials on normalized x in [-1, 1]
    std::vector<std::vector<double>> drift = cfg.drift;
    if (drift.empty()) {
        drift.resize(cells);
        for (auto& c : drift) {
            c.resize(static_cast<std::size_t>(cfg.drift_order) + 1);
            c[0] = 0.0;
            for (std::size_t k = 1; k < c.size(); ++k)
                c[k] = rng.normal() * cfg.drift_scale / static_cast<double>(k);
        }
    }

    Telegraph master = make_telegraph(rng, n, cfg.telegraph_rate);
    std::vector<Telegraph> private_tg(cells);
    for (auto& t : private_tg) t = make_telegraph(rng, n, cfg.telegraph_rate);
    std::vector<double> master_states = telegraph_states(master, n);

    SimResult result;
    GroundTruth& truth = result.truth;
    truth.master_switches = master.switches;
    truth.master_initial = master.initial;
    truth.cell_switches.resize(cells);
    truth.cell_initial.resize(cells);

    Session& ses = result.session;
    ses.sample_period = cfg.sample_period;
    ses.t0 = cfg.t0_epoch;
    ses.n_samples = n;
    ses.provenance = "simulated seed=" + std::to_string(cfg.seed);

    const double x_scale = n > 1 ? (static_cast<double>(n) - 1.0) / 2.0 : 1.0;

    std::vector<std::vector<double>> impedance(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        truth.cell_switches[c] = private_tg[c].switches;
        truth.cell_initial[c] = private_tg[c].initial;
        std::vector<double> own = telegraph_states(private_tg[c], n);

        std::vector<double>& v = impedance[c];
        v.resize(n);
        double integrated = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double slope =
                (1.0 - cfg.coupling) * own[i] + cfg.coupling * master_states[i];
            integrated += slope * cfg.telegraph_step;
            double x = (static_cast<double>(i) - x_scale) / x_scale;
            double trend = 0.0;
            for (std::size_t k = drift[c].size(); k-- > 0;) trend = trend * x + drift[c][k];
            v[i] = cfg.base_impedance + trend + integrated + rng.normal() * cfg.noise_rms;
        }
    }

    std::vector<std::vector<double>> temperature;
    if (cfg.temperature_channels) {
        temperature.resize(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            double d1 = rng.normal() * cfg.temp_drift_scale;
            double d2 = rng.normal() * cfg.temp_drift_scale;
            std::vector<double>& v = temperature[c];
            v.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                double x = (static_cast<double>(i) - x_scale) / x_scale;
                v[i] = cfg.temp_baseline + d1 * x + d2 * x * x + rng.normal() * cfg.temp_noise;
            }
        }
    }

    for (const auto& e : cfg.events) {
        std::vector<double> wave = wave_samples(e);
        for (std::size_t ci = 0; ci < e.cells.size(); ++ci) {
            auto cell = static_cast<std::size_t>(e.cells[ci]);
            double sign = e.phase_sign.empty() ? 1.0 : static_cast<double>(e.phase_sign[ci]);
            for (std::size_t k = 0; k < e.duration; ++k)
                impedance[cell][e.t0 + k] += e.amplitude * sign * wave[k];
            if (cfg.temperature_channels && e.temp_amplitude != 0.0)
                for (std::size_t k = 0; k < e.duration; ++k)
                    temperature[cell][e.t0 + k] +=
                        e.temp_amplitude * sign * static_cast<double>(e.temp_sign) * wave[k];
        }
        GroundTruth::EventTruth et;
        et.start = e.t0;
        et.end = e.t0 + e.duration;
        et.cells = e.cells;
        et.phase_sign = e.phase_sign.empty() ? std::vector<int>(e.cells.size(), 1) : e.phase_sign;
        et.kind = e.kind;
        (e.kind == WaveKind::sync_wave ? truth.events : truth.self_oscillations)
            .push_back(std::move(et));
    }

    for (std::size_t c = 0; c < cells; ++c) {
        ChannelSeries ch;
        ch.id = "cell" + std::to_string(c) + ".imp";
        ch.kind = ChannelKind::impedance;
        ch.unit = "Ohm";
        ch.values = std::move(impedance[c]);
        ses.channels.push_back(std::move(ch));
    }
    if (cfg.temperature_channels)
        for (std::size_t c = 0; c < cells; ++c) {
            ChannelSeries ch;
            ch.id = "cell" + std::to_string(c) + ".temp";
            ch.kind = ChannelKind::fluid_temp;
            ch.unit = "degC";
            ch.values = std::move(temperature[c]);
            ses.channels.push_back(std::move(ch));
        }
    ses.check();
    return result;
}

namespace {

// Target channel indices of an event inside a session: impedance channels by
// cell order, plus fluid_temp channels when the event couples to temperature.
std::vector<std::size_t> event_channels(const Session& s, const WaveEvent& e,
                                        std::vector<double>& scales) {
    auto imp = s.channels_of_kind(ChannelKind::impedance);
    auto temp = s.channels_of_kind(ChannelKind::fluid_temp);
    std::vector<std::size_t> out;
    scales.clear();
    for (std::size_t ci = 0; ci < e.cells.size(); ++ci) {
        auto cell = static_cast<std::size_t>(e.cells[ci]);
        if (cell >= imp.size())
            throw config_error("wave event references cell " + std::to_string(cell) +
                               " but the session has " + std::to_string(imp.size()) +
                               " impedance channels");
        double sign = e.phase_sign.empty() ? 1.0 : static_cast<double>(e.phase_sign[ci]);
        out.push_back(imp[cell]);
        scales.push_back(e.amplitude * sign);
        if (e.temp_amplitude != 0.0) {
            if (cell >= temp.size())
                throw config_error("temperature-coupled event needs a fluid_temp channel per cell");
            out.push_back(temp[cell]);
            scales.push_back(e.temp_amplitude * sign * static_cast<double>(e.temp_sign));
        }
    }
    return out;
}

}  // namespace

Session inject_wave(const Session& s, const WaveEvent& event) {
    if (event.t0 + event.duration > s.n_samples)
        throw config_error("wave event extends past the session end");
    if (event.duration == 0 || event.cells.empty())
        throw config_error("wave event must have samples and cells");
    if (!event.phase_sign.empty() && event.phase_sign.size() != event.cells.size())
        throw config_error("phase_sign must match the cell list length");

    Session out = s;
    if (event.amplitude == 0.0 && event.temp_amplitude == 0.0) return out;

    std::vector<double> scales;
    std::vector<std::size_t> targets = event_channels(out, event, scales);
    std::vector<double> wave = wave_samples(event);

    WaveInjection record;
    record.key = event.key();
    record.channel_indices = targets;
    record.start = event.t0;
    record.saved.reserve(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) {
        auto& values = out.channels[targets[t]].values;
        record.saved.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(event.t0),
                                  values.begin() +
                                      static_cast<std::ptrdiff_t>(event.t0 + event.duration));
        for (std::size_t k = 0; k < event.duration; ++k)
            values[event.t0 + k] += scales[t] * wave[k];
    }
    out.injections.push_back(std::move(record));
    return out;
}

Session remove_wave(const Session& s, const WaveEvent& event) {
    Session out = s;
    if (event.amplitude == 0.0 && event.temp_amplitude == 0.0) return out;

    // Restore the recorded pre-injection samples when this exact event was
    // injected earlier; that makes add-then-remove bit-exact.
    std::string key = event.key();
    for (std::size_t k = out.injections.size(); k-- > 0;) {
        const WaveInjection& rec = out.injections[k];
        if (rec.key != key) continue;
        for (std::size_t t = 0; t < rec.channel_indices.size(); ++t)
            std::copy(rec.saved[t].begin(), rec.saved[t].end(),
                      out.channels[rec.channel_indices[t]].values.begin() +
                          static_cast<std::ptrdiff_t>(rec.start));
        out.injections.erase(out.injections.begin() + static_cast<std::ptrdiff_t>(k));
        return out;
    }

    // Foreign session: plain numeric subtraction.
    std::vector<double> scales;
    std::vector<std::size_t> targets = event_channels(out, event, scales);
    std::vector<double> wave = wave_samples(event);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        auto& values = out.channels[targets[t]].values;
        for (std::size_t k = 0; k < event.duration; ++k)
            values[event.t0 + k] -= scales[t] * wave[k];
    }
    return out;
}

namespace {

std::string trim_copy(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return std::string(s);
}

std::vector<int> parse_cells(const std::string& text) {
    std::vector<int> out;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t pos = text.find(';', begin);
        std::string tok =
            trim_copy(std::string_view(text).substr(begin, pos == std::string::npos ? pos : pos - begin));
        if (!tok.empty()) {
            auto dash = tok.find('-', 1);
            if (dash != std::string::npos) {
                int lo = std::stoi(tok.substr(0, dash));
                int hi = std::stoi(tok.substr(dash + 1));
                for (int c = lo; c <= hi; ++c) out.push_back(c);
            } else {
                out.push_back(std::stoi(tok));
            }
        }
        if (pos == std::string::npos) break;
        begin = pos + 1;
    }
    return out;
}

std::vector<int> parse_signs(const std::string& text, std::size_t n_cells) {
    if (text == "+" || text == "in") return {};
    std::vector<int> out;
    if (text == "alt") {
        for (std::size_t i = 0; i < n_cells; ++i) out.push_back(i % 2 == 0 ? 1 : -1);
        return out;
    }
    for (char c : text) {
        if (c == '+')
            out.push_back(1);
        else if (c == '-')
            out.push_back(-1);
        else
            throw config_error("bad phase pattern '" + text + "' (use +, alt or a +/- string)");
    }
    return out;
}

WaveEvent parse_event(const std::string& text) {
    WaveEvent e;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t pos = text.find(',', begin);
        std::string tok =
            trim_copy(std::string_view(text).substr(begin, pos == std::string::npos ? pos : pos - begin));
        if (!tok.empty()) {
            auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw config_error("bad event field '" + tok + "' (expected key:value)");
            std::string key = trim_copy(std::string_view(tok).substr(0, colon));
            std::string value = trim_copy(std::string_view(tok).substr(colon + 1));
            double num = 0;
            if (key == "t0" && parse_double(value, num))
                e.t0 = static_cast<std::size_t>(num);
            else if (key == "duration" && parse_double(value, num))
                e.duration = static_cast<std::size_t>(num);
            else if (key == "cells")
                e.cells = parse_cells(value);
            else if (key == "amplitude" && parse_double(value, num))
                e.amplitude = num;
            else if (key == "period" && parse_double(value, num))
                e.period = num;
            else if (key == "phase")
                e.phase_sign = parse_signs(value, e.cells.size());
            else if (key == "temp_amplitude" && parse_double(value, num))
                e.temp_amplitude = num;
            else if (key == "temp_sign" && parse_double(value, num))
                e.temp_sign = num < 0 ? -1 : 1;
            else if (key == "kind")
                e.kind = value == "self_oscillation" ? WaveKind::self_oscillation
                                                     : WaveKind::sync_wave;
            else
                throw config_error("unknown event field '" + key + "'");
        }
        if (pos == std::string::npos) break;
        begin = pos + 1;
    }
    return e;
}

}  // namespace

SimConfig load_sim_config(std::istream& in) {
    SimConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim_copy(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("sim config line " + std::to_string(line_no) +
                               ": expected key=value");
        std::string key = trim_copy(std::string_view(t).substr(0, eq));
        std::string value = trim_copy(std::string_view(t).substr(eq + 1));
        double num = 0;
        auto want_num = [&]() {
            if (!parse_double(value, num))
                throw config_error("sim config line " + std::to_string(line_no) +
                                   ": bad numeric value '" + value + "'");
            return num;
        };
        if (key == "n_cells") cfg.n_cells = static_cast<int>(want_num());
        else if (key == "duration") cfg.duration = static_cast<std::size_t>(want_num());
        else if (key == "sample_period") cfg.sample_period = want_num();
        else if (key == "base_impedance") cfg.base_impedance = want_num();
        else if (key == "drift_order") cfg.drift_order = static_cast<int>(want_num());
        else if (key == "drift_scale") cfg.drift_scale = want_num();
        else if (key == "telegraph_rate") cfg.telegraph_rate = want_num();
        else if (key == "telegraph_step") cfg.telegraph_step = want_num();
        else if (key == "noise_rms") cfg.noise_rms = want_num();
        else if (key == "coupling") cfg.coupling = want_num();
        else if (key == "temperature_channels") cfg.temperature_channels = want_num() != 0;
        else if (key == "temp_baseline") cfg.temp_baseline = want_num();
        else if (key == "temp_drift_scale") cfg.temp_drift_scale = want_num();
        else if (key == "temp_noise") cfg.temp_noise = want_num();
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(want_num());
        else if (key == "t0_epoch") cfg.t0_epoch = want_num();
        else if (key == "event") cfg.events.push_back(parse_event(value));
        else throw config_error("sim config line " + std::to_string(line_no) +
                                ": unknown key '" + key + "'");
    }
    return cfg;
}

SimConfig load_sim_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open sim config '" + path + "'");
    return load_sim_config(f);
}

}  // namespace synckit::sim
