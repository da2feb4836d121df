#include "synckit/session.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace synckit {

const char* to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::impedance: return "impedance";
        case ChannelKind::fluid_temp: return "fluid_temp";
        case ChannelKind::env: return "env";
    }
    return "env";
}

ChannelKind channel_kind_from_string(std::string_view s) {
    if (s == "impedance") return ChannelKind::impedance;
    if (s == "fluid_temp") return ChannelKind::fluid_temp;
    if (s == "env") return ChannelKind::env;
    throw input_error("unknown channel kind '" + std::string(s) + "'");
}

std::vector<std::size_t> Session::channels_of_kind(ChannelKind k) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < channels.size(); ++i)
        if (channels[i].kind == k) out.push_back(i);
    return out;
}

std::vector<std::span<const double>> Session::spans_of_kind(ChannelKind k) const {
    std::vector<std::span<const double>> out;
    for (const auto& c : channels)
        if (c.kind == k) out.emplace_back(c.values);
    return out;
}

void Session::check() const {
    if (sample_period <= 0) throw input_error("session sample_period must be > 0");
    for (const auto& c : channels)
        if (c.values.size() != n_samples)
            throw input_error("channel '" + c.id + "' length " +
                              std::to_string(c.values.size()) + " != n_samples " +
                              std::to_string(n_samples));
}

namespace {

constexpr const char* kMagic = "#synckit-session v1";

std::string sanitize_line(std::string s) {
    for (auto& ch : s)
        if (ch == '\n' || ch == '\r') ch = ' ';
    return s;
}

}  // namespace

void save_session_csv(const Session& s, std::ostream& out) {
    s.check();
    out << kMagic << '\n';
    out << "#sample_period=" << format_double(s.sample_period) << '\n';
    out << "#t0=" << format_double(s.t0) << '\n';
    out << "#n_samples=" << s.n_samples << '\n';
    if (!s.provenance.empty()) out << "#provenance=" << sanitize_line(s.provenance) << '\n';
    for (const auto& c : s.channels)
        out << "#channel=" << c.id << '|' << to_string(c.kind) << '|' << c.unit << '\n';
    out << "index";
    for (const auto& c : s.channels) out << ',' << c.id;
    out << '\n';
    for (std::size_t i = 0; i < s.n_samples; ++i) {
        out << i;
        for (const auto& c : s.channels) out << ',' << format_double(c.values[i]);
        out << '\n';
    }
}

void save_session_csv(const Session& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw input_error("cannot open '" + path + "' for writing");
    save_session_csv(s, f);
    if (!f) throw input_error("write failed for '" + path + "'");
}

Session load_session_csv(std::istream& in) {
    Session s;
    std::string line;
    if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0)
        throw input_error("not a synckit session file (missing magic header)");

    std::size_t declared_samples = 0;
    while (in.peek() == '#') {
        std::getline(in, line);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(1, eq - 1);
        std::string value = line.substr(eq + 1);
        if (key == "sample_period") {
            if (!parse_double(value, s.sample_period))
                throw input_error("bad sample_period '" + value + "'");
        } else if (key == "t0") {
            if (!parse_double(value, s.t0)) throw input_error("bad t0 '" + value + "'");
        } else if (key == "n_samples") {
            declared_samples = std::stoull(value);
        } else if (key == "provenance") {
            s.provenance = value;
        } else if (key == "channel") {
            auto p1 = value.find('|');
            auto p2 = value.find('|', p1 == std::string::npos ? p1 : p1 + 1);
            if (p1 == std::string::npos || p2 == std::string::npos)
                throw input_error("bad channel descriptor '" + value + "'");
            ChannelSeries c;
            c.id = value.substr(0, p1);
            c.kind = channel_kind_from_string(value.substr(p1 + 1, p2 - p1 - 1));
            c.unit = value.substr(p2 + 1);
            s.channels.push_back(std::move(c));
        }
    }
    if (s.channels.empty()) throw input_error("session file declares no channels");

    if (!std::getline(in, line)) throw input_error("session file has no column header");
    for (auto& c : s.channels) c.values.reserve(declared_samples);

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t pos = line.find(',');
        if (pos == std::string::npos)
            throw input_error("malformed session row " + std::to_string(row));
        std::size_t col = 0;
        std::size_t begin = pos + 1;
        while (col < s.channels.size()) {
            std::size_t next = line.find(',', begin);
            std::string_view field(line.data() + begin,
                                   (next == std::string::npos ? line.size() : next) - begin);
            double v;
            if (!parse_double(field, v))
                throw input_error("non-numeric value in session row " + std::to_string(row));
            s.channels[col].values.push_back(v);
            ++col;
            if (next == std::string::npos) break;
            begin = next + 1;
        }
        if (col != s.channels.size())
            throw input_error("session row " + std::to_string(row) + " has " +
                              std::to_string(col) + " values, expected " +
                              std::to_string(s.channels.size()));
        ++row;
    }
    s.n_samples = row;
    if (declared_samples && declared_samples != row)
        throw input_error("session declares " + std::to_string(declared_samples) +
                          " samples but contains " + std::to_string(row));
    s.check();
    return s;
}

Session load_session_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open session file '" + path + "'");
    return load_session_csv(f);
}

bool looks_like_session_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) return false;
    std::string line;
    return std::getline(f, line) && line.rfind(kMagic, 0) == 0;
}

}  // namespace synckit
