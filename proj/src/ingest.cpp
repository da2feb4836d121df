#include "synckit/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace synckit {

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (true) {
        std::size_t pos = line.find(',', begin);
        if (pos == std::string::npos) {
            out.push_back(trim(std::string_view(line).substr(begin)));
            break;
        }
        out.push_back(trim(std::string_view(line).substr(begin, pos - begin)));
        begin = pos + 1;
    }
    return out;
}

bool starts_with_ci(const std::string& s, const char* prefix) {
    std::size_t n = std::string_view(prefix).size();
    if (s.size() < n) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    return true;
}

}  // namespace

const char* ColumnSchema::role_name(Role r) {
    switch (r) {
        case Role::timestamp: return "timestamp";
        case Role::device_id: return "device_id";
        case Role::impedance: return "impedance";
        case Role::fluid_temp: return "fluid_temp";
        case Role::env: return "env";
        case Role::ignore: return "ignore";
    }
    return "env";
}

ColumnSchema::Role ColumnSchema::role_from_string(std::string_view s) {
    if (s == "timestamp") return Role::timestamp;
    if (s == "device_id" || s == "device") return Role::device_id;
    if (s == "impedance") return Role::impedance;
    if (s == "fluid_temp") return Role::fluid_temp;
    if (s == "env") return Role::env;
    if (s == "ignore") return Role::ignore;
    throw input_error("unknown schema role '" + std::string(s) + "'");
}

ColumnSchema ColumnSchema::infer(const std::vector<std::string>& header) {
    ColumnSchema schema;
    for (const auto& name : header) {
        Role role = Role::env;
        std::string lower;
        for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        if (lower == "timestamp" || lower == "time" || lower == "t")
            role = Role::timestamp;
        else if (lower == "device" || lower == "device_id")
            role = Role::device_id;
        else if (starts_with_ci(name, "imp") ||
                 (lower.size() >= 2 && lower[0] == 'z' && std::isdigit(static_cast<unsigned char>(lower[1]))))
            role = Role::impedance;
        else if (starts_with_ci(name, "temp") || starts_with_ci(name, "fluid"))
            role = Role::fluid_temp;
        schema.columns.push_back({name, role});
    }
    return schema;
}

ColumnSchema ColumnSchema::load(std::istream& in) {
    ColumnSchema schema;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw input_error("schema line " + std::to_string(line_no) +
                              ": expected column=role, got '" + t + "'");
        schema.columns.push_back({trim(std::string_view(t).substr(0, eq)),
                                  role_from_string(trim(std::string_view(t).substr(eq + 1)))});
    }
    if (schema.columns.empty()) throw input_error("schema file defines no columns");
    return schema;
}

ColumnSchema ColumnSchema::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open schema file '" + path + "'");
    return load(f);
}

ColumnSchema ColumnSchema::resolve_against(const std::vector<std::string>& header) const {
    std::map<std::string, Role> by_name;
    for (const auto& c : columns) by_name[c.name] = c.role;
    ColumnSchema resolved;
    for (const auto& name : header) {
        auto it = by_name.find(name);
        if (it == by_name.end())
            throw input_error("unknown column '" + name + "' (not covered by schema)");
        resolved.columns.push_back({name, it->second});
        by_name.erase(it);
    }
    for (const auto& [name, role] : by_name)
        if (role != Role::ignore)
            throw input_error("schema column '" + name + "' is missing from the file header");
    return resolved;
}

ParsedStream parse_log(std::istream& in, const std::optional<ColumnSchema>& schema,
                       const ParseOptions& opts) {
    ParsedStream out;
    std::string line;
    if (!std::getline(in, line)) return out;  // empty input: empty list, zero issues

    std::vector<std::string> header = split_csv(line);
    ColumnSchema resolved =
        schema ? schema->resolve_against(header) : ColumnSchema::infer(header);
    out.meta.schema = resolved;
    out.meta.device_id = opts.default_device;

    using Role = ColumnSchema::Role;
    int ts_col = -1, dev_col = -1;
    for (std::size_t c = 0; c < resolved.columns.size(); ++c) {
        switch (resolved.columns[c].role) {
            case Role::timestamp:
                if (ts_col >= 0) throw input_error("schema maps two columns to timestamp");
                ts_col = static_cast<int>(c);
                break;
            case Role::device_id: dev_col = static_cast<int>(c); break;
            case Role::impedance: out.meta.impedance_names.push_back(resolved.columns[c].name); break;
            case Role::fluid_temp: out.meta.fluid_temp_names.push_back(resolved.columns[c].name); break;
            case Role::env: out.meta.env_names.push_back(resolved.columns[c].name); break;
            case Role::ignore: break;
        }
    }
    if (ts_col < 0) throw input_error("no timestamp column in header/schema");

    std::size_t line_no = 1;
    double prev_ts = -std::numeric_limits<double>::infinity();
    bool have_prev = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_csv(line);
        if (fields.size() != resolved.columns.size()) {
            out.issues.push_back({line_no, "expected " + std::to_string(resolved.columns.size()) +
                                               " fields, got " + std::to_string(fields.size())});
            continue;
        }
        SampleRecord rec;
        bool bad = false;
        for (std::size_t c = 0; c < fields.size() && !bad; ++c) {
            Role role = resolved.columns[c].role;
            if (role == Role::ignore) continue;
            if (role == Role::device_id) {
                rec.device_id = fields[c];
                continue;
            }
            double v;
            if (!parse_double(fields[c], v)) {
                out.issues.push_back({line_no, "non-numeric field '" + resolved.columns[c].name +
                                                   "' = '" + fields[c] + "'"});
                bad = true;
                break;
            }
            switch (role) {
                case Role::timestamp:
                    if (is_missing(v)) {
                        out.issues.push_back({line_no, "missing timestamp"});
                        bad = true;
                    }
                    rec.timestamp = v;
                    break;
                case Role::impedance:
                    if (!is_missing(v) && v <= 0) {
                        out.issues.push_back({line_no, "non-positive impedance in column '" +
                                                           resolved.columns[c].name + "'"});
                        bad = true;
                    }
                    rec.impedance.push_back(v);
                    break;
                case Role::fluid_temp: rec.fluid_temp.push_back(v); break;
                case Role::env: rec.env.push_back(v); break;
                default: break;
            }
        }
        if (bad) continue;
        if (have_prev && rec.timestamp <= prev_ts - opts.timestamp_tolerance) {
            out.issues.push_back({line_no, "non-monotonic timestamp " + format_double(rec.timestamp) +
                                               " after " + format_double(prev_ts)});
            continue;
        }
        if (dev_col >= 0) {
            if (out.records.empty())
                out.meta.device_id = rec.device_id;
            else if (rec.device_id != out.meta.device_id) {
                out.issues.push_back({line_no, "mixed device ids '" + rec.device_id + "' vs '" +
                                                   out.meta.device_id + "'"});
                continue;
            }
        }
        prev_ts = rec.timestamp;
        have_prev = true;
        out.records.push_back(std::move(rec));
    }
    return out;
}

ParsedStream parse_log_file(const std::string& path, const std::optional<ColumnSchema>& schema,
                            const ParseOptions& opts) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open log file '" + path + "'");
    ParseOptions o = opts;
    if (o.default_device.empty()) {
        // filename stem as device fallback
        auto slash = path.find_last_of('/');
        std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
        auto dot = stem.find_last_of('.');
        o.default_device = dot == std::string::npos ? stem : stem.substr(0, dot);
    }
    return parse_log(f, schema, o);
}

void save_log_csv(const ParsedStream& stream, std::ostream& out) {
    using Role = ColumnSchema::Role;
    const auto& cols = stream.meta.schema.columns;
    for (std::size_t c = 0; c < cols.size(); ++c)
        out << (c ? "," : "") << cols[c].name;
    out << '\n';
    for (const auto& rec : stream.records) {
        std::size_t imp = 0, temp = 0, env = 0;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) out << ',';
            switch (cols[c].role) {
                case Role::timestamp: out << format_double(rec.timestamp); break;
                case Role::device_id: out << rec.device_id; break;
                case Role::impedance: out << format_double(rec.impedance[imp++]); break;
                case Role::fluid_temp: out << format_double(rec.fluid_temp[temp++]); break;
                case Role::env: out << format_double(rec.env[env++]); break;
                case Role::ignore: break;
            }
        }
        out << '\n';
    }
}

namespace {

double estimate_period(const std::vector<ParsedStream>& streams) {
    std::vector<double> diffs;
    for (const auto& s : streams)
        for (std::size_t i = 1; i < s.records.size(); ++i) {
            double d = s.records[i].timestamp - s.records[i - 1].timestamp;
            if (d > 0) diffs.push_back(d);
        }
    if (diffs.empty()) throw input_error("cannot estimate sample period: too few records");
    std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
    return diffs[diffs.size() / 2];
}

void interpolate_channel(std::vector<double>& v, std::size_t& filled) {
    std::size_t n = v.size();
    std::size_t i = 0;
    while (i < n && is_missing(v[i])) ++i;
    std::size_t last_good = i;
    for (++i; i < n; ++i) {
        if (is_missing(v[i])) continue;
        if (i > last_good + 1) {
            double v0 = v[last_good], v1 = v[i];
            double span = static_cast<double>(i - last_good);
            for (std::size_t k = last_good + 1; k < i; ++k) {
                v[k] = v0 + (v1 - v0) * (static_cast<double>(k - last_good) / span);
                ++filled;
            }
        }
        last_good = i;
    }
}

}  // namespace

AlignedSession align(const std::vector<ParsedStream>& streams, const AlignOptions& opts) {
    if (streams.empty()) throw input_error("align: no streams");
    for (const auto& s : streams)
        if (s.records.empty())
            throw input_error("align: stream '" + s.meta.device_id + "' has no records");
    if (opts.tolerance <= 0) throw config_error("align tolerance must be > 0");

    double period = opts.sample_period > 0 ? opts.sample_period : estimate_period(streams);

    double start = -std::numeric_limits<double>::infinity();
    double end = std::numeric_limits<double>::infinity();
    for (const auto& s : streams) {
        start = std::max(start, s.records.front().timestamp);
        end = std::min(end, s.records.back().timestamp);
    }
    if (start > end + opts.tolerance)
        throw input_error("streams have no temporal overlap (latest start " + format_double(start) +
                          " after earliest end " + format_double(end) + ")");

    std::size_t n_ticks = static_cast<std::size_t>(std::floor((end - start) / period)) + 1;

    AlignedSession out;
    Session& ses = out.session;
    ses.sample_period = period;
    ses.t0 = start;
    ses.n_samples = n_ticks;
    out.report.sample_period = period;
    out.report.n_ticks = n_ticks;

    std::string prov = "aligned";
    for (const auto& stream : streams) {
        AlignmentReport::DeviceStats stats;
        stats.device_id = stream.meta.device_id;
        stats.total_records = stream.records.size();
        prov += ":" + stream.meta.device_id;

        // nearest tick per record, checked for double matches
        std::vector<std::ptrdiff_t> match(n_ticks, -1);
        double offset_sum = 0;
        for (std::size_t r = 0; r < stream.records.size(); ++r) {
            double ts = stream.records[r].timestamp;
            double k_real = (ts - start) / period;
            std::ptrdiff_t k = static_cast<std::ptrdiff_t>(std::llround(k_real));
            if (k < 0 || k >= static_cast<std::ptrdiff_t>(n_ticks)) {
                ++stats.dropped;
                continue;
            }
            double tick = start + static_cast<double>(k) * period;
            if (std::abs(ts - tick) > opts.tolerance) {
                ++stats.dropped;
                continue;
            }
            if (match[k] >= 0)
                throw input_error("ambiguous alignment for device '" + stream.meta.device_id +
                                  "': records at t=" +
                                  format_double(stream.records[match[k]].timestamp) + " and t=" +
                                  format_double(ts) + " both match tick t=" + format_double(tick));
            match[k] = static_cast<std::ptrdiff_t>(r);
            offset_sum += ts - tick;
            ++stats.kept;
        }
        stats.clock_offset = stats.kept ? offset_sum / static_cast<double>(stats.kept) : 0.0;
        out.report.devices.push_back(stats);

        auto add_channels = [&](const std::vector<std::string>& names, ChannelKind kind,
                                const char* unit, auto accessor) {
            for (std::size_t c = 0; c < names.size(); ++c) {
                ChannelSeries ch;
                ch.id = stream.meta.device_id + "." + names[c];
                ch.kind = kind;
                ch.unit = unit;
                ch.values.assign(n_ticks, kMissing);
                for (std::size_t k = 0; k < n_ticks; ++k)
                    if (match[k] >= 0) ch.values[k] = accessor(stream.records[match[k]], c);
                if (opts.interpolate)
                    interpolate_channel(ch.values, out.report.interpolated_samples);
                ses.channels.push_back(std::move(ch));
            }
        };
        add_channels(stream.meta.impedance_names, ChannelKind::impedance, "Ohm",
                     [](const SampleRecord& rec, std::size_t c) { return rec.impedance[c]; });
        add_channels(stream.meta.fluid_temp_names, ChannelKind::fluid_temp, "degC",
                     [](const SampleRecord& rec, std::size_t c) { return rec.fluid_temp[c]; });
        add_channels(stream.meta.env_names, ChannelKind::env, "",
                     [](const SampleRecord& rec, std::size_t c) { return rec.env[c]; });
    }
    ses.provenance = prov;
    ses.check();
    return out;
}

Session slice_frame(const Session& s, std::size_t start_index, std::size_t length) {
    if (start_index > s.n_samples || length > s.n_samples - start_index)
        throw config_error("slice [" + std::to_string(start_index) + ", +" +
                           std::to_string(length) + ") out of range for " +
                           std::to_string(s.n_samples) + " samples");
    Session out;
    out.sample_period = s.sample_period;
    out.t0 = s.t0 + static_cast<double>(start_index) * s.sample_period;
    out.n_samples = length;
    out.channels.reserve(s.channels.size());
    for (const auto& c : s.channels) {
        ChannelSeries ch;
        ch.id = c.id;
        ch.kind = c.kind;
        ch.unit = c.unit;
        ch.values.assign(c.values.begin() + static_cast<std::ptrdiff_t>(start_index),
                         c.values.begin() + static_cast<std::ptrdiff_t>(start_index + length));
        out.channels.push_back(std::move(ch));
    }
    out.provenance = s.provenance + "; slice[" + std::to_string(start_index) + ",+" +
                     std::to_string(length) + ")";
    return out;
}

Session reject_initial(const Session& s, double skip_hours) {
    if (skip_hours < 0) throw config_error("skip duration must be >= 0");
    if (skip_hours == 0) return s;
    double skip_seconds = skip_hours * 3600.0;
    auto start = static_cast<std::size_t>(std::ceil(skip_seconds / s.sample_period - 1e-9));
    if (start >= s.n_samples)
        throw input_error("frame entirely within rejection window (" +
                          format_double(skip_hours) + " h skip, " +
                          format_double(s.duration_seconds() / 3600.0) + " h of data)");
    Session out = slice_frame(s, start, s.n_samples - start);
    out.provenance = s.provenance + "; reject_initial(" + format_double(skip_hours) + "h)";
    return out;
}

}  // namespace synckit
