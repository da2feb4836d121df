#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "synckit/session.hpp"

namespace synckit {

// Maps CSV columns to channel roles. Loaded from a key=value schema file or
// inferred from header names.
struct ColumnSchema {
    enum class Role { timestamp, device_id, impedance, fluid_temp, env, ignore };

    struct Column {
        std::string name;
        Role role = Role::env;
    };
    std::vector<Column> columns;

    static const char* role_name(Role r);
    static Role role_from_string(std::string_view s);

    // Heuristic mapping: "timestamp"/"time" -> timestamp, "device"/"device_id"
    // -> device_id, imp*/z<digit> -> impedance, temp* -> fluid_temp, rest env.
    static ColumnSchema infer(const std::vector<std::string>& header);

    // key=value lines, '#' comments. Keys are column names, values roles.
    static ColumnSchema load(std::istream& in);
    static ColumnSchema load_file(const std::string& path);

    // Reorders to match the header; throws input_error on columns the schema
    // does not cover or schema entries missing from the header.
    ColumnSchema resolve_against(const std::vector<std::string>& header) const;
};

struct ParseIssue {
    std::size_t line = 0;  // 1-based line number
    std::string message;
};

struct StreamMeta {
    std::string device_id;
    ColumnSchema schema;  // resolved column order of the source file
    std::vector<std::string> impedance_names;
    std::vector<std::string> fluid_temp_names;
    std::vector<std::string> env_names;
};

struct ParsedStream {
    StreamMeta meta;
    std::vector<SampleRecord> records;
    std::vector<ParseIssue> issues;  // malformed lines are counted, not silently dropped
};

struct ParseOptions {
    std::string default_device;        // used when there is no device_id column
    double timestamp_tolerance = 0.0;  // allowed backward step, seconds
};

// Parses one device log (CSV, one header row). Lines that violate the record
// invariants (non-numeric fields, non-positive impedance, non-monotonic
// timestamps) become ParseIssues with their line number.
ParsedStream parse_log(std::istream& in,
                       const std::optional<ColumnSchema>& schema = {},
                       const ParseOptions& opts = {});
ParsedStream parse_log_file(const std::string& path,
                            const std::optional<ColumnSchema>& schema = {},
                            const ParseOptions& opts = {});

// Writes records back in the stream's own column order; numeric fields
// round-trip bit-exact through parse_log.
void save_log_csv(const ParsedStream& stream, std::ostream& out);

struct AlignOptions {
    double tolerance = 1.0;      // seconds, nearest-tick matching window
    double sample_period = 0.0;  // 0 = median timestamp step across streams
    bool interpolate = false;    // linearly fill interior missing ticks
};

struct AlignedSession {
    Session session;
    AlignmentReport report;
};

// Time-aligns multiple device streams onto one uniform grid anchored at the
// latest stream start. Each record is matched to its nearest tick; ticks
// with no record within tolerance are marked missing.
AlignedSession align(const std::vector<ParsedStream>& streams,
                     const AlignOptions& opts = {});

Session slice_frame(const Session& s, std::size_t start_index, std::size_t length);

// Drops everything before skip_hours (default 24 h), the warm-up interval
// whose correlated start-up transients would otherwise count as events.
Session reject_initial(const Session& s, double skip_hours = 24.0);

}  // namespace synckit
