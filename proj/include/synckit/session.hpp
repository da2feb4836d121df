#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "synckit/common.hpp"

namespace synckit {

enum class ChannelKind { impedance, fluid_temp, env };

const char* to_string(ChannelKind k);
ChannelKind channel_kind_from_string(std::string_view s);

struct ChannelSeries {
    std::string id;
    ChannelKind kind = ChannelKind::env;
    std::string unit;
    std::vector<double> values;
};

// Bookkeeping for exact wave removal: the pre-injection samples of every
// touched span, keyed by the injected event's serialized parameters.
struct WaveInjection {
    std::string key;
    std::vector<std::size_t> channel_indices;
    std::size_t start = 0;
    std::vector<std::vector<double>> saved;
};

// Time-aligned multi-channel frame with a uniform sample grid. The unit of
// analysis for everything downstream.
struct Session {
    double sample_period = 1.0;  // seconds
    double t0 = 0.0;             // epoch seconds of sample 0
    std::size_t n_samples = 0;
    std::vector<ChannelSeries> channels;
    std::string provenance;
    std::vector<WaveInjection> injections;  // in-memory only, not serialized

    std::vector<std::size_t> channels_of_kind(ChannelKind k) const;
    std::vector<std::span<const double>> spans_of_kind(ChannelKind k) const;
    double duration_seconds() const {
        return static_cast<double>(n_samples) * sample_period;
    }
    // Checks the structural invariants (uniform lengths, positive period).
    void check() const;
};

// One timestamped reading of all channels from one acquisition device.
// Channel names live once per stream (StreamMeta), not per record.
struct SampleRecord {
    double timestamp = 0.0;  // seconds since epoch
    std::string device_id;
    std::vector<double> impedance;   // Ohm, one per cell
    std::vector<double> fluid_temp;  // degC, one per cell
    std::vector<double> env;         // auxiliary channels, schema order
};

struct AlignmentReport {
    struct DeviceStats {
        std::string device_id;
        double clock_offset = 0.0;  // mean(record time - tick time), seconds
        std::size_t total_records = 0;
        std::size_t dropped = 0;  // no tick within tolerance
        std::size_t kept = 0;
    };
    std::vector<DeviceStats> devices;
    std::size_t interpolated_samples = 0;
    double sample_period = 0.0;
    std::size_t n_ticks = 0;
};

// Columnar CSV session format: '#key=value' metadata lines, a '#channel='
// line per channel, then one row per sample. Values use shortest
// round-trip decimals, missing samples are written as 'nan'.
void save_session_csv(const Session& s, std::ostream& out);
void save_session_csv(const Session& s, const std::string& path);
Session load_session_csv(std::istream& in);
Session load_session_csv(const std::string& path);
bool looks_like_session_file(const std::string& path);

}  // namespace synckit
