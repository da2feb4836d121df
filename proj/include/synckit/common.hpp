#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace synckit {

// Missing samples travel as quiet NaN; any window touching one is skipped,
// never zero-filled.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unreadable or malformed input data. CLI maps this to exit code 2.
class input_error : public error {
public:
    using error::error;
};

// Invalid parameter or configuration value. CLI maps this to exit code 3.
class config_error : public error {
public:
    using error::error;
};

// C(n,2): number of unordered channel pairs.
inline std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

// Shortest decimal representation that parses back to the same bits.
std::string format_double(double v);

// Parse a decimal number; returns false on trailing garbage or empty input.
bool parse_double(std::string_view text, double& out);

// Thread count from SYNC_THREADS, falling back to hardware_concurrency.
int default_thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
// depend only on n and threads, so writers into disjoint slots stay
// deterministic regardless of scheduling.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace synckit
