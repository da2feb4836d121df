#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "synckit/session.hpp"

namespace synckit::sim {

enum class WaveKind { sync_wave, self_oscillation };

// One injected oscillation. Sync waves use a raised-cosine hump envelope
// (single smooth hump, minutes scale); self-oscillations use a flat-top
// envelope with smooth edges (stable amplitude, spontaneous start/stop).
struct WaveEvent {
    std::size_t t0 = 0;          // sample index
    std::size_t duration = 120;  // samples
    std::vector<int> cells;
    double amplitude = 20.0;       // Ohm
    double period = 60.0;          // carrier period, samples
    std::vector<int> phase_sign;   // +1/-1 per cell; empty = all in-phase
    double temp_amplitude = 0.0;   // degC; 0 = no temperature coupling
    int temp_sign = +1;            // +1 in-phase with impedance wave, -1 anti
    WaveKind kind = WaveKind::sync_wave;

    std::string key() const;  // serialized parameters, used by the removal ledger
};

// Synthetic multi-cell scenario. Impedance per cell is
//   base + drift polynomial + integrated two-state telegraph + noise + waves,
// the telegraph being the random switching between forward and reverse
// reaction phases. coupling blends each cell's private telegraph with a
// shared master stream (0 = independent cells, 1 = identical streams).
struct SimConfig {
    int n_cells = 6;
    std::size_t duration = 20000;  // samples
    double sample_period = 5.0;    // seconds
    double base_impedance = 100000.0;  // Ohm

    int drift_order = 3;        // per-cell random drift polynomial
    double drift_scale = 200.0; // Ohm
    std::vector<std::vector<double>> drift;  // explicit coefficients, optional

    double telegraph_rate = 0.002;  // switches per sample
    double telegraph_step = 0.02;   // Ohm per sample slope magnitude
    double noise_rms = 2.0;         // Ohm
    double coupling = 0.0;          // [0, 1]

    std::vector<WaveEvent> events;

    bool temperature_channels = true;
    double temp_baseline = 25.0;    // degC
    double temp_drift_scale = 0.02; // degC
    double temp_noise = 5e-4;       // degC

    std::uint64_t seed = 1;
    double t0_epoch = 1660000000.0;
};

struct GroundTruth {
    struct EventTruth {
        std::size_t start = 0, end = 0;  // [start, end)
        std::vector<int> cells;
        std::vector<int> phase_sign;
        WaveKind kind = WaveKind::sync_wave;
    };
    std::vector<EventTruth> events;             // sync waves
    std::vector<EventTruth> self_oscillations;  // spans the analysis must mask

    // Telegraph reconstruction data: flip indices and initial states of the
    // per-cell private streams and the shared master stream.
    std::vector<std::vector<std::size_t>> cell_switches;
    std::vector<std::int8_t> cell_initial;
    std::vector<std::size_t> master_switches;
    std::int8_t master_initial = 1;
};

struct SimResult {
    Session session;
    GroundTruth truth;
};

// Deterministic for a fixed (config, seed): same bits every run.
SimResult simulate(const SimConfig& cfg);

// envelope * carrier per sample of the event, unit amplitude.
std::vector<double> wave_samples(const WaveEvent& event);

// Additive injection into an existing session. The pre-injection samples are
// recorded in the session's ledger so remove_wave restores them bit-exact.
Session inject_wave(const Session& s, const WaveEvent& event);
Session remove_wave(const Session& s, const WaveEvent& event);

// key=value scenario file; repeated 'event=' lines describe waves.
SimConfig load_sim_config(std::istream& in);
SimConfig load_sim_config_file(const std::string& path);

}  // namespace synckit::sim
