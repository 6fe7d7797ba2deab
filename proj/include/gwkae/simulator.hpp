#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "gwkae/signal_model.hpp"

namespace gwkae {

// Phenomenological pitch-catch model: attenuated, delayed toneburst along
// the direct path, shadowed by nearby damage, plus one scattered arrival per
// damage and white Gaussian noise. No dispersion, mode conversion or
// boundary reflections.
struct SimParams {
    double center_freq_hz = 80e3;
    int cycles = 5;
    double sample_rate_hz = 12e6;
    int n_samples = 6000;
    double group_velocity_mm_s = 1.5e6;
    double attenuation_per_mm = 0.002;
    double noise_sigma = 0.02;     // absolute, in units of the excitation amplitude
    double scatter_coeff = 0.02;
    double shadow_depth = 0.8;     // beta
    double shadow_width = 0.03;    // sigma_w, on the ellipse excess
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
    double burst_duration_s() const { return cycles / center_freq_hz; }
};

struct DamageSpec {
    double x_mm = 0.0;
    double y_mm = 0.0;
    double diameter_mm = 20.0;
};

// Hanning-windowed sine of `cycles` periods sampled at sample_rate from t = 0;
// round(cycles * fs / f0) samples.
std::vector<double> hanning_toneburst(const SimParams& params);
double toneburst_value(double t, const SimParams& params);

// Product over damages of (1 - beta * exp(-e^2 / (2 sigma_w^2))).
double shadow_factor(const Sensor& actuator, const Sensor& sensor, const std::vector<DamageSpec>& damages,
                     const SimParams& params);

// Raw (not normalized) waveform. Noise is drawn from a stream keyed by
// (seed, path, repetition, stream), so equal keys reproduce equal noise.
GWSignal simulate_path(const Sensor& actuator, const Sensor& sensor, const std::vector<DamageSpec>& damages,
                       const SimParams& params, int repetition = 0, std::uint64_t stream = 0);

struct Scenario {
    std::vector<GWSignal> baseline;
    std::vector<GWSignal> damaged;
    std::vector<DamageSpec> truth;
};

inline constexpr std::uint64_t kBaselineStream = 0;
inline constexpr std::uint64_t kDamagedStream = 1;

// `repetitions` pristine measurements and `damaged_repetitions` damaged
// measurements of every region path of the layout.
Scenario generate_scenario(const SensorLayout& layout, const std::vector<DamageSpec>& damages, int repetitions,
                           const SimParams& params, int damaged_repetitions = 1);

// baseline.csv, damaged.csv, truth.json and layout.json under `dir`.
void write_scenario(const Scenario& scenario, const SensorLayout& layout, const std::filesystem::path& dir);

nlohmann::json truth_to_json(const std::vector<DamageSpec>& damages);
std::vector<DamageSpec> truth_from_json(const nlohmann::json& j);

}  // namespace gwkae
