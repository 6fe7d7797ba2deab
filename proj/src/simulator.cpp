#include "gwkae/simulator.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "gwkae/errors.hpp"
#include "gwkae/signal_io.hpp"

namespace gwkae {

void SimParams::validate() const {
    if (!(center_freq_hz > 0.0) || cycles < 1 || !(sample_rate_hz > 0.0) || n_samples < 1) {
        throw ConfigError("simulator needs positive frequency, cycles, sample rate and sample count");
    }
    if (!(group_velocity_mm_s > 0.0)) throw ConfigError("group velocity must be > 0");
    if (!(attenuation_per_mm >= 0.0)) throw ConfigError("attenuation must be >= 0");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
    if (!(scatter_coeff >= 0.0)) throw ConfigError("scatter_coeff must be >= 0");
    if (!(shadow_depth >= 0.0 && shadow_depth <= 1.0)) throw ConfigError("shadow_depth must be in [0, 1]");
    if (!(shadow_width > 0.0)) throw ConfigError("shadow_width must be > 0");
    if (burst_duration_s() > n_samples / sample_rate_hz) {
        throw ConfigError("toneburst is longer than the acquisition window");
    }
}

double toneburst_value(double t, const SimParams& params) {
    const double duration = params.burst_duration_s();
    if (t < 0.0 || t > duration) return 0.0;
    const double w = 2.0 * std::numbers::pi * params.center_freq_hz;
    return 0.5 * (1.0 - std::cos(w * t / params.cycles)) * std::sin(w * t);
}

std::vector<double> hanning_toneburst(const SimParams& params) {
    params.validate();
    const auto n = static_cast<std::size_t>(std::lround(params.burst_duration_s() * params.sample_rate_hz));
    std::vector<double> burst(n);
    for (std::size_t k = 0; k < n; ++k) {
        burst[k] = toneburst_value(static_cast<double>(k) / params.sample_rate_hz, params);
    }
    return burst;
}

namespace {

double dist(double ax, double ay, double bx, double by) { return std::hypot(ax - bx, ay - by); }

void add_arrival(std::vector<double>& out, const std::vector<double>& burst, long delay, double amplitude) {
    for (std::size_t k = 0; k < burst.size(); ++k) {
        const long idx = delay + static_cast<long>(k);
        if (idx < 0) continue;
        if (idx >= static_cast<long>(out.size())) break;  // late scatter is cut at the window end
        out[static_cast<std::size_t>(idx)] += amplitude * burst[k];
    }
}

}  // namespace

double shadow_factor(const Sensor& actuator, const Sensor& sensor, const std::vector<DamageSpec>& damages,
                     const SimParams& params) {
    const double base = dist(actuator.x_mm, actuator.y_mm, sensor.x_mm, sensor.y_mm);
    double t = 1.0;
    for (const auto& d : damages) {
        const double e = (dist(d.x_mm, d.y_mm, actuator.x_mm, actuator.y_mm) +
                          dist(d.x_mm, d.y_mm, sensor.x_mm, sensor.y_mm)) / base - 1.0;
        t *= 1.0 - params.shadow_depth * std::exp(-e * e / (2.0 * params.shadow_width * params.shadow_width));
    }
    return t;
}

GWSignal simulate_path(const Sensor& actuator, const Sensor& sensor, const std::vector<DamageSpec>& damages,
                       const SimParams& params, int repetition, std::uint64_t stream) {
    params.validate();
    const double d_as = dist(actuator.x_mm, actuator.y_mm, sensor.x_mm, sensor.y_mm);
    if (!(d_as > 0.0)) {
        throw GeometryError("actuator and sensor positions coincide");
    }
    const auto burst = hanning_toneburst(params);
    const auto to_samples = [&](double mm) {
        return std::lround(mm / params.group_velocity_mm_s * params.sample_rate_hz);
    };
    const long direct_delay = to_samples(d_as);
    if (direct_delay + static_cast<long>(burst.size()) > params.n_samples) {
        throw ConfigError("direct arrival of path " + std::to_string(actuator.id) + "-" + std::to_string(sensor.id) +
                          " falls outside the acquisition window");
    }

    GWSignal sig;
    sig.path = canonical_path(actuator.id, sensor.id);
    sig.repetition = repetition;
    sig.sample_rate_hz = params.sample_rate_hz;
    sig.samples.assign(static_cast<std::size_t>(params.n_samples), 0.0);

    const double transmission = shadow_factor(actuator, sensor, damages, params);
    add_arrival(sig.samples, burst, direct_delay, transmission * std::exp(-params.attenuation_per_mm * d_as));
    for (const auto& d : damages) {
        const double d_scatter = dist(d.x_mm, d.y_mm, actuator.x_mm, actuator.y_mm) +
                                 dist(d.x_mm, d.y_mm, sensor.x_mm, sensor.y_mm);
        add_arrival(sig.samples, burst, to_samples(d_scatter),
                    params.scatter_coeff * std::exp(-params.attenuation_per_mm * d_scatter));
    }

    if (params.noise_sigma > 0.0) {
        std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                          static_cast<std::uint32_t>(sig.path.actuator_id), static_cast<std::uint32_t>(sig.path.sensor_id),
                          static_cast<std::uint32_t>(repetition), static_cast<std::uint32_t>(stream)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> noise(0.0, params.noise_sigma);
        for (double& v : sig.samples) v += noise(rng);
    }
    return sig;
}

Scenario generate_scenario(const SensorLayout& layout, const std::vector<DamageSpec>& damages, int repetitions,
                           const SimParams& params, int damaged_repetitions) {
    params.validate();
    if (repetitions < 1 || damaged_repetitions < 0) {
        throw ConfigError("scenario needs at least one baseline repetition");
    }
    for (const auto& d : damages) {
        if (!(d.diameter_mm > 0.0)) throw ConfigError("damage diameter must be > 0");
    }
    Scenario sc;
    sc.truth = damages;
    const auto paths = layout.all_region_paths();
    for (int rep = 0; rep < repetitions; ++rep) {
        for (const auto& p : paths) {
            sc.baseline.push_back(simulate_path(layout.sensor(p.actuator_id), layout.sensor(p.sensor_id), {}, params,
                                                rep, kBaselineStream));
        }
    }
    for (int rep = 0; rep < damaged_repetitions; ++rep) {
        for (const auto& p : paths) {
            sc.damaged.push_back(simulate_path(layout.sensor(p.actuator_id), layout.sensor(p.sensor_id), damages,
                                               params, rep, kDamagedStream));
        }
    }
    return sc;
}

nlohmann::json truth_to_json(const std::vector<DamageSpec>& damages) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : damages) {
        arr.push_back({{"x_mm", d.x_mm}, {"y_mm", d.y_mm}, {"diameter_mm", d.diameter_mm}});
    }
    return {{"damages", arr}};
}

std::vector<DamageSpec> truth_from_json(const nlohmann::json& j) {
    std::vector<DamageSpec> out;
    try {
        for (const auto& d : j.at("damages")) {
            out.push_back({d.at("x_mm").get<double>(), d.at("y_mm").get<double>(), d.value("diameter_mm", 20.0)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed truth manifest: ") + e.what());
    }
    return out;
}

void write_scenario(const Scenario& scenario, const SensorLayout& layout, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    write_dataset(scenario.baseline, dir / "baseline.csv");
    write_dataset(scenario.damaged, dir / "damaged.csv");
    save_layout(layout, dir / "layout.json");
    std::ofstream out(dir / "truth.json", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "truth.json").string());
    out << truth_to_json(scenario.truth).dump(2) << '\n';
}

}  // namespace gwkae
