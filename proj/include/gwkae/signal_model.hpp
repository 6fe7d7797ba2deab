#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gwkae {

struct Sensor {
    int id = 0;
    double x_mm = 0.0;
    double y_mm = 0.0;
};

struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(double x, double y, double tol = 1e-9) const {
        return x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol;
    }
};

struct Region {
    int id = 0;
    std::vector<int> sensor_ids;
    Rect bounds;
};

// Actuator/sensor pair with reverse paths collapsed: actuator_id < sensor_id.
struct SensingPath {
    int actuator_id = 0;
    int sensor_id = 0;

    auto operator<=>(const SensingPath&) const = default;
};

SensingPath canonical_path(int a, int b);

class SensorLayout {
public:
    SensorLayout() = default;
    // Validates ids, coordinates and region membership; throws ConfigError.
    SensorLayout(std::vector<Sensor> sensors, std::vector<Region> regions);

    const std::vector<Sensor>& sensors() const { return sensors_; }
    const std::vector<Region>& regions() const { return regions_; }

    bool has_sensor(int id) const;
    const Sensor& sensor(int id) const;
    const Region& region(int id) const;

    // Union of all region paths, sorted and deduplicated.
    std::vector<SensingPath> all_region_paths() const;

private:
    std::vector<Sensor> sensors_;
    std::vector<Region> regions_;
};

struct GWSignal {
    SensingPath path;
    int repetition = 0;
    std::vector<double> samples;
    double sample_rate_hz = 12e6;
};

// (raw - min) / (max - min); constant input maps to all 0.5.
std::vector<double> normalize_signal(std::span<const double> raw);

// Returns a copy of every signal with normalized samples.
std::vector<GWSignal> normalize_all(const std::vector<GWSignal>& signals);

// All n(n-1)/2 canonical pairs of the region's sensors, sorted.
std::vector<SensingPath> enumerate_paths(const SensorLayout& layout, const Region& region);

// Rectangular sensor grid with `spacing_mm` pitch and square regions of
// `region_size` x `region_size` sensors placed every `region_stride` columns
// and rows. Sensor ids are 1-based, row-major from the origin.
SensorLayout grid_layout(int rows, int cols, double spacing_mm, int region_size, int region_stride);

}  // namespace gwkae
