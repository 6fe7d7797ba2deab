#include "gwkae/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "gwkae/errors.hpp"

namespace gwkae {

SensingPath canonical_path(int a, int b) {
    if (a == b) {
        throw ConfigError("sensing path needs two distinct sensors, got " + std::to_string(a) + " twice");
    }
    return a < b ? SensingPath{a, b} : SensingPath{b, a};
}

SensorLayout::SensorLayout(std::vector<Sensor> sensors, std::vector<Region> regions)
    : sensors_(std::move(sensors)), regions_(std::move(regions)) {
    std::set<int> ids;
    for (const auto& s : sensors_) {
        if (!std::isfinite(s.x_mm) || !std::isfinite(s.y_mm)) {
            throw ConfigError("sensor " + std::to_string(s.id) + " has non-finite coordinates");
        }
        if (!ids.insert(s.id).second) {
            throw ConfigError("duplicate sensor id " + std::to_string(s.id));
        }
    }
    std::set<int> region_ids;
    for (const auto& r : regions_) {
        if (!region_ids.insert(r.id).second) {
            throw ConfigError("duplicate region id " + std::to_string(r.id));
        }
        std::set<int> members(r.sensor_ids.begin(), r.sensor_ids.end());
        if (members.size() != r.sensor_ids.size()) {
            throw ConfigError("region " + std::to_string(r.id) + " lists a sensor twice");
        }
        if (members.size() < 2) {
            throw ConfigError("region " + std::to_string(r.id) + " needs at least 2 sensors");
        }
        if (!(r.bounds.x1 > r.bounds.x0) || !(r.bounds.y1 > r.bounds.y0)) {
            throw ConfigError("region " + std::to_string(r.id) + " has degenerate bounds");
        }
        for (int id : r.sensor_ids) {
            if (!ids.contains(id)) {
                throw ConfigError("region " + std::to_string(r.id) + " references unknown sensor " +
                                  std::to_string(id));
            }
            const Sensor& s = sensor(id);
            if (!r.bounds.contains(s.x_mm, s.y_mm)) {
                throw ConfigError("region " + std::to_string(r.id) + " bounds do not contain sensor " +
                                  std::to_string(id));
            }
        }
    }
}

bool SensorLayout::has_sensor(int id) const {
    return std::any_of(sensors_.begin(), sensors_.end(), [id](const Sensor& s) { return s.id == id; });
}

const Sensor& SensorLayout::sensor(int id) const {
    auto it = std::find_if(sensors_.begin(), sensors_.end(), [id](const Sensor& s) { return s.id == id; });
    if (it == sensors_.end()) {
        throw DataError("unknown sensor id " + std::to_string(id));
    }
    return *it;
}

const Region& SensorLayout::region(int id) const {
    auto it = std::find_if(regions_.begin(), regions_.end(), [id](const Region& r) { return r.id == id; });
    if (it == regions_.end()) {
        throw DataError("unknown region id " + std::to_string(id));
    }
    return *it;
}

std::vector<SensingPath> SensorLayout::all_region_paths() const {
    std::set<SensingPath> all;
    for (const auto& r : regions_) {
        for (const auto& p : enumerate_paths(*this, r)) {
            all.insert(p);
        }
    }
    return {all.begin(), all.end()};
}

std::vector<double> normalize_signal(std::span<const double> raw) {
    if (raw.empty()) {
        throw DataError("cannot normalize an empty signal");
    }
    double lo = raw[0];
    double hi = raw[0];
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i])) {
            throw DataError("non-finite sample at index " + std::to_string(i));
        }
        lo = std::min(lo, raw[i]);
        hi = std::max(hi, raw[i]);
    }
    std::vector<double> out(raw.size(), 0.5);
    if (hi > lo) {
        const double span = hi - lo;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            out[i] = (raw[i] - lo) / span;
        }
    }
    return out;
}

std::vector<GWSignal> normalize_all(const std::vector<GWSignal>& signals) {
    std::vector<GWSignal> out;
    out.reserve(signals.size());
    for (const auto& s : signals) {
        GWSignal n = s;
        n.samples = normalize_signal(s.samples);
        out.push_back(std::move(n));
    }
    return out;
}

std::vector<SensingPath> enumerate_paths(const SensorLayout& layout, const Region& region) {
    const std::size_t n = region.sensor_ids.size();
    if (n < 2) {
        throw ConfigError("region " + std::to_string(region.id) + " has fewer than 2 sensors");
    }
    for (int id : region.sensor_ids) {
        if (!layout.has_sensor(id)) {
            throw ConfigError("region " + std::to_string(region.id) + " references unknown sensor " +
                              std::to_string(id));
        }
    }
    std::vector<SensingPath> paths;
    paths.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            paths.push_back(canonical_path(region.sensor_ids[i], region.sensor_ids[j]));
        }
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

SensorLayout grid_layout(int rows, int cols, double spacing_mm, int region_size, int region_stride) {
    if (rows < 1 || cols < 1 || !(spacing_mm > 0.0)) {
        throw ConfigError("grid layout needs positive rows, cols and spacing");
    }
    if (region_size < 2 || region_size > std::min(rows, cols) || region_stride < 1) {
        throw ConfigError("grid layout region size must be in [2, min(rows, cols)] with stride >= 1");
    }
    std::vector<Sensor> sensors;
    auto id_of = [cols](int r, int c) { return r * cols + c + 1; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            sensors.push_back({id_of(r, c), c * spacing_mm, r * spacing_mm});
        }
    }
    std::vector<Region> regions;
    int next_id = 1;
    for (int r0 = 0; r0 + region_size <= rows; r0 += region_stride) {
        for (int c0 = 0; c0 + region_size <= cols; c0 += region_stride) {
            Region reg;
            reg.id = next_id++;
            for (int r = r0; r < r0 + region_size; ++r) {
                for (int c = c0; c < c0 + region_size; ++c) {
                    reg.sensor_ids.push_back(id_of(r, c));
                }
            }
            reg.bounds = {c0 * spacing_mm, r0 * spacing_mm, (c0 + region_size - 1) * spacing_mm,
                          (r0 + region_size - 1) * spacing_mm};
            regions.push_back(std::move(reg));
        }
    }
    return SensorLayout(std::move(sensors), std::move(regions));
}

}  // namespace gwkae
