#include "gwkae/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "gwkae/errors.hpp"
#include "gwkae/signal_io.hpp"

namespace gwkae {

void ImagingGrid::validate() const {
    if (!(bounds.x1 > bounds.x0) || !(bounds.y1 > bounds.y0)) {
        throw ConfigError("imaging bounds are degenerate");
    }
    if (!(resolution_mm > 0.0)) {
        throw ConfigError("imaging resolution must be > 0");
    }
}

int ImagingGrid::nx() const { return std::max(1, static_cast<int>(std::ceil(bounds.width() / resolution_mm - 1e-9))); }

int ImagingGrid::ny() const {
    return std::max(1, static_cast<int>(std::ceil(bounds.height() / resolution_mm - 1e-9)));
}

void MRAPIDParams::validate() const {
    if (!(r > 0.0)) throw ConfigError("MRAPID shape parameter r must be > 0");
    if (top_k && *top_k < 1) throw ConfigError("top_k must be >= 1");
}

double ellipse_distance(double x, double y, const Sensor& actuator, const Sensor& sensor) {
    const double base = std::hypot(actuator.x_mm - sensor.x_mm, actuator.y_mm - sensor.y_mm);
    if (!(base > 0.0)) {
        throw GeometryError("actuator " + std::to_string(actuator.id) + " and sensor " + std::to_string(sensor.id) +
                            " coincide");
    }
    return (std::hypot(x - actuator.x_mm, y - actuator.y_mm) + std::hypot(x - sensor.x_mm, y - sensor.y_mm)) / base;
}

double weight(double e, double di, double di_max, double r) {
    if (!(di_max > 0.0)) {
        throw DegenerateInputError("DI_max must be > 0 to weight a path");
    }
    const double a = 1.0 - di / di_max;
    if (e < a * r) {
        return 1.0 + (e / r - a);
    }
    if (e < (1.0 + a) * r) {
        return 1.0 - (e / r - a);
    }
    return 0.0;
}

DamageMap fuse(const std::vector<SensingPath>& paths, const DamageIndexSet& dis, const SensorLayout& layout,
               const ImagingGrid& grid, const MRAPIDParams& params) {
    grid.validate();
    params.validate();
    DamageMap map;
    map.grid = grid;
    const int nx = grid.nx();
    const int ny = grid.ny();
    map.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);

    struct Term {
        Sensor a, s;
        double di;
    };
    std::vector<Term> terms;
    double di_max = 0.0;
    for (const auto& p : paths) {
        const double di = dis.di_of(p);
        if (!(di >= 0.0) || !std::isfinite(di)) {
            throw DataError("DI values must be finite and non-negative");
        }
        terms.push_back({layout.sensor(p.actuator_id), layout.sensor(p.sensor_id), di});
        di_max = std::max(di_max, di);
    }
    if (di_max == 0.0) {
        return map;
    }
    for (int iy = 0; iy < ny; ++iy) {
        const double y = grid.y_center(iy);
        for (int ix = 0; ix < nx; ++ix) {
            const double x = grid.x_center(ix);
            double acc = 0.0;
            for (const auto& t : terms) {
                const double e = ellipse_distance(x, y, t.a, t.s) - 1.0;
                acc += weight(std::max(e, 0.0), t.di, di_max, params.r) * t.di;
            }
            map.values[static_cast<std::size_t>(iy) * nx + ix] = acc;
        }
    }
    return map;
}

std::vector<SensingPath> select_paths(const DamageIndexSet& dis, int k) {
    if (dis.entries.empty()) {
        throw DataError("cannot select paths from an empty DI set");
    }
    if (k < 1) {
        throw ConfigError("path count k must be >= 1");
    }
    std::vector<PathDI> sorted = dis.entries;
    std::sort(sorted.begin(), sorted.end(), [](const PathDI& a, const PathDI& b) {
        if (a.di != b.di) return a.di > b.di;
        return a.path < b.path;
    });
    const std::size_t n = std::min(sorted.size(), static_cast<std::size_t>(k));
    std::vector<SensingPath> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(sorted[i].path);
    return out;
}

std::vector<Peak> extract_peaks(const DamageMap& map, const PeakParams& params) {
    if (params.max_peaks < 1) {
        throw ConfigError("max_peaks must be >= 1");
    }
    const int nx = map.grid.nx();
    const int ny = map.grid.ny();
    if (map.values.empty()) return {};
    const double global_max = *std::max_element(map.values.begin(), map.values.end());
    if (!(global_max > 0.0)) return {};
    const double floor_value = params.rel_threshold * global_max;

    std::vector<Peak> candidates;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double v = map.at(ix, iy);
            if (v < floor_value) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int jx = ix + dx;
                    const int jy = iy + dy;
                    if ((dx == 0 && dy == 0) || jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
                    if (map.at(jx, jy) > v) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) {
                candidates.push_back({map.grid.x_center(ix), map.grid.y_center(iy), v, ix, iy});
            }
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });

    std::vector<Peak> peaks;
    std::vector<bool> suppressed(candidates.size(), false);
    for (std::size_t i = 0; i < candidates.size() && static_cast<int>(peaks.size()) < params.max_peaks; ++i) {
        if (suppressed[i]) continue;
        peaks.push_back(candidates[i]);
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            if (std::hypot(candidates[j].x_mm - candidates[i].x_mm, candidates[j].y_mm - candidates[i].y_mm) <=
                params.min_separation_mm) {
                suppressed[j] = true;
            }
        }
    }
    return peaks;
}

void write_map_csv(const DamageMap& map, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write map file " + file.string());
    out << "x_mm,y_mm,P\n";
    for (int iy = 0; iy < map.grid.ny(); ++iy) {
        for (int ix = 0; ix < map.grid.nx(); ++ix) {
            out << format_double(map.grid.x_center(ix)) << ',' << format_double(map.grid.y_center(iy)) << ','
                << format_double(map.at(ix, iy)) << '\n';
        }
    }
}

void write_map_pgm(const DamageMap& map, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write map image " + file.string());
    const int nx = map.grid.nx();
    const int ny = map.grid.ny();
    out << "P5\n" << nx << ' ' << ny << "\n65535\n";
    const auto [mn, mx] = std::minmax_element(map.values.begin(), map.values.end());
    const double lo = map.values.empty() ? 0.0 : *mn;
    const double span = map.values.empty() ? 0.0 : *mx - lo;
    for (int iy = ny - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const double scaled = span > 0.0 ? (map.at(ix, iy) - lo) / span : 0.0;
            const auto v = static_cast<unsigned>(std::lround(std::clamp(scaled, 0.0, 1.0) * 65535.0));
            const char bytes[2] = {static_cast<char>((v >> 8) & 0xFF), static_cast<char>(v & 0xFF)};
            out.write(bytes, 2);
        }
    }
}

nlohmann::json peaks_to_json(const std::vector<Peak>& peaks) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : peaks) {
        arr.push_back({{"x_mm", p.x_mm}, {"y_mm", p.y_mm}, {"P", p.value}});
    }
    return arr;
}

}  // namespace gwkae
