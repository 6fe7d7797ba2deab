#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "gwkae/damage_index.hpp"
#include "gwkae/signal_model.hpp"

namespace gwkae {

// Pixel (ix, iy) has its center at (x0 + (ix + 0.5) * res, y0 + (iy + 0.5) * res).
struct ImagingGrid {
    Rect bounds;
    double resolution_mm = 2.0;

    void validate() const;  // throws ConfigError
    int nx() const;
    int ny() const;
    double x_center(int ix) const { return bounds.x0 + (ix + 0.5) * resolution_mm; }
    double y_center(int iy) const { return bounds.y0 + (iy + 0.5) * resolution_mm; }
};

struct MRAPIDParams {
    double r = 0.05;  // dimensionless width on the ellipse excess
    std::optional<int> top_k;

    void validate() const;
};

struct PeakParams {
    int max_peaks = 3;
    double min_separation_mm = 30.0;
    double rel_threshold = 0.7;
};

struct Peak {
    double x_mm = 0.0;
    double y_mm = 0.0;
    double value = 0.0;
    int ix = 0;
    int iy = 0;
};

struct DamageMap {
    ImagingGrid grid;
    std::vector<double> values;  // row-major, index iy * nx + ix
    std::vector<Peak> peaks;     // descending by value

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * grid.nx() + ix]; }
};

// (|P - A| + |P - S|) / |A - S|
double ellipse_distance(double x, double y, const Sensor& actuator, const Sensor& sensor);

// Tent-shaped weight on the ellipse excess e = d - 1, peaking at 1 where
// e = (1 - DI / DI_max) * r and vanishing for e >= (2 - DI / DI_max) * r.
double weight(double e, double di, double di_max, double r);

// P(x, y) = sum_i W_i(e_i(x, y)) * DI_i over the given paths, DI_max taken
// over those paths. An all-zero DI set yields an all-zero map.
DamageMap fuse(const std::vector<SensingPath>& paths, const DamageIndexSet& dis, const SensorLayout& layout,
               const ImagingGrid& grid, const MRAPIDParams& params);

// The k paths with the largest DI, ties broken by canonical path order,
// returned in descending DI order.
std::vector<SensingPath> select_paths(const DamageIndexSet& dis, int k);

// Greedy non-maximum suppression over the 8-neighbour local maxima that
// reach rel_threshold * global max.
std::vector<Peak> extract_peaks(const DamageMap& map, const PeakParams& params);

void write_map_csv(const DamageMap& map, const std::filesystem::path& file);
// 16-bit binary PGM, values min-max scaled, top row = largest y.
void write_map_pgm(const DamageMap& map, const std::filesystem::path& file);
nlohmann::json peaks_to_json(const std::vector<Peak>& peaks);

}  // namespace gwkae
