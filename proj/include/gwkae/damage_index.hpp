#pragma once

#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "gwkae/kae_model.hpp"
#include "gwkae/signal_model.hpp"

namespace gwkae {

struct PathDI {
    SensingPath path;
    double di = 0.0;
};

struct DamageIndexSet {
    int region_id = 0;
    std::vector<PathDI> entries;

    std::vector<double> values() const;
    double di_of(const SensingPath& path) const;  // DataError when absent
};

struct HealthReport {
    int region_id = 0;
    double hi = 0.0;
    double threshold = 0.0;
    bool damaged = false;
    std::vector<PathDI> per_path;
};

// Reconstruction error of a normalized signal under the model's reduction.
double compute_di(const KAEModel& model, const GWSignal& signal);

// Linear-interpolation quantile at position p * (n - 1) of the sorted values.
double quantile(std::span<const double> values, double p);

// 95% quantile of the set's DI values.
double compute_hi(const DamageIndexSet& dis);

inline constexpr double kHealthQuantile = 0.95;

// ThrV for one region: HI of the pooled DI values of all given pristine sets.
double calibrate_threshold(std::span<const DamageIndexSet> pristine_sets);

// ThrV for every layout region; a region without pristine sets is a
// CalibrationError.
std::map<int, double> calibrate_thresholds(const SensorLayout& layout, std::span<const DamageIndexSet> pristine_sets);

// damaged = HI > threshold (strict).
HealthReport detect(const DamageIndexSet& current, double threshold);

// As above, taking the threshold for current.region_id from a calibrated map.
HealthReport detect(const DamageIndexSet& current, const std::map<int, double>& thresholds);

// Scores every enumerated path of `region` for one repetition of a
// normalized dataset. Missing paths are a DataError.
DamageIndexSet score_region(const KAEModel& model, const SensorLayout& layout, const Region& region,
                            const std::vector<GWSignal>& signals, int repetition);

// One DamageIndexSet per (region, repetition) present in the dataset.
std::vector<DamageIndexSet> score_all(const KAEModel& model, const SensorLayout& layout,
                                      const std::vector<GWSignal>& signals, std::span<const int> repetitions);

nlohmann::json to_json(const HealthReport& report);
nlohmann::json thresholds_to_json(const std::map<int, double>& thresholds);
std::map<int, double> thresholds_from_json(const nlohmann::json& j);

}  // namespace gwkae
