#include "gwkae/damage_index.hpp"

#include <algorithm>
#include <cmath>

#include "gwkae/errors.hpp"

namespace gwkae {

std::vector<double> DamageIndexSet::values() const {
    std::vector<double> v;
    v.reserve(entries.size());
    for (const auto& e : entries) v.push_back(e.di);
    return v;
}

double DamageIndexSet::di_of(const SensingPath& path) const {
    for (const auto& e : entries) {
        if (e.path == path) return e.di;
    }
    throw DataError("no DI for path " + std::to_string(path.actuator_id) + "-" + std::to_string(path.sensor_id) +
                    " in region " + std::to_string(region_id));
}

double compute_di(const KAEModel& model, const GWSignal& signal) {
    if (static_cast<int>(signal.samples.size()) != model.input_width()) {
        throw ShapeError("signal width " + std::to_string(signal.samples.size()) + " does not match model input " +
                         std::to_string(model.input_width()));
    }
    const auto rec = reconstruct(model, signal.samples);
    return loss(signal.samples, rec, model.reduction());
}

double quantile(std::span<const double> values, double p) {
    if (values.empty()) {
        throw DataError("quantile of an empty list");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw UsageError("quantile fraction must be in [0, 1]");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= v.size()) return v[lo];
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

double compute_hi(const DamageIndexSet& dis) {
    if (dis.entries.empty()) {
        throw DataError("region " + std::to_string(dis.region_id) + " has no DI entries");
    }
    return quantile(dis.values(), kHealthQuantile);
}

double calibrate_threshold(std::span<const DamageIndexSet> pristine_sets) {
    std::vector<double> pooled;
    for (const auto& s : pristine_sets) {
        const auto v = s.values();
        pooled.insert(pooled.end(), v.begin(), v.end());
    }
    if (pooled.empty()) {
        throw CalibrationError("no pristine DI values to calibrate from");
    }
    return quantile(pooled, kHealthQuantile);
}

std::map<int, double> calibrate_thresholds(const SensorLayout& layout, std::span<const DamageIndexSet> pristine_sets) {
    std::map<int, double> out;
    for (const auto& region : layout.regions()) {
        std::vector<DamageIndexSet> mine;
        for (const auto& s : pristine_sets) {
            if (s.region_id == region.id) mine.push_back(s);
        }
        if (mine.empty()) {
            throw CalibrationError("no pristine data for region " + std::to_string(region.id));
        }
        out[region.id] = calibrate_threshold(mine);
    }
    return out;
}

HealthReport detect(const DamageIndexSet& current, double threshold) {
    HealthReport r;
    r.region_id = current.region_id;
    r.hi = compute_hi(current);
    r.threshold = threshold;
    r.damaged = r.hi > threshold;
    r.per_path = current.entries;
    return r;
}

HealthReport detect(const DamageIndexSet& current, const std::map<int, double>& thresholds) {
    auto it = thresholds.find(current.region_id);
    if (it == thresholds.end()) {
        throw UsageError("no calibrated threshold for region " + std::to_string(current.region_id));
    }
    return detect(current, it->second);
}

DamageIndexSet score_region(const KAEModel& model, const SensorLayout& layout, const Region& region,
                            const std::vector<GWSignal>& signals, int repetition) {
    DamageIndexSet set;
    set.region_id = region.id;
    const auto paths = enumerate_paths(layout, region);
    std::vector<const GWSignal*> chosen;
    for (const auto& path : paths) {
        auto it = std::find_if(signals.begin(), signals.end(), [&](const GWSignal& s) {
            return s.path == path && s.repetition == repetition;
        });
        if (it == signals.end()) {
            throw DataError("no signal for path " + std::to_string(path.actuator_id) + "-" +
                            std::to_string(path.sensor_id) + " repetition " + std::to_string(repetition));
        }
        chosen.push_back(&*it);
    }
    RowMatrix x(static_cast<Eigen::Index>(chosen.size()), model.input_width());
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const auto& s = chosen[i]->samples;
        if (static_cast<int>(s.size()) != model.input_width()) {
            throw ShapeError("signal width " + std::to_string(s.size()) + " does not match model input " +
                             std::to_string(model.input_width()));
        }
        std::copy(s.begin(), s.end(), x.row(static_cast<Eigen::Index>(i)).data());
    }
    const RowMatrix y = reconstruct_batch(model, x);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const double di = loss(std::span<const double>(x.row(row).data(), x.cols()),
                               std::span<const double>(y.row(row).data(), y.cols()), model.reduction());
        set.entries.push_back({paths[i], di});
    }
    return set;
}

std::vector<DamageIndexSet> score_all(const KAEModel& model, const SensorLayout& layout,
                                      const std::vector<GWSignal>& signals, std::span<const int> repetitions) {
    std::vector<DamageIndexSet> out;
    for (int rep : repetitions) {
        for (const auto& region : layout.regions()) {
            out.push_back(score_region(model, layout, region, signals, rep));
        }
    }
    return out;
}

nlohmann::json to_json(const HealthReport& report) {
    nlohmann::json per_path = nlohmann::json::array();
    for (const auto& e : report.per_path) {
        per_path.push_back({{"actuator", e.path.actuator_id}, {"sensor", e.path.sensor_id}, {"di", e.di}});
    }
    return {{"region_id", report.region_id},
            {"HI", report.hi},
            {"ThrV", report.threshold},
            {"damaged", report.damaged},
            {"per_path", per_path}};
}

nlohmann::json thresholds_to_json(const std::map<int, double>& thresholds) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, thr] : thresholds) {
        arr.push_back({{"region_id", id}, {"ThrV", thr}});
    }
    return {{"thresholds", arr}};
}

std::map<int, double> thresholds_from_json(const nlohmann::json& j) {
    std::map<int, double> out;
    try {
        for (const auto& e : j.at("thresholds")) {
            out[e.at("region_id").get<int>()] = e.at("ThrV").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed thresholds file: ") + e.what());
    }
    return out;
}

}  // namespace gwkae
