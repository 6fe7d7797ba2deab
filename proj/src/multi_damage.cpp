#include "gwkae/multi_damage.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gwkae/errors.hpp"

namespace gwkae {

LocalizationResult localize_all(const SensorLayout& layout, const std::vector<DamageIndexSet>& current,
                                const std::map<int, double>& thresholds, const LocalizationParams& params) {
    LocalizationResult result;
    for (const auto& region : layout.regions()) {
        auto thr = thresholds.find(region.id);
        if (thr == thresholds.end()) {
            throw CalibrationError("region " + std::to_string(region.id) + " has no calibrated threshold");
        }
        auto set = std::find_if(current.begin(), current.end(),
                                [&](const DamageIndexSet& s) { return s.region_id == region.id; });
        if (set == current.end()) {
            throw DataError("no DI set for region " + std::to_string(region.id));
        }
        RegionOutcome outcome{detect(*set, thr->second), std::nullopt};
        if (outcome.report.damaged) {
            const auto paths = params.mrapid.top_k ? select_paths(*set, *params.mrapid.top_k)
                                                   : enumerate_paths(layout, region);
            DamageMap map = fuse(paths, *set, layout, ImagingGrid{region.bounds, params.resolution_mm}, params.mrapid);
            map.peaks = extract_peaks(map, params.peaks);
            for (const auto& p : map.peaks) {
                result.candidates.push_back({p.x_mm, p.y_mm, region.id, p.value});
            }
            outcome.map = std::move(map);
        }
        result.regions.push_back(std::move(outcome));
    }
    return result;
}

LocalizationResult localize_all(const SensorLayout& layout, const std::vector<GWSignal>& signals, int repetition,
                                const KAEModel& model, const std::map<int, double>& thresholds,
                                const LocalizationParams& params) {
    for (const auto& region : layout.regions()) {
        if (!thresholds.contains(region.id)) {
            throw CalibrationError("region " + std::to_string(region.id) + " has no calibrated threshold");
        }
    }
    const int reps[] = {repetition};
    return localize_all(layout, score_all(model, layout, signals, reps), thresholds, params);
}

namespace {

std::vector<FinalDamage> merge_pass(std::vector<FinalDamage> items, double threshold, bool& merged_any) {
    std::stable_sort(items.begin(), items.end(),
                     [](const FinalDamage& a, const FinalDamage& b) { return a.score > b.score; });
    std::vector<bool> processed(items.size(), false);
    std::vector<FinalDamage> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (processed[i]) continue;
        processed[i] = true;
        FinalDamage current = items[i];
        while (true) {
            std::size_t best = items.size();
            for (std::size_t j = 0; j < items.size(); ++j) {
                if (processed[j]) continue;
                if (std::hypot(items[j].x_mm - current.x_mm, items[j].y_mm - current.y_mm) < threshold) {
                    best = j;  // items are in descending score, so the first hit is the strongest
                    break;
                }
            }
            if (best == items.size()) break;
            processed[best] = true;
            merged_any = true;
            current.x_mm = 0.5 * (current.x_mm + items[best].x_mm);
            current.y_mm = 0.5 * (current.y_mm + items[best].y_mm);
            std::set<int> regions(current.contributing_regions.begin(), current.contributing_regions.end());
            regions.insert(items[best].contributing_regions.begin(), items[best].contributing_regions.end());
            current.contributing_regions.assign(regions.begin(), regions.end());
        }
        out.push_back(std::move(current));
    }
    return out;
}

}  // namespace

std::vector<FinalDamage> merge_duplicates(const std::vector<FinalDamage>& damages, const MergeConfig& cfg) {
    if (!(cfg.distance_threshold_mm > 0.0)) {
        throw ConfigError("merge distance threshold must be > 0");
    }
    std::vector<FinalDamage> current = damages;
    while (true) {
        bool merged_any = false;
        current = merge_pass(std::move(current), cfg.distance_threshold_mm, merged_any);
        if (!merged_any) return current;
    }
}

std::vector<FinalDamage> merge_duplicates(const std::vector<CandidateDamage>& candidates, const MergeConfig& cfg) {
    std::vector<FinalDamage> items;
    items.reserve(candidates.size());
    for (const auto& c : candidates) {
        items.push_back({c.x_mm, c.y_mm, c.score, {c.region_id}});
    }
    return merge_duplicates(items, cfg);
}

nlohmann::json to_json(const std::vector<FinalDamage>& damages) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : damages) {
        arr.push_back({{"x_mm", d.x_mm}, {"y_mm", d.y_mm}, {"score", d.score},
                       {"contributing_regions", d.contributing_regions}});
    }
    return arr;
}

nlohmann::json candidates_to_json(const std::vector<CandidateDamage>& candidates) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : candidates) {
        arr.push_back({{"x_mm", c.x_mm}, {"y_mm", c.y_mm}, {"region_id", c.region_id}, {"score", c.score}});
    }
    return arr;
}

}  // namespace gwkae
