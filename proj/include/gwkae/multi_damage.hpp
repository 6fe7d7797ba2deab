#pragma once

#include <map>
#include <vector>

#include <json.hpp>

#include "gwkae/damage_index.hpp"
#include "gwkae/imaging.hpp"
#include "gwkae/kae_model.hpp"

namespace gwkae {

struct CandidateDamage {
    double x_mm = 0.0;
    double y_mm = 0.0;
    int region_id = 0;
    double score = 0.0;
};

struct MergeConfig {
    double distance_threshold_mm = 30.0;
};

struct FinalDamage {
    double x_mm = 0.0;
    double y_mm = 0.0;
    double score = 0.0;
    std::vector<int> contributing_regions;
};

struct LocalizationParams {
    double resolution_mm = 2.0;
    MRAPIDParams mrapid;
    PeakParams peaks;
};

struct RegionOutcome {
    HealthReport report;
    std::optional<DamageMap> map;  // present for damaged regions only
};

struct LocalizationResult {
    std::vector<RegionOutcome> regions;
    std::vector<CandidateDamage> candidates;
};

// Detects every region of a scored measurement against its calibrated
// threshold and images the damaged ones over their own bounds. Each map
// peak becomes a candidate. `current` holds one DamageIndexSet per region.
LocalizationResult localize_all(const SensorLayout& layout, const std::vector<DamageIndexSet>& current,
                                const std::map<int, double>& thresholds, const LocalizationParams& params);

// Scores `signals` (normalized, one repetition) with the model first.
LocalizationResult localize_all(const SensorLayout& layout, const std::vector<GWSignal>& signals, int repetition,
                                const KAEModel& model, const std::map<int, double>& thresholds,
                                const LocalizationParams& params);

// Candidates are visited in descending score. An unprocessed candidate
// absorbs, one at a time, the strongest unprocessed candidate closer than the
// threshold, moving to the pairwise average after each absorption; the
// result is one final damage. Passes repeat until nothing merges, so the
// output is a fixed point.
std::vector<FinalDamage> merge_duplicates(const std::vector<CandidateDamage>& candidates, const MergeConfig& cfg);
std::vector<FinalDamage> merge_duplicates(const std::vector<FinalDamage>& damages, const MergeConfig& cfg);

nlohmann::json to_json(const std::vector<FinalDamage>& damages);
nlohmann::json candidates_to_json(const std::vector<CandidateDamage>& candidates);

}  // namespace gwkae
