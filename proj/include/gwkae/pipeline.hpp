#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwkae/bspline.hpp"
#include "gwkae/kae_model.hpp"
#include "gwkae/metrics.hpp"
#include "gwkae/multi_damage.hpp"
#include "gwkae/simulator.hpp"
#include "gwkae/train.hpp"

namespace gwkae {

struct GridLayoutSpec {
    int rows = 3;
    int cols = 5;
    double spacing_mm = 150.0;
    int region_size = 3;
    int region_stride = 1;
};

struct SimulationConfig {
    GridLayoutSpec layout;
    SimParams params;
    int repetitions = 10;
    int damaged_repetitions = 1;
    std::vector<DamageSpec> damages{{120.0, 90.0, 20.0}};
};

// File paths left empty resolve to fixed names under out_dir.
struct PipelineConfig {
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "gwkae_out";
    std::filesystem::path layout_file;
    std::filesystem::path baseline_csv;
    std::filesystem::path damaged_csv;
    std::filesystem::path calibration_csv;  // empty: held-out repetitions of baseline_csv
    std::filesystem::path truth_file;
    std::filesystem::path model_file;
    std::filesystem::path thresholds_file;
    std::filesystem::path damages_file;
    std::filesystem::path pairs_file;  // evaluate reads explicit pairs instead of damages + truth
    std::string pairs_column;
    double sample_rate_hz = 12e6;

    std::vector<int> hidden_widths{512, 256, 8};
    Reduction reduction = Reduction::Mean;
    BSplineGrid grid;
    TrainConfig train;

    int measurement_repetition = 0;
    LocalizationParams imaging;
    MergeConfig merge;
    MetricConfig metrics;
    SimulationConfig simulation;

    void validate() const;  // throws ConfigError

    std::filesystem::path layout_path() const;
    std::filesystem::path baseline_path() const;
    std::filesystem::path damaged_path() const;
    std::filesystem::path truth_path() const;
    std::filesystem::path model_path() const;
    std::filesystem::path thresholds_path() const;
    std::filesystem::path damages_path() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
// Missing keys keep their defaults; unknown keys are a ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& file);

// 64-bit FNV-1a of the canonical (sorted-key) JSON form of the config.
std::uint64_t config_hash(const PipelineConfig& cfg);

// Each command logs a short summary to `log` and writes its artifacts.
void cmd_simulate(const PipelineConfig& cfg, std::ostream& log);
void cmd_train(const PipelineConfig& cfg, std::ostream& log);
void cmd_calibrate(const PipelineConfig& cfg, std::ostream& log);
// Returns true when any region is damaged.
bool cmd_detect(const PipelineConfig& cfg, std::ostream& log);
void cmd_localize(const PipelineConfig& cfg, std::ostream& log);
EvaluationReport cmd_evaluate(const PipelineConfig& cfg, std::ostream& log);

}  // namespace gwkae
